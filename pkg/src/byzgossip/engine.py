"""Clipped gossip steps for the average consensus problem.

Each honest node ``i`` holds ``x_i``; with ``f_i(x) = ||x - x_i*||^2`` the
dual variable is ``y_i = x_i - x_i*`` and the Lagrange multipliers live on
edges. One step moves every multiplier by the clipped difference of its two
endpoints, which in primal form is

    X_h <- X_h - eta * [C_h C_b] clip(C^T X; taus)

with Byzantine rows of ``C^T X`` being ``declared_e - x_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from byzgossip import kernels
from byzgossip.topology import DirectedIncidenceSet, IncidenceSet, Topology


class NonFiniteError(ValueError):
    """Raised when a state or an adversarial declaration contains NaN/Inf."""


def clip(x, tau):
    """Project ``x`` onto the L2 ball of radius ``tau`` (``inf`` allowed)."""
    if tau < 0:
        raise ValueError("clipping threshold must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    norm = float(np.linalg.norm(x))
    if norm <= tau:
        return x.copy()
    return x * (tau / norm)


def clip_rows(M, taus):
    """Row-wise :func:`clip`; returns ``(clipped, row_norms)``."""
    taus = np.asarray(taus, dtype=np.float64)
    if np.any(taus < 0) or np.any(np.isnan(taus)):
        raise ValueError("clipping thresholds must be non-negative")
    M = np.ascontiguousarray(M, dtype=np.float64)
    if M.shape[0] != taus.shape[0]:
        raise ValueError(f"{M.shape[0]} rows but {taus.shape[0]} thresholds")
    if M.shape[0] == 0:
        return M.copy(), np.zeros(0)
    return kernels.clip_rows(M, taus)


@dataclass(frozen=True)
class HonestState:
    """Honest parameters ``X_h`` (n_h x d), targets ``X_star`` and step counter."""

    X_h: np.ndarray
    X_star: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, X0) -> "HonestState":
        X0 = np.array(X0, dtype=np.float64)
        _check_finite(X0, "initial state")
        return cls(X0, X0.copy(), 0)

    @property
    def n_h(self) -> int:
        return self.X_h.shape[0]

    @property
    def d(self) -> int:
        return self.X_h.shape[1]


@dataclass
class DualLedger:
    """Accumulated edge multipliers and the running threshold sum."""

    Lambda_h: np.ndarray
    Lambda_b: np.ndarray
    cumulative_tau: float = 0.0
    Lambda_dir: np.ndarray | None = field(default=None)

    @classmethod
    def zeros(cls, topology: Topology, d: int) -> "DualLedger":
        return cls(np.zeros((topology.n_edges_h, d)), np.zeros((topology.n_edges_b, d)))


@dataclass(frozen=True)
class EdgeDiffs:
    """Rows of ``C^T X``: ``x_j - x_i`` per honest edge, ``declared - x_i`` per Byzantine edge."""

    honest: np.ndarray
    byz: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.vstack([self.honest, self.byz])


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"non-finite values in {what}")


def _check_declared(declared, inc: IncidenceSet, d: int) -> np.ndarray:
    nb = len(inc.byz_node)
    if declared is None:
        if nb:
            raise ValueError("declared values required when Byzantine edges exist")
        return np.zeros((0, d))
    declared = np.asarray(declared, dtype=np.float64).reshape(-1, d) if nb else np.zeros((0, d))
    if declared.shape != (nb, d):
        raise ValueError(f"expected declarations of shape {(nb, d)}, got {declared.shape}")
    _check_finite(declared, "Byzantine declarations")
    return declared


def edge_diffs(state: HonestState, declared, inc: IncidenceSet) -> EdgeDiffs:
    X = state.X_h
    declared = _check_declared(declared, inc, X.shape[1])
    honest = X[inc.head] - X[inc.tail]
    byz = declared - X[inc.byz_node]
    return EdgeDiffs(honest, byz)


def step_undirected(state: HonestState, declared, inc: IncidenceSet, eta: float, taus):
    """One EdgeClippedGossip step with one threshold per undirected edge.

    ``taus`` lists honest edges first, then Byzantine edges.

    Returns:
        ``(next_state, dLambda_h, dLambda_b)`` where the multiplier increments
        are ``-eta * clip(...)`` for the honest and Byzantine blocks.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    diffs = edge_diffs(state, declared, inc)
    m = diffs.honest.shape[0]
    clipped, _ = clip_rows(diffs.stacked(), taus)
    ch, cb = clipped[:m], clipped[m:]
    n, d = state.X_h.shape
    delta = np.zeros((n, d))
    kernels.scatter_add(delta, inc.tail, ch, eta)
    kernels.scatter_add(delta, inc.head, ch, -eta)
    kernels.scatter_add(delta, inc.byz_node, cb, eta)
    X_next = state.X_h + delta
    _check_finite(X_next, "updated state")
    return replace(state, X_h=X_next, t=state.t + 1), -eta * ch, -eta * cb


def directed_diffs(state: HonestState, declared, dinc: DirectedIncidenceSet) -> np.ndarray:
    """Rows of ``C_dir^T X``: ``x_dst - x_src``, with the declaration as source on Byzantine edges."""
    X = state.X_h
    d = X.shape[1]
    nb = int((dinc.src < 0).sum())
    if nb:
        declared = np.asarray(declared, dtype=np.float64).reshape(nb, d)
        _check_finite(declared, "Byzantine declarations")
    src_vals = np.empty((len(dinc.src), d))
    honest = dinc.src >= 0
    src_vals[honest] = X[dinc.src[honest]]
    if nb:
        src_vals[~honest] = declared[dinc.byz_index[~honest]]
    return X[dinc.dst] - src_vals


def step_directed(state: HonestState, declared, dinc: DirectedIncidenceSet, eta: float, taus):
    """One step with per-directed-edge thresholds: node ``j`` moves by
    ``-eta * sum_{i->j} clip(x_j - x_i; tau_{i->j})``.

    Returns:
        ``(next_state, dLambda_dir)``.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    diffs = directed_diffs(state, declared, dinc)
    clipped, _ = clip_rows(diffs, taus)
    delta = np.zeros_like(state.X_h)
    kernels.scatter_add(delta, dinc.dst, clipped, -eta)
    X_next = state.X_h + delta
    _check_finite(X_next, "updated state")
    return replace(state, X_h=X_next, t=state.t + 1), -eta * clipped


def clipped_sum(diffs, tau):
    """Clipped Sum aggregation of a node's neighbour differences."""
    return sum((clip(z, tau) for z in diffs), np.zeros(np.shape(diffs)[-1]))


def frg_step(state: HonestState, declared, topology: Topology, eta: float, aggregate):
    """Node-wise robust gossip: ``x_i <- x_i - eta * F((x_i - x_j)_{j ~ i})``.

    Written per node over adjacency lists, independently of the incidence
    machinery. ``aggregate(i, diffs)`` receives node ``i`` and the list of
    its differences (honest neighbours, then Byzantine declarations).
    """
    X = state.X_h
    d = X.shape[1]
    nbrs = [[] for _ in range(topology.n_h)]
    for i, j in topology.honest_edges:
        nbrs[i].append(X[j])
        nbrs[j].append(X[i])
    if topology.n_edges_b:
        declared = np.asarray(declared, dtype=np.float64).reshape(topology.n_edges_b, d)
        for e, (i, _) in enumerate(topology.byz_edges):
            nbrs[i].append(declared[e])
    X_next = np.empty_like(X)
    for i in range(topology.n_h):
        diffs = [X[i] - v for v in nbrs[i]]
        X_next[i] = X[i] - eta * aggregate(i, diffs)
    _check_finite(X_next, "updated state")
    return replace(state, X_h=X_next, t=state.t + 1)
