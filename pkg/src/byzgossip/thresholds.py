"""Per-step clipping thresholds for each defense.

Symmetric policies (``none``, ``oracle``, ``fixed``, ``gcr``,
``gcr_simplified``) emit one threshold per undirected edge, honest edges
first. Local policies (``local_clip``, ``local_trim``) emit one threshold
per directed edge, ordered as in :class:`~byzgossip.topology.DirectedIncidenceSet`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from byzgossip import kernels
from byzgossip.topology import (
    DirectedIncidenceSet,
    IncidenceSet,
    SpectralSummary,
    Topology,
)

# Robustness constants within this distance of 1 are treated as 1: the
# pseudo-inverse leaves ~1e-15 noise on values that are exactly 1.
GCR_DELTA_TOL = 1e-12


def gcr_applicable(delta_infty: float) -> bool:
    return delta_infty < 1.0 - GCR_DELTA_TOL


@dataclass(frozen=True)
class GcrDiagnostics:
    tau: float
    kappa: int
    lhs: float
    rhs: float
    satisfied: bool


def _bias_term(eta, E_b_count, n_h, cum_tau_prev, tau):
    if E_b_count == 0:
        return 0.0
    return eta * E_b_count**2 / n_h * (cum_tau_prev + tau)


def gcr_evaluate(norms, tau, delta_infty, eta, E_b_count, n_h, cum_tau_prev) -> GcrDiagnostics:
    """Evaluate both sides of the global clipping rule at ``tau``.

    ``kappa`` counts honest edges with norm strictly above ``tau``; the left
    side sums those norms.
    """
    norms = np.asarray(norms, dtype=np.float64)
    over = norms > tau
    kappa = int(over.sum())
    # exactly rounded sums, so the verdict does not depend on edge order
    lhs = math.fsum(norms[over].tolist())
    rhs = delta_infty * math.fsum(norms.tolist()) + _bias_term(eta, E_b_count, n_h, cum_tau_prev, tau)
    return GcrDiagnostics(float(tau), kappa, lhs, rhs, bool(tau == 0 or lhs >= rhs))


def gcr_largest_tau(honest_edge_norms, delta_infty, eta, E_b_count, n_h, cum_tau_prev,
                    over_clip=False):
    """Largest threshold satisfying the global clipping rule.

    On each interval between consecutive sorted norms the clipped count is
    constant and the right-hand side is affine in ``tau``, so the optimum is
    either an interval end or the root of that affine constraint. The
    highest admissible interval is found by a sort-and-scan; the candidate is
    then confirmed by direct evaluation (stepping down if rounding puts it a
    hair outside the rule).

    With ``over_clip`` the input holds the norms of *all* edges, unlabeled;
    the ``E_b_count`` largest are set aside before the scan.

    Returns:
        ``(tau, GcrDiagnostics)`` where the diagnostics describe the norms
        the rule was evaluated on.
    """
    norms = np.sort(np.asarray(honest_edge_norms, dtype=np.float64))[::-1]
    if over_clip and E_b_count:
        norms = norms[E_b_count:]
    norms = np.ascontiguousarray(norms)

    def ev(t):
        return gcr_evaluate(norms, t, delta_infty, eta, E_b_count, n_h, cum_tau_prev)

    if E_b_count > 0 and not gcr_applicable(delta_infty):
        return 0.0, ev(0.0)
    rate = eta * E_b_count**2 / n_h if E_b_count else 0.0
    const = delta_infty * math.fsum(norms.tolist()) + (rate * cum_tau_prev if E_b_count else 0.0)
    m = len(norms)
    start = 0
    while True:
        k, bound = kernels.gcr_interval_scan(norms, const, rate, start)
        if k < 0:
            return 0.0, ev(0.0)
        hi = np.inf if k == 0 else norms[k - 1]
        lo = norms[k] if k < m else 0.0
        top = bound if k == 0 else min(bound, np.nextafter(hi, 0.0))
        for cand in (top, top * (1 - 2.0**-40), top * (1 - 2.0**-20), lo):
            if cand > 0 and cand >= lo:
                diag = ev(cand)
                if diag.satisfied:
                    return float(cand), diag
        start = k + 1


def gcr_simplified_check(kappa, tau, E_h_count, E_b_count, n_h, delta_infty, eta, tau_history) -> bool:
    """Sufficient, state-free version of the clipping rule for ``tau > 0``.

    ``tau_history`` holds the thresholds of previous steps.
    """
    if not tau > 0:
        raise ValueError("tau must be positive; tau = 0 always satisfies the rule")
    rhs = delta_infty * E_h_count
    if E_b_count:
        total = float(np.sum(tau_history)) + tau
        rhs += eta * E_b_count**2 / n_h * (total / tau)
    return bool(kappa >= rhs)


def gcr_simplified_largest_tau(honest_edge_norms, delta_infty, eta, E_b_count, n_h, tau_history):
    """Largest candidate threshold accepted by :func:`gcr_simplified_check`.

    Within an interval of constant clipped count the check only gets easier
    as ``tau`` grows, so each interval is tested at its top.
    """
    norms = np.sort(np.asarray(honest_edge_norms, dtype=np.float64))
    m = len(norms)
    if E_b_count > 0 and not gcr_applicable(delta_infty):
        return 0.0, 0
    tops = [np.inf] + [np.nextafter(v, 0.0) for v in np.unique(norms)[::-1] if v > 0]
    for tau in tops:
        kappa = m - int(np.searchsorted(norms, tau, side="right"))
        if tau > 0 and gcr_simplified_check(kappa, tau, m, E_b_count, n_h, delta_infty, eta,
                                            tau_history):
            return float(tau), kappa
    return 0.0, int((norms > 0).sum())


def _inbound_csr(dinc: DirectedIncidenceSet, n_h: int):
    order = np.argsort(dinc.dst, kind="stable")
    counts = np.bincount(dinc.dst, minlength=n_h)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.intp)
    return order, indptr


def _directed_norms(X_h, declared, dinc):
    from byzgossip.engine import HonestState, directed_diffs

    diffs = directed_diffs(HonestState(X_h, X_h), declared, dinc)
    return np.sqrt(np.einsum("ij,ij->i", diffs, diffs))


def local_clip_thresholds(norms, dinc: DirectedIncidenceSet, n_h: int, b: int) -> np.ndarray:
    """Node-wise clipping at the ``2b``-th largest inbound difference norm.

    ``norms`` is indexed by directed edge. A node with at most ``2b``
    neighbours clips everything (threshold 0); ``b = 0`` disables clipping.
    """
    if b < 0:
        raise ValueError("b must be non-negative")
    if b == 0:
        return np.full(len(dinc.dst), np.inf)
    order, indptr = _inbound_csr(dinc, n_h)
    per_node = kernels.segment_kth_largest(np.ascontiguousarray(norms[order]), indptr, 2 * b)
    deg = np.diff(indptr)
    per_node = np.where(deg <= 2 * b, 0.0, per_node)
    return per_node[dinc.dst]


def local_trim_thresholds(norms, dinc: DirectedIncidenceSet, n_h: int, b: int) -> np.ndarray:
    """Node-wise trimming: the ``2b`` largest inbound differences are dropped.

    Dropped edges get threshold 0, the rest ``inf``; ties drop the lower
    directed-edge index first.
    """
    if b < 0:
        raise ValueError("b must be non-negative")
    taus = np.full(len(dinc.dst), np.inf)
    if b == 0:
        return taus
    order, indptr = _inbound_csr(dinc, n_h)
    mask = kernels.segment_top_mask(np.ascontiguousarray(norms[order]), indptr, 2 * b)
    taus[order[mask]] = 0.0
    return taus


def oracle_thresholds(topology: Topology) -> np.ndarray:
    return np.concatenate([np.full(topology.n_edges_h, np.inf), np.zeros(topology.n_edges_b)])


@dataclass(frozen=True)
class StepView:
    """Everything a policy may look at when choosing thresholds for one step."""

    X_h: np.ndarray
    declared: np.ndarray
    topology: Topology
    inc: IncidenceSet
    dinc: DirectedIncidenceSet
    spectral: SpectralSummary
    eta: float


@dataclass(frozen=True)
class Thresholds:
    taus: np.ndarray
    directed: bool
    tau: float = np.nan
    kappa: int = -1
    diagnostics: GcrDiagnostics | None = None


def honest_edge_norms(X_h, inc: IncidenceSet) -> np.ndarray:
    D = X_h[inc.head] - X_h[inc.tail]
    return np.sqrt(np.einsum("ij,ij->i", D, D))


class ThresholdPolicy:
    """Base class; subclasses set ``name`` and implement :meth:`thresholds`."""

    name = "policy"
    directed = False
    symmetric = True

    def reset(self):
        pass

    def thresholds(self, view: StepView) -> Thresholds:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


class NoDefense(ThresholdPolicy):
    name = "none"

    def thresholds(self, view):
        n = view.topology.n_edges_h + view.topology.n_edges_b
        return Thresholds(np.full(n, np.inf), False, np.inf, 0)


class Oracle(ThresholdPolicy):
    name = "oracle"

    def thresholds(self, view):
        return Thresholds(oracle_thresholds(view.topology), False, np.inf, 0)


class Fixed(ThresholdPolicy):
    name = "fixed"

    def __init__(self, tau: float):
        if tau < 0:
            raise ValueError("tau must be non-negative")
        self.tau = float(tau)

    def thresholds(self, view):
        n = view.topology.n_edges_h + view.topology.n_edges_b
        norms = honest_edge_norms(view.X_h, view.inc)
        return Thresholds(np.full(n, self.tau), False, self.tau, int((norms > self.tau).sum()))

    def __repr__(self):
        return f"Fixed(tau={self.tau})"


class Gcr(ThresholdPolicy):
    """Largest global threshold satisfying the clipping rule each step.

    Args:
        over_clip: Scan unlabeled norms of all edges after discarding the
            ``|E_b|`` largest, instead of the oracle honest-edge norms.
        assumed_byz: Byzantine edge count used in the rule (defaults to the
            true count; over-estimates stay safe).
    """

    name = "gcr"

    def __init__(self, over_clip: bool = False, assumed_byz: int | None = None):
        self.over_clip = over_clip
        self.assumed_byz = assumed_byz
        self.cumulative_tau = 0.0
        self.history: list[float] = []

    def reset(self):
        self.cumulative_tau = 0.0
        self.history = []

    def thresholds(self, view):
        topo = view.topology
        n_b = topo.n_edges_b if self.assumed_byz is None else self.assumed_byz
        norms = honest_edge_norms(view.X_h, view.inc)
        if self.over_clip and topo.n_edges_b:
            bd = np.asarray(view.declared).reshape(topo.n_edges_b, -1) - view.X_h[view.inc.byz_node]
            norms = np.concatenate([norms, np.linalg.norm(bd, axis=1)])
        tau, diag = gcr_largest_tau(norms, view.spectral.delta_infty, view.eta, n_b, topo.n_h,
                                    self.cumulative_tau, over_clip=self.over_clip)
        self.cumulative_tau += tau
        self.history.append(tau)
        n = topo.n_edges_h + topo.n_edges_b
        kappa = int((honest_edge_norms(view.X_h, view.inc) > tau).sum())
        return Thresholds(np.full(n, tau), False, tau, kappa, diag)

    def __repr__(self):
        return f"Gcr(over_clip={self.over_clip}, assumed_byz={self.assumed_byz})"


class GcrSimplified(ThresholdPolicy):
    name = "gcr_simplified"

    def __init__(self):
        self.history: list[float] = []

    def reset(self):
        self.history = []

    @property
    def cumulative_tau(self):
        return float(sum(self.history))

    def thresholds(self, view):
        topo = view.topology
        norms = honest_edge_norms(view.X_h, view.inc)
        tau, kappa = gcr_simplified_largest_tau(norms, view.spectral.delta_infty, view.eta,
                                                topo.n_edges_b, topo.n_h, self.history)
        self.history.append(tau)
        n = topo.n_edges_h + topo.n_edges_b
        return Thresholds(np.full(n, tau), False, tau, kappa)


class LocalClip(ThresholdPolicy):
    """CS-RG: each node clips inbound differences at its ``2b``-th largest norm."""

    name = "local_clip"
    directed = True
    symmetric = False

    def __init__(self, b: int):
        self.b = int(b)

    def thresholds(self, view):
        norms = _directed_norms(view.X_h, view.declared, view.dinc)
        taus = local_clip_thresholds(norms, view.dinc, view.topology.n_h, self.b)
        return Thresholds(taus, True)

    def __repr__(self):
        return f"LocalClip(b={self.b})"


class LocalTrim(ThresholdPolicy):
    """GTS-RG: each node discards its ``2b`` largest inbound differences."""

    name = "local_trim"
    directed = True
    symmetric = False

    def __init__(self, b: int):
        self.b = int(b)

    def thresholds(self, view):
        norms = _directed_norms(view.X_h, view.declared, view.dinc)
        taus = local_trim_thresholds(norms, view.dinc, view.topology.n_h, self.b)
        return Thresholds(taus, True)

    def cut_norms(self, X_h, topology: Topology) -> np.ndarray:
        """Per node, the ``2b``-th largest honest-neighbour difference norm.

        A Byzantine difference strictly below this value survives trimming.
        ``inf`` when ``b = 0``; 0 when a node has fewer than ``2b`` honest
        neighbours.
        """
        n = topology.n_h
        if self.b == 0:
            return np.full(n, np.inf)
        vals = [[] for _ in range(n)]
        for i, j in topology.honest_edges:
            r = float(np.linalg.norm(X_h[i] - X_h[j]))
            vals[i].append(r)
            vals[j].append(r)
        k = 2 * self.b
        return np.array([sorted(v, reverse=True)[k - 1] if len(v) >= k else 0.0 for v in vals])

    def __repr__(self):
        return f"LocalTrim(b={self.b})"


def make_policy(name: str, **params) -> ThresholdPolicy:
    """Build a policy from its tag, e.g. ``make_policy("local_clip", b=3)``."""
    if name == "none":
        return NoDefense()
    if name == "oracle":
        return Oracle()
    if name == "fixed":
        return Fixed(params["tau"])
    if name == "gcr":
        return Gcr(over_clip=params.get("over_clip", False), assumed_byz=params.get("assumed_byz"))
    if name == "gcr_simplified":
        return GcrSimplified()
    if name == "local_clip":
        return LocalClip(params["b"])
    if name == "local_trim":
        return LocalTrim(params["b"])
    raise ValueError(f"unknown defense {name!r}")
