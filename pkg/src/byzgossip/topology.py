"""Graphs with Byzantine edge stubs, their incidence/Laplacian matrices and spectra.

Honest nodes are labelled ``0..n_h-1``. A Byzantine edge is a pair
``(honest node, stub id)``; stubs carry no identity beyond the edge they sit
on, since only the number and position of adversarial edges matter.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from byzgossip.linalg import spectral_pinv, symmetric_eigh


class TopologyError(ValueError):
    """Raised for malformed or disconnected topologies."""


@dataclass(frozen=True)
class Topology:
    """Honest graph plus Byzantine edge stubs.

    Attributes:
        n_h: Number of honest nodes.
        honest_edges: Sorted pairs ``(i, j)`` with ``i < j``.
        byz_edges: Pairs ``(honest node, stub id)``, in declaration order.
    """

    n_h: int
    honest_edges: tuple[tuple[int, int], ...]
    byz_edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n_h < 2:
            raise TopologyError("need at least two honest nodes")
        norm = []
        for i, j in self.honest_edges:
            i, j = int(i), int(j)
            if i == j:
                raise TopologyError(f"self-loop at node {i}")
            if not (0 <= i < self.n_h and 0 <= j < self.n_h):
                raise TopologyError(f"edge ({i}, {j}) out of range")
            norm.append((min(i, j), max(i, j)))
        norm.sort()
        if len(set(norm)) != len(norm):
            raise TopologyError("duplicate honest edge")
        byz = tuple((int(i), int(s)) for i, s in self.byz_edges)
        for i, _ in byz:
            if not 0 <= i < self.n_h:
                raise TopologyError(f"Byzantine edge at unknown node {i}")
        if len(set(byz)) != len(byz):
            raise TopologyError("duplicate Byzantine edge")
        object.__setattr__(self, "honest_edges", tuple(norm))
        object.__setattr__(self, "byz_edges", byz)
        if not _connected(self.n_h, norm):
            raise TopologyError("honest subgraph is disconnected")

    @property
    def n_edges_h(self) -> int:
        return len(self.honest_edges)

    @property
    def n_edges_b(self) -> int:
        return len(self.byz_edges)

    def byz_count(self) -> np.ndarray:
        """Number of Byzantine edges at every honest node."""
        out = np.zeros(self.n_h, dtype=np.int64)
        for i, _ in self.byz_edges:
            out[i] += 1
        return out

    def honest_degree(self) -> np.ndarray:
        out = np.zeros(self.n_h, dtype=np.int64)
        for i, j in self.honest_edges:
            out[i] += 1
            out[j] += 1
        return out

    def without_byzantine(self) -> "Topology":
        return Topology(self.n_h, self.honest_edges, ())

    def to_dict(self) -> dict:
        return {
            "n_h": self.n_h,
            "honest_edges": [list(e) for e in self.honest_edges],
            "byz_edges": [list(e) for e in self.byz_edges],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Topology":
        try:
            return cls(
                int(doc["n_h"]),
                tuple(tuple(e) for e in doc["honest_edges"]),
                tuple(tuple(e) for e in doc.get("byz_edges", [])),
            )
        except (KeyError, TypeError) as exc:
            raise TopologyError(f"bad topology document: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def load(cls, path) -> "Topology":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    comps = n
    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            comps -= 1
    return comps == 1


def _uniform_byz(n_h: int, per_node: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, i * per_node + s) for i in range(n_h) for s in range(per_node))


def build_two_worlds(clique_size: int, cross_degree: int, byz_per_node: int) -> Topology:
    """Two cliques joined by a cyclic bipartite wiring.

    Node ``k`` of clique A (nodes ``0..m-1``) links to nodes
    ``m + (k + l) mod m`` for ``l < cross_degree`` in clique B.
    """
    m = clique_size
    if m < 2:
        raise TopologyError("clique_size must be at least 2")
    if not 0 <= cross_degree <= m:
        raise TopologyError("cross_degree must lie in [0, clique_size]")
    if byz_per_node < 0:
        raise TopologyError("byz_per_node must be non-negative")
    edges = []
    for off in (0, m):
        edges += [(off + a, off + b) for a in range(m) for b in range(a + 1, m)]
    edges += [(k, m + (k + l) % m) for k in range(m) for l in range(cross_degree)]
    return Topology(2 * m, tuple(edges), _uniform_byz(2 * m, byz_per_node))


def build_complete(n_h: int, byz_per_node: int) -> Topology:
    if n_h < 2:
        raise TopologyError("n_h must be at least 2")
    if byz_per_node < 0:
        raise TopologyError("byz_per_node must be non-negative")
    edges = tuple((i, j) for i in range(n_h) for j in range(i + 1, n_h))
    return Topology(n_h, edges, _uniform_byz(n_h, byz_per_node))


@dataclass(frozen=True, eq=False)
class IncidenceSet:
    """Signed incidence of honest edges (``C_h``) and Byzantine edges (``C_b``).

    Column ``e = (i, j)`` of ``C_h`` has -1 at ``i`` and +1 at ``j`` so that
    ``(C_h^T X)_e = X_j - X_i``; a Byzantine column has -1 at its honest node.
    """

    C_h: np.ndarray
    C_b: np.ndarray
    L_h: np.ndarray
    tail: np.ndarray
    head: np.ndarray
    byz_node: np.ndarray


@functools.lru_cache(maxsize=64)
def incidence(topology: Topology) -> IncidenceSet:
    n = topology.n_h
    he = np.array(topology.honest_edges, dtype=np.intp).reshape(-1, 2)
    tail, head = he[:, 0].copy(), he[:, 1].copy()
    byz_node = np.array([i for i, _ in topology.byz_edges], dtype=np.intp)
    cols = np.arange(len(he))
    C_h = np.zeros((n, len(he)), dtype=np.int64)
    C_h[tail, cols] = -1
    C_h[head, cols] = 1
    C_b = np.zeros((n, len(byz_node)), dtype=np.int64)
    C_b[byz_node, np.arange(len(byz_node))] = -1
    L_h = C_h @ C_h.T
    degree = topology.honest_degree()
    if not np.array_equal(np.diag(L_h), degree):
        raise AssertionError("C_h C_h^T does not reproduce the degrees")
    for a in (C_h, C_b, L_h, tail, head, byz_node):
        a.setflags(write=False)
    return IncidenceSet(C_h, C_b, L_h, tail, head, byz_node)


@dataclass(frozen=True, eq=False)
class DirectedIncidenceSet:
    """Directed incidence over both orientations of every honest edge.

    Directed edge ``2e`` is ``tail[e] -> head[e]`` and ``2e + 1`` the reverse;
    then one inbound edge ``stub -> i`` per Byzantine edge follows. ``src`` is
    ``-1`` for Byzantine sources and ``byz_index`` maps those edges back to
    their position in ``Topology.byz_edges``.
    """

    C_dir: np.ndarray
    B: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    byz_index: np.ndarray
    n_honest_dir: int


@functools.lru_cache(maxsize=64)
def directed_incidence(topology: Topology) -> DirectedIncidenceSet:
    inc = incidence(topology)
    m = len(inc.tail)
    src = np.empty(2 * m, dtype=np.intp)
    dst = np.empty(2 * m, dtype=np.intp)
    src[0::2], dst[0::2] = inc.tail, inc.head
    src[1::2], dst[1::2] = inc.head, inc.tail
    nb = len(inc.byz_node)
    src = np.concatenate([src, np.full(nb, -1, dtype=np.intp)])
    dst = np.concatenate([dst, inc.byz_node])
    byz_index = np.concatenate([np.full(2 * m, -1, dtype=np.intp), np.arange(nb, dtype=np.intp)])
    n = topology.n_h
    cols = np.arange(len(src))
    C_dir = np.zeros((n, len(src)), dtype=np.int64)
    C_dir[dst, cols] = 1
    honest = src >= 0
    C_dir[src[honest], cols[honest]] = -1
    B = np.where(C_dir > 0, 1, 0).astype(np.int64)
    for a in (C_dir, B, src, dst, byz_index):
        a.setflags(write=False)
    return DirectedIncidenceSet(C_dir, B, src, dst, byz_index, 2 * m)


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    """Spectrum of the honest Laplacian and the derived robustness constant."""

    mu_max_Lh: float
    mu_min_plus_Lh: float
    fiedler: np.ndarray
    delta_infty: float
    Lh_pinv: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > 1e-12 * np.abs(v).max()))
    return -v if v[k] < 0 else v


@functools.lru_cache(maxsize=64)
def spectral_summary(topology: Topology, method: str = "lapack") -> SpectralSummary:
    inc = incidence(topology)
    w, V = symmetric_eigh(inc.L_h.astype(np.float64), method=method)
    mu_max = float(w[-1])
    mu2 = float(w[1])
    if not mu2 > 1e-10 * mu_max:
        raise TopologyError("honest subgraph is disconnected")
    pinv = spectral_pinv(w, V)
    fiedler = _canonical_sign(V[:, 1].copy())
    partial = SpectralSummary(mu_max, mu2, fiedler, 0.0, pinv, w, V)
    delta = delta_infty(inc, partial)
    for a in (fiedler, pinv, w, V):
        a.setflags(write=False)
    return SpectralSummary(mu_max, mu2, fiedler, delta, pinv, w, V)


def amplification_matrix(inc: IncidenceSet, spec: SpectralSummary) -> np.ndarray:
    """``C_h^+ C_b`` with ``C_h^+ = C_h^T L_h^+``; shape ``|E_h| x |E_b|``."""
    return (inc.C_h.T @ spec.Lh_pinv) @ inc.C_b


def delta_infty(inc: IncidenceSet, spec: SpectralSummary) -> float:
    """Worst-case row norm of ``C_h^+ C_b U_b`` over ``||U_b||_{inf,2} <= 1``.

    Each output row is a combination of the unit rows of ``U_b`` with the
    row's coefficients, so its norm is at most the coefficients' 1-norm, with
    equality when every row of ``U_b`` is the same unit vector times the sign
    of its coefficient.
    """
    if inc.C_b.shape[1] == 0 or inc.C_h.shape[1] == 0:
        return 0.0
    M = amplification_matrix(inc, spec)
    return float(np.abs(M).sum(axis=1).max())


def delta_infty_sample_lower_bound(inc: IncidenceSet, spec: SpectralSummary, trials: int,
                                   dim: int, rng_seed=None) -> float:
    """Randomised lower bound on ``delta_infty``.

    Samples admissible ``U_b`` with rows uniform on the unit sphere, and adds
    the sign-aligned candidate for the heaviest row.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    nb = inc.C_b.shape[1]
    if nb == 0 or inc.C_h.shape[1] == 0:
        return 0.0
    M = amplification_matrix(inc, spec)
    rng = np.random.default_rng(rng_seed)
    best = 0.0
    for _ in range(trials):
        U = rng.standard_normal((nb, dim))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        best = max(best, float(np.linalg.norm(M @ U, axis=1).max()))
    row = int(np.abs(M).sum(axis=1).argmax())
    U = np.zeros((nb, dim))
    U[:, 0] = np.where(M[row] >= 0, 1.0, -1.0)
    best = max(best, float(np.linalg.norm(M @ U, axis=1).max()))
    return best


def complete_graph_bound(n_h: int, byz_per_node: int, d: int) -> float:
    """Upper bound on ``delta_infty`` for a complete honest graph with uniform stubs."""
    return 2.0 * byz_per_node / n_h * np.sqrt(min(d, n_h * byz_per_node))


def gossip_from_laplacian(L, eta: float):
    """Gossip matrix ``W = I - eta L`` and its spectral gap ``1 - |mu_2(W)|``."""
    L = np.asarray(L, dtype=np.float64)
    if eta < 0:
        raise ValueError("eta must be non-negative")
    w = np.linalg.eigvalsh(L)
    mu_max = w[-1]
    if eta * mu_max > 1.0 + 1e-12:
        raise ValueError(f"eta={eta} exceeds 1/mu_max(L)={1.0 / mu_max}")
    W = np.eye(L.shape[0]) - eta * L
    mods = np.sort(np.abs(1.0 - eta * w))[::-1]
    gamma = 1.0 - mods[1] if len(mods) > 1 else 1.0
    return W, float(gamma)
