"""Omniscient attacks: every Byzantine edge at honest node ``i`` declares
``x_i + eps_i * a_i`` for an attack direction ``a_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from byzgossip.topology import Topology, incidence, spectral_summary

DEFAULT_EPS = 1e3
TRIM_MARGIN = 1e-6

ATTACKS = ("none", "alie", "foe", "dissensus", "spectral_heterogeneity")


def alie_direction(X_h):
    """Coordinate-wise standard deviation (population convention), shared by all nodes."""
    sigma = np.std(X_h, axis=0)
    return np.broadcast_to(sigma, X_h.shape).copy()


def foe_direction(X_h):
    return np.broadcast_to(X_h.mean(axis=0), X_h.shape).copy()


def dissensus_direction(X_h, topology: Topology):
    """Row ``i`` is ``sum_{k ~ i honest} (x_i - x_k)``, i.e. ``(L_h X_h)_i``."""
    return incidence(topology).L_h @ X_h


def spectral_direction(X_h, fiedler):
    """Row ``i`` is ``e_i * sum_k e_k x_k`` for the Fiedler vector ``e``."""
    fiedler = np.asarray(fiedler, dtype=np.float64)
    return np.outer(fiedler, fiedler @ X_h)


def _declare(X_h, directions, eps, byz_node):
    eps = np.broadcast_to(np.asarray(eps, dtype=np.float64), (X_h.shape[0],))
    return X_h[byz_node] + eps[byz_node, None] * directions[byz_node]


def attack_alie(X_h, eps, byz_node):
    return _declare(X_h, alie_direction(X_h), eps, byz_node)


def attack_foe(X_h, eps, byz_node):
    return _declare(X_h, foe_direction(X_h), eps, byz_node)


def attack_dissensus(X_h, topology: Topology, eps):
    return _declare(X_h, dissensus_direction(X_h, topology), eps, incidence(topology).byz_node)


def attack_spectral(X_h, fiedler, eps, byz_node):
    return _declare(X_h, spectral_direction(X_h, fiedler), eps, byz_node)


def adapt_scale_for_trimming(directions, cut_norms, default_eps=DEFAULT_EPS):
    """Per-node scale keeping each declaration just inside the trimming cut.

    ``eps_i = max(0, (theta_i - delta) / ||a_i||)`` with ``delta = 1e-6 *
    theta_i``; nodes whose cut is infinite (nothing trimmed) get
    ``default_eps``, zero directions get 0.
    """
    directions = np.atleast_2d(directions)
    cut = np.broadcast_to(np.asarray(cut_norms, dtype=np.float64), (directions.shape[0],))
    norm = np.linalg.norm(directions, axis=1)
    eps = np.zeros(directions.shape[0])
    finite = np.isfinite(cut)
    eps[~finite] = default_eps
    ok = finite & (norm > 0)
    eps[ok] = np.maximum(0.0, cut[ok] * (1.0 - TRIM_MARGIN) / norm[ok])
    eps[norm == 0] = 0.0
    return eps


@dataclass(frozen=True)
class AttackModel:
    """An attack variant plus its scale policy.

    Args:
        variant: One of :data:`ATTACKS`.
        eps: Fixed scale used against clipping (and undefended) gossip.
        adapt_to_trimming: When the defense exposes ``cut_norms`` (local
            trimming), scale each node's attack to sit just below the cut.
    """

    variant: str = "none"
    eps: float = DEFAULT_EPS
    adapt_to_trimming: bool = True

    def __post_init__(self):
        if self.variant not in ATTACKS:
            raise ValueError(f"unknown attack {self.variant!r}")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")

    def direction(self, X_h, topology: Topology):
        if self.variant == "none":
            return np.zeros_like(X_h)
        if self.variant == "alie":
            return alie_direction(X_h)
        if self.variant == "foe":
            return foe_direction(X_h)
        if self.variant == "dissensus":
            return dissensus_direction(X_h, topology)
        return spectral_direction(X_h, spectral_summary(topology).fiedler)

    def declare(self, X_h, topology: Topology, defense=None) -> np.ndarray:
        """Declared values, one row per Byzantine edge. Never mutates ``X_h``."""
        X_h = np.asarray(X_h, dtype=np.float64)
        byz_node = incidence(topology).byz_node
        if len(byz_node) == 0:
            return np.zeros((0, X_h.shape[1]))
        a = self.direction(X_h, topology)
        eps = self.eps
        if self.adapt_to_trimming and hasattr(defense, "cut_norms"):
            eps = adapt_scale_for_trimming(a, defense.cut_norms(X_h, topology), self.eps)
        return _declare(X_h, a, eps, byz_node)
