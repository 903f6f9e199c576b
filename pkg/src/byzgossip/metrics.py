"""Error decompositions and the per-step descent certificate for clipped gossip."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from byzgossip.thresholds import gcr_applicable

CERT_RTOL = 1e-8

CSV_COLUMNS = (
    "run_id", "seed", "attack", "defense", "t", "tau", "kappa",
    "bias_sq", "variance", "mse", "mse_rel", "descent_residual",
)


class GcrInapplicable(ValueError):
    """The robustness constant is at least 1, so the step-size bound does not exist."""


@dataclass(frozen=True)
class RunRecord:
    """Metrics of the honest state after step ``t`` (``t = 0`` is the initial state).

    ``tau``, ``kappa`` and ``descent_residual`` describe the step that led
    from ``t - 1`` to ``t``. ``guaranteed`` tells whether the descent
    certificate's preconditions held for this run.
    """

    t: int
    tau: float
    kappa: int
    bias_sq: float
    variance: float
    mse: float
    mse_rel: float
    descent_residual: float
    seed: int = 0
    attack: str = "none"
    defense: str = "none"
    run_id: str = ""
    guaranteed: bool = False
    certificate_ok: bool = True

    def csv_row(self) -> list[str]:
        d = asdict(self)
        return [_fmt(d[c]) for c in CSV_COLUMNS]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def bias_variance(X_h, X_star):
    """Return ``(bias_sq, variance, mse)`` of honest parameters around the target mean.

    ``bias_sq = n ||mean(X) - mean(X*)||^2``, ``variance = sum ||x_i - mean(X)||^2``
    and ``mse = sum ||x_i - mean(X*)||^2 = bias_sq + variance``.
    """
    X_h = np.asarray(X_h, dtype=np.float64)
    target = np.asarray(X_star, dtype=np.float64).mean(axis=0)
    mean = X_h.mean(axis=0)
    n = X_h.shape[0]
    bias_sq = float(n * np.sum((mean - target) ** 2))
    variance = float(np.sum((X_h - mean) ** 2))
    mse = float(np.sum((X_h - target) ** 2))
    return bias_sq, variance, mse


def descent_certificate(prev_X, next_X, X_star, honest_edge_norms, tau, eta) -> float:
    """Residual of the per-step descent inequality; at most 0 means it holds.

    ``||X^{t+1} - mean*||^2 - ||X^t - mean*||^2 + eta * sum over honest
    edges with norm <= tau of norm^2``.
    """
    target = np.asarray(X_star, dtype=np.float64).mean(axis=0)
    before = float(np.sum((np.asarray(prev_X) - target) ** 2))
    after = float(np.sum((np.asarray(next_X) - target) ** 2))
    r = np.asarray(honest_edge_norms, dtype=np.float64)
    kept = r[r <= tau]
    return after - before + eta * float(np.sum(kept**2))


def certificate_passes(residual, prev_X, X_star, rtol=CERT_RTOL) -> bool:
    target = np.asarray(X_star, dtype=np.float64).mean(axis=0)
    scale = 1.0 + float(np.sum((np.asarray(prev_X) - target) ** 2))
    return bool(residual <= rtol * scale)


def eta_max(E_h_count, delta_infty, mu_max) -> float:
    """Largest step size covered by the descent guarantee."""
    if not gcr_applicable(delta_infty):
        raise GcrInapplicable(f"delta_infty={delta_infty} >= 1: the clipping rule cannot apply")
    return 1.0 / ((1.0 + E_h_count * (1.0 - delta_infty)) * mu_max)
