"""Full runs: attack, choose thresholds, step, record metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from byzgossip.adversary import AttackModel
from byzgossip.engine import (
    DualLedger,
    HonestState,
    NonFiniteError,
    step_directed,
    step_undirected,
)
from byzgossip.metrics import (
    RunRecord,
    bias_variance,
    certificate_passes,
    descent_certificate,
    eta_max,
)
from byzgossip.thresholds import (
    Gcr,
    GcrSimplified,
    StepView,
    ThresholdPolicy,
    gcr_applicable,
    honest_edge_norms,
)
from byzgossip.topology import Topology, directed_incidence, incidence, spectral_summary


@dataclass
class Trajectory:
    """Outcome of :func:`run`: ``records`` has one entry per step (length ``T``)."""

    initial: RunRecord
    records: list[RunRecord]
    final_state: HonestState
    ledger: DualLedger
    seed: int
    states: list[np.ndarray] = field(default_factory=list)
    diverged_at: int | None = None

    def all_records(self) -> list[RunRecord]:
        return [self.initial, *self.records]

    @property
    def certificate_ok(self) -> bool:
        return all(r.certificate_ok for r in self.records)


def is_gcr(defense) -> bool:
    return isinstance(defense, (Gcr, GcrSimplified))


def resolve_eta(eta, topology: Topology, defense) -> float:
    """``"auto"``: the guaranteed step for clipping-rule defenses when it
    exists, otherwise ``1 / mu_max(L_h)``."""
    if eta != "auto":
        return float(eta)
    spec = spectral_summary(topology)
    if is_gcr(defense) and gcr_applicable(spec.delta_infty):
        return eta_max(topology.n_edges_h, spec.delta_infty, spec.mu_max_Lh)
    return 1.0 / spec.mu_max_Lh


def guarantee_holds(topology: Topology, defense, eta: float) -> bool:
    if not is_gcr(defense):
        return False
    spec = spectral_summary(topology)
    if not gcr_applicable(spec.delta_infty):
        return False
    return eta <= eta_max(topology.n_edges_h, spec.delta_infty, spec.mu_max_Lh) * (1 + 1e-12)


def initial_state(n_h: int, d: int, rng_seed) -> np.ndarray:
    return np.random.default_rng(rng_seed).standard_normal((n_h, d))


def run(topology: Topology, defense: ThresholdPolicy, attack: AttackModel, eta, T: int, d: int,
        rng_seed=0, X0=None, keep_states=False, run_id="", stop_on_divergence=False) -> Trajectory:
    """Simulate ``T`` steps from ``N(0, I_d)`` initial values (or ``X0``).

    An attack can drive undefended gossip to overflow. By default that raises
    :class:`~byzgossip.engine.NonFiniteError`; with ``stop_on_divergence``
    the run stops, the remaining records carry infinite error, and
    ``Trajectory.diverged_at`` holds the failing step.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    eta = resolve_eta(eta, topology, defense)
    inc = incidence(topology)
    dinc = directed_incidence(topology)
    spec = spectral_summary(topology)
    X0 = initial_state(topology.n_h, d, rng_seed) if X0 is None else np.array(X0, dtype=np.float64)
    state = HonestState.initial(X0)
    d = X0.shape[1]
    defense.reset()
    ledger = DualLedger.zeros(topology, d)
    guaranteed = guarantee_holds(topology, defense, eta)
    tags = dict(seed=int(rng_seed) if rng_seed is not None else 0, attack=attack.variant,
                defense=defense.name, run_id=run_id, guaranteed=guaranteed)

    b0, v0, mse0 = bias_variance(state.X_h, state.X_star)
    initial = RunRecord(0, np.nan, 0, b0, v0, mse0, 1.0, 0.0, **tags)
    records = []
    states = [state.X_h.copy()] if keep_states else []
    diverged_at = None
    for _ in range(T):
        try:
            with np.errstate(over="raise"):
                state, rec = _advance(state, topology, defense, attack, inc, dinc, spec, eta,
                                      ledger, guaranteed, mse0, tags)
        except (NonFiniteError, FloatingPointError):
            if not stop_on_divergence:
                raise NonFiniteError(f"run diverged at step {state.t + 1}") from None
            diverged_at = state.t + 1
            break
        records.append(rec)
        if keep_states:
            states.append(state.X_h.copy())
    if diverged_at is not None:
        for t in range(diverged_at, T + 1):
            records.append(RunRecord(t, np.nan, -1, np.inf, np.inf, np.inf, np.inf, np.nan,
                                     certificate_ok=not guaranteed, **tags))
    return Trajectory(initial, records, state, ledger, tags["seed"], states, diverged_at)


def _advance(state, topology, defense, attack, inc, dinc, spec, eta, ledger, guaranteed, mse0, tags):
    declared = attack.declare(state.X_h, topology, defense)
    view = StepView(state.X_h, declared, topology, inc, dinc, spec, eta)
    th = defense.thresholds(view)
    norms = honest_edge_norms(state.X_h, inc)
    prev = state
    if th.directed:
        state, dlam = step_directed(state, declared, dinc, eta, th.taus)
        ledger.Lambda_dir = dlam if ledger.Lambda_dir is None else ledger.Lambda_dir + dlam
        residual = np.nan
    else:
        state, dh, db = step_undirected(state, declared, inc, eta, th.taus)
        ledger.Lambda_h += dh
        ledger.Lambda_b += db
        residual = descent_certificate(prev.X_h, state.X_h, state.X_star, norms, th.tau, eta)
    if np.isfinite(th.tau):
        ledger.cumulative_tau += th.tau
    ok = certificate_passes(residual, prev.X_h, state.X_star) if guaranteed else True
    bias, var, mse = bias_variance(state.X_h, state.X_star)
    rel = mse / mse0 if mse0 > 0 else (0.0 if mse == 0 else np.inf)
    rec = RunRecord(state.t, float(th.tau), int(th.kappa), bias, var, mse, rel,
                    float(residual), certificate_ok=ok, **tags)
    return state, rec


def plain_gossip(topology: Topology, X0, eta: float, T: int) -> list[np.ndarray]:
    """Reference trajectory ``X^{t+1} = (I - eta L_h) X^t`` on the honest subgraph."""
    W = np.eye(topology.n_h) - eta * incidence(topology).L_h
    out = [np.array(X0, dtype=np.float64)]
    for _ in range(T):
        out.append(W @ out[-1])
    return out


__all__ = ["Trajectory", "run", "resolve_eta", "plain_gossip", "initial_state", "guarantee_holds",
           "is_gcr"]
