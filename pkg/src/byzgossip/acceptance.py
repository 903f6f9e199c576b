"""Executable acceptance checks for the whole library.

Each ``criterion_*`` function runs one self-contained experiment and returns
a :class:`CriterionResult`; :func:`run_suite` runs them all. The CLI
``verify`` command and the acceptance tests share these functions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from byzgossip.adversary import AttackModel
from byzgossip.engine import HonestState, clipped_sum, frg_step, step_directed, step_undirected
from byzgossip.metrics import certificate_passes, eta_max
from byzgossip.simulation import initial_state, plain_gossip, run
from byzgossip.thresholds import (
    Fixed,
    Gcr,
    GcrSimplified,
    LocalClip,
    NoDefense,
    Oracle,
    gcr_applicable,
    gcr_evaluate,
    gcr_simplified_check,
)
from byzgossip.topology import (
    Topology,
    build_complete,
    build_two_worlds,
    complete_graph_bound,
    delta_infty_sample_lower_bound,
    directed_incidence,
    gossip_from_laplacian,
    incidence,
    spectral_summary,
)

MAIN_ATTACKS = ("alie", "foe", "dissensus", "spectral_heterogeneity")
SEEDS = (0, 1, 2, 3, 4)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(number, name):
    def wrap(fn):
        def inner(*args, **kwargs):
            start = time.perf_counter()
            passed, detail = fn(*args, **kwargs)
            return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - start)
        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        return inner
    return wrap


def random_topology(rng: np.random.Generator, n_h: int, extra_edges: int, n_byz: int) -> Topology:
    """Random spanning tree plus ``extra_edges`` chords and ``n_byz`` stubs at random nodes."""
    perm = rng.permutation(n_h)
    edges = {tuple(sorted((int(perm[k]), int(perm[rng.integers(0, k)])))) for k in range(1, n_h)}
    all_pairs = [(i, j) for i in range(n_h) for j in range(i + 1, n_h) if (i, j) not in edges]
    if all_pairs and extra_edges:
        pick = rng.choice(len(all_pairs), size=min(extra_edges, len(all_pairs)), replace=False)
        edges |= {all_pairs[p] for p in pick}
    byz = tuple((int(rng.integers(0, n_h)), s) for s in range(n_byz))
    return Topology(n_h, tuple(sorted(edges)), byz)


def path_with_byzantine() -> Topology:
    """Two honest nodes joined by one edge, with one Byzantine edge at node 0."""
    return Topology(2, ((0, 1),), ((0, 0),))


@_timed(1, "descent certificate under GCR")
def criterion_1(T=100, seeds=SEEDS, time_budget=60.0):
    topo = build_two_worlds(32, 16, 3)
    spec = spectral_summary(topo)
    eta = eta_max(topo.n_edges_h, spec.delta_infty, spec.mu_max_Lh)
    start = time.perf_counter()
    steps = fails = 0
    worst = -np.inf
    for atk in MAIN_ATTACKS:
        for seed in seeds:
            traj = run(topo, Gcr(), AttackModel(atk), eta, T, 5, rng_seed=seed)
            for rec in traj.records:
                steps += 1
                fails += not rec.certificate_ok
                worst = max(worst, rec.descent_residual)
    elapsed = time.perf_counter() - start
    ok = fails == 0 and steps == len(MAIN_ATTACKS) * len(seeds) * T and elapsed <= time_budget
    return ok, f"{steps - fails}/{steps} steps certified, max residual {worst:.3e}, {elapsed:.1f}s"


@_timed(2, "gossip contraction bound")
def criterion_2(T=100, rtol=1e-9):
    worst = -np.inf
    for topo in (build_complete(3, 0), build_two_worlds(32, 16, 0)):
        spec = spectral_summary(topo)
        eta = 1.0 / spec.mu_max_Lh
        _, gamma = gossip_from_laplacian(incidence(topo).L_h, eta)
        traj = run(topo, NoDefense(), AttackModel("none"), eta, T, 5, rng_seed=0)
        mse0 = traj.initial.mse
        for rec in traj.records:
            bound = (1 - gamma) ** (2 * rec.t) * mse0
            worst = max(worst, (rec.mse - bound) / mse0)
    return worst <= rtol, f"max (mse - bound)/mse0 = {worst:.3e}"


@_timed(3, "mean preservation without Byzantine edges")
def criterion_3(T=100, tol=1e-10):
    worst = 0.0
    for topo in (build_complete(8, 0), build_two_worlds(32, 16, 0)):
        eta = 1.0 / spectral_summary(topo).mu_max_Lh
        for policy in (NoDefense(), Fixed(0.5), Fixed(0.0), Gcr(), GcrSimplified(), Oracle()):
            traj = run(topo, policy, AttackModel("alie"), eta, T, 5, rng_seed=1, keep_states=True)
            sums = np.array([s.sum(axis=0) for s in traj.states])
            worst = max(worst, float(np.linalg.norm(np.diff(sums, axis=0), axis=1).max()))
    return worst <= tol, f"max per-step drift of the honest sum {worst:.3e}"


@_timed(4, "fixed-threshold edge clipping equals clipped-sum gossip")
def criterion_4(T=100, seeds=(0, 1, 2), tau=0.5, tol=1e-12):
    topo = build_two_worlds(32, 16, 3)
    eta = 1.0 / spectral_summary(topo).mu_max_Lh
    attack = AttackModel("alie")
    worst = 0.0
    for seed in seeds:
        traj = run(topo, Fixed(tau), attack, eta, T, 5, rng_seed=seed, keep_states=True)
        state = HonestState.initial(traj.states[0])
        for t in range(1, T + 1):
            declared = attack.declare(state.X_h, topo)
            state = frg_step(state, declared, topo, eta, lambda i, z: clipped_sum(z, tau))
            worst = max(worst, float(np.abs(state.X_h - traj.states[t]).max()))
    return worst <= tol, f"max elementwise deviation {worst:.3e}"


@_timed(5, "directed and undirected steps agree")
def criterion_5(n_topologies=10, T=100, tol=1e-12, rng_seed=5):
    rng = np.random.default_rng(rng_seed)
    exact = 0
    worst = 0.0
    for _ in range(n_topologies):
        n = int(rng.integers(3, 12))
        topo = random_topology(rng, n, int(rng.integers(0, n)), int(rng.integers(0, 2 * n)))
        inc, dinc = incidence(topo), directed_incidence(topo)
        h = dinc.n_honest_dir
        exact += bool(np.array_equal(dinc.B[:, :h] @ dinc.C_dir[:, :h].T, inc.L_h))
        eta = 1.0 / spectral_summary(topo).mu_max_Lh
        d = 3
        su = sd = HonestState.initial(rng.standard_normal((n, d)))
        for _ in range(T):
            declared = su.X_h[inc.byz_node] + rng.standard_normal((topo.n_edges_b, d))
            taus_h = rng.exponential(1.0, topo.n_edges_h)
            taus_b = rng.exponential(1.0, topo.n_edges_b)
            taus_h[rng.random(topo.n_edges_h) < 0.1] = np.inf
            su, _, _ = step_undirected(su, declared, inc, eta, np.concatenate([taus_h, taus_b]))
            sd, _ = step_directed(sd, declared, dinc, eta, np.concatenate([np.repeat(taus_h, 2), taus_b]))
            worst = max(worst, float(np.abs(su.X_h - sd.X_h).max()))
    ok = worst <= tol and exact == n_topologies
    return ok, f"max deviation {worst:.3e}; B C_dir^T = L_h on {exact}/{n_topologies} topologies"


@_timed(6, "robustness constant correctness")
def criterion_6(trials=1000, rng_seed=6):
    rng = np.random.default_rng(rng_seed)
    topos = [build_two_worlds(32, 16, 3), build_complete(8, 2), path_with_byzantine(),
             random_topology(rng, 10, 6, 5), random_topology(rng, 7, 2, 3)]
    margin = np.inf
    for topo in topos:
        inc, spec = incidence(topo), spectral_summary(topo)
        for d in (1, 5):
            lb = delta_infty_sample_lower_bound(inc, spec, trials, d, rng_seed=int(rng.integers(1 << 31)))
            margin = min(margin, spec.delta_infty - lb)
    bound_ok = []
    for n_h, nb in ((4, 1), (8, 1), (8, 2), (64, 3)):
        topo = build_complete(n_h, nb)
        bound_ok.append(spectral_summary(topo).delta_infty <= complete_graph_bound(n_h, nb, 5) + 1e-12)
    path_val = spectral_summary(path_with_byzantine()).delta_infty
    ok = margin >= -1e-12 and all(bound_ok) and abs(path_val - 0.5) <= 1e-12
    return ok, (f"closed form minus best sample >= {margin:.3e}; complete-graph bounds "
                f"{sum(bound_ok)}/4; path instance {path_val!r}")


@_timed(7, "simplified clipping rule implies the full rule")
def criterion_7(n_states=1000, rng_seed=7):
    rng = np.random.default_rng(rng_seed)
    topos = [build_two_worlds(32, 16, 1), build_complete(16, 1), build_complete(8, 1)]
    accepted = violations = 0
    for s in range(n_states):
        topo = topos[s % len(topos)]
        inc, spec = incidence(topo), spectral_summary(topo)
        eta = eta_max(topo.n_edges_h, spec.delta_infty, spec.mu_max_Lh)
        X = rng.standard_normal((topo.n_h, 5)) * rng.exponential(1.0)
        norms = np.linalg.norm(X[inc.head] - X[inc.tail], axis=1)
        history = rng.uniform(0, norms.max(), size=int(rng.integers(0, 6)))
        cands = np.concatenate([rng.choice(norms, 30), rng.uniform(0, norms.max(), 20)])
        cands = cands[cands > 0]
        for tau in cands:
            kappa = int((norms > tau).sum())
            if gcr_simplified_check(kappa, tau, topo.n_edges_h, topo.n_edges_b, topo.n_h,
                                    spec.delta_infty, eta, history):
                accepted += 1
                diag = gcr_evaluate(norms, tau, spec.delta_infty, eta, topo.n_edges_b, topo.n_h,
                                    float(np.sum(history)))
                violations += not diag.satisfied
    ok = violations == 0 and accepted > 0
    return ok, f"{accepted} simplified acceptances, {violations} rejected by the full rule"


@_timed(8, "plain gossip is vulnerable to one Byzantine edge")
def criterion_8(T=100):
    base = build_two_worlds(32, 16, 0)
    topo = Topology(base.n_h, base.honest_edges, ((0, 0),))
    eta = 1.0 / spectral_summary(topo).mu_max_Lh
    traj = run(topo, NoDefense(), AttackModel("foe", eps=1e3), eta, T, 5, rng_seed=0,
               stop_on_divergence=True)
    rel = traj.records[-1].mse_rel
    return rel > 10, f"mse_rel({T}) = {rel:.3e}"


@_timed(9, "GCR never increases the error across Byzantine counts")
def criterion_9(T=100, counts=range(17), seeds=SEEDS, attacks=MAIN_ATTACKS, tol=1e-9):
    worst = -np.inf
    frozen_dev = 0.0
    n_frozen = 0
    for nb in counts:
        topo = build_two_worlds(32, 16, nb)
        applicable = gcr_applicable(spectral_summary(topo).delta_infty)
        for atk in attacks:
            for seed in seeds:
                rel = run(topo, Gcr(), AttackModel(atk), "auto", T, 5, rng_seed=seed).records[-1].mse_rel
                worst = max(worst, rel)
                if not applicable:
                    n_frozen += 1
                    frozen_dev = max(frozen_dev, abs(rel - 1.0))
    ok = worst <= 1 + tol and frozen_dev <= tol
    return ok, (f"max mse_rel({T}) = {worst:.12f}; {n_frozen} runs at delta >= 1 "
                f"deviate from 1 by at most {frozen_dev:.1e}")


@_timed(10, "GCR keeps variance while local clipping reaches consensus")
def criterion_10(T=100, seeds=SEEDS, tol=1e-10):
    topo = build_two_worlds(32, 16, 3)
    gcr_var = np.inf
    clip_ratio = 0.0
    bias = 0.0
    for seed in seeds:
        g = run(topo, Gcr(), AttackModel("alie"), "auto", T, 5, rng_seed=seed)
        gcr_var = min(gcr_var, g.records[-1].variance)
        c = run(topo, LocalClip(3), AttackModel("alie"), "auto", T, 5, rng_seed=seed)
        clip_ratio = max(clip_ratio, c.records[-1].variance / c.initial.variance)
        inert = run(topo, Gcr(), AttackModel("none"), "auto", T, 5, rng_seed=seed)
        bias = max(bias, max(r.bias_sq for r in inert.all_records()))
    ok = gcr_var > 0 and clip_ratio < 1e-3 and bias <= tol
    return ok, (f"GCR min terminal variance {gcr_var:.3e}; local clipping max variance ratio "
                f"{clip_ratio:.3e}; inert-adversary max bias {bias:.1e}")


@_timed(11, "oracle thresholds reproduce honest-only gossip")
def criterion_11(T=100, seeds=(0, 1, 2), tol=1e-12):
    topo = build_two_worlds(32, 16, 3)
    eta = 1.0 / spectral_summary(topo).mu_max_Lh
    worst = 0.0
    for seed in seeds:
        X0 = initial_state(topo.n_h, 5, seed)
        traj = run(topo, Oracle(), AttackModel("foe"), eta, T, 5, X0=X0, keep_states=True)
        ref = plain_gossip(topo, X0, eta, T)
        worst = max(worst, max(float(np.abs(a - b).max()) for a, b in zip(traj.states, ref)))
    return worst <= tol, f"max elementwise deviation {worst:.3e}"


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11)


def run_suite(report=print) -> list[CriterionResult]:
    """Run every criterion, reporting one line per result as it finishes."""
    results = []
    for fn in CRITERIA:
        res = fn()
        if report is not None:
            report(res.line())
        results.append(res)
    return results


__all__ = ["CRITERIA", "CriterionResult", "run_suite", "random_topology", "path_with_byzantine",
           "certificate_passes"]
