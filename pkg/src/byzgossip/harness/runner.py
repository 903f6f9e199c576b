"""Execute every (byz count, defense, attack, seed) cell of a config and write outputs."""

from __future__ import annotations

import csv
import dataclasses
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from byzgossip.adversary import AttackModel
from byzgossip.harness.config import DefenseSpec, ExperimentConfig
from byzgossip.harness.svg import line_chart
from byzgossip.metrics import CSV_COLUMNS, RunRecord
from byzgossip.simulation import run
from byzgossip.thresholds import make_policy

SUMMARY_COLUMNS = (
    "byz_per_node", "defense", "attack", "n_runs", "mean_mse_rel_T",
    "mean_bias_sq_T", "mean_variance_T", "diverged_runs", "certificate_ok",
)
MSE_PLOT_YMAX = 2.0


@dataclass(frozen=True)
class Job:
    byz_per_node: int | None
    defense: DefenseSpec
    attack: str
    seed: int

    def run_id(self) -> str:
        head = "" if self.byz_per_node is None else f"nb{self.byz_per_node}-"
        return f"{head}{self.defense.label}-{self.attack}-s{self.seed}"


@dataclass
class JobResult:
    job: Job
    byz_per_node: int
    records: list[RunRecord]
    diverged: bool
    guaranteed: bool
    certificate_ok: bool


def plan(cfg: ExperimentConfig) -> list[Job]:
    """All jobs in a fixed order: byz count, defense, attack, seed."""
    counts = cfg.byz_sweep if cfg.byz_sweep is not None else (None,)
    return [Job(nb, dfn, atk, seed)
            for nb in counts
            for dfn in cfg.defenses
            for atk in cfg.attacks
            for seed in cfg.effective_seeds()]


def execute(cfg: ExperimentConfig, job: Job) -> JobResult:
    topo = cfg.build_topology(job.byz_per_node)
    counts = topo.byz_count()
    default_b = int(counts.max()) if len(counts) else 0
    policy = make_policy(job.defense.name, **job.defense.params(default_b))
    attack = AttackModel(job.attack, eps=cfg.eps)
    traj = run(topo, policy, attack, cfg.eta, cfg.T, cfg.d, rng_seed=job.seed,
               run_id=job.run_id(), stop_on_divergence=True)
    label = job.defense.label
    records = [dataclasses.replace(r, defense=label) for r in traj.all_records()]
    nb = default_b if job.byz_per_node is None else job.byz_per_node
    return JobResult(job, nb, records, traj.diverged_at is not None,
                     traj.initial.guaranteed, traj.certificate_ok)


def _execute_packed(args):
    return execute(*args)


def run_all(cfg: ExperimentConfig, jobs: int = 1) -> list[JobResult]:
    """Run every planned job; results come back in plan order regardless of ``jobs``."""
    todo = plan(cfg)
    if jobs <= 1:
        return [execute(cfg, j) for j in todo]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_execute_packed, [(cfg, j) for j in todo]))


def write_steps(results: list[JobResult], path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for res in results:
            for rec in res.records:
                w.writerow(rec.csv_row())


def _cells(results):
    cells = defaultdict(list)
    for res in results:
        cells[(res.byz_per_node, res.job.defense.label, res.job.attack)].append(res)
    return cells


def summarize(results: list[JobResult]) -> list[dict]:
    rows = []
    for (nb, dfn, atk), group in _cells(results).items():
        finals = [g.records[-1] for g in group]
        rows.append({
            "byz_per_node": nb,
            "defense": dfn,
            "attack": atk,
            "n_runs": len(group),
            "mean_mse_rel_T": float(np.mean([r.mse_rel for r in finals])),
            "mean_bias_sq_T": float(np.mean([r.bias_sq for r in finals])),
            "mean_variance_T": float(np.mean([r.variance for r in finals])),
            "diverged_runs": sum(g.diverged for g in group),
            "certificate_ok": all(g.certificate_ok for g in group),
        })
    return rows


def write_summary(rows: list[dict], path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in rows:
            w.writerow([repr(row[c]) if isinstance(row[c], float) else str(row[c])
                        for c in SUMMARY_COLUMNS])


def _mean_curve(group, attr):
    vals = np.array([[getattr(r, attr) for r in g.records] for g in group], dtype=np.float64)
    ts = [r.t for r in group[0].records]
    with np.errstate(invalid="ignore"):
        return ts, vals.mean(axis=0).tolist()


def write_plots(results: list[JobResult], out_dir: Path, sweep: bool) -> list[Path]:
    """Mean curves over seeds; one pair of time plots per byz count, plus the sweep plot."""
    written = []
    by_nb = defaultdict(dict)
    for (nb, dfn, atk), group in _cells(results).items():
        by_nb[nb][(dfn, atk)] = group
    for nb, cells in by_nb.items():
        suffix = f"_nb{nb}" if sweep else ""
        mse = {f"{dfn} / {atk}": _mean_curve(g, "mse_rel") for (dfn, atk), g in cells.items()}
        p = out_dir / f"mse_rel{suffix}.svg"
        p.write_text(line_chart(mse, f"Relative MSE ({nb} Byzantine per node)", "step t",
                                "mse_rel (mean over seeds)", ymax=MSE_PLOT_YMAX))
        written.append(p)
        bv = {}
        for (dfn, atk), g in cells.items():
            bv[f"{dfn} / {atk} bias"] = _mean_curve(g, "bias_sq")
            bv[f"{dfn} / {atk} variance"] = _mean_curve(g, "variance")
        p = out_dir / f"bias_variance{suffix}.svg"
        ref = max(g[0].records[0].mse for g in cells.values())
        p.write_text(line_chart(bv, f"Bias and variance ({nb} Byzantine per node)", "step t",
                                "squared error (mean over seeds)", ymax=2 * ref))
        written.append(p)
    if sweep:
        series = defaultdict(lambda: ([], []))
        for row in summarize(results):
            xs, ys = series[f"{row['defense']} / {row['attack']}"]
            xs.append(row["byz_per_node"])
            ys.append(row["mean_mse_rel_T"])
        p = out_dir / "byz_sweep.svg"
        p.write_text(line_chart(dict(series), "Final relative MSE vs Byzantine edges per node",
                                "Byzantine edges per node", "mse_rel at T", ymax=MSE_PLOT_YMAX))
        written.append(p)
    return written


def write_outputs(cfg: ExperimentConfig, results: list[JobResult], out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_steps(results, out_dir / "steps.csv")
    rows = summarize(results)
    write_summary(rows, out_dir / "summary.csv")
    plots = write_plots(results, out_dir, cfg.byz_sweep is not None)
    return {"steps": out_dir / "steps.csv", "summary": out_dir / "summary.csv", "plots": plots,
            "rows": rows}


def certificate_violations(results: list[JobResult]) -> list[str]:
    return [r.job.run_id() for r in results if r.guaranteed and not r.certificate_ok]
