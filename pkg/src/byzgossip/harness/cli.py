"""Command-line interface: ``run``, ``graph-info`` and ``verify``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from byzgossip.harness.config import ConfigError, load_config
from byzgossip.harness.runner import certificate_violations, run_all, write_outputs
from byzgossip.kernels import BACKEND
from byzgossip.metrics import eta_max
from byzgossip.thresholds import gcr_applicable
from byzgossip.topology import complete_graph_bound, incidence, spectral_summary

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CERTIFICATE = 2


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.out) if args.out else cfg.base_dir / cfg.output
    results = run_all(cfg, jobs=args.jobs)
    written = write_outputs(cfg, results, out_dir)
    diverged = sum(r.diverged for r in results)
    print(f"{len(results)} runs ({diverged} diverged without defense guarantee), backend={BACKEND}")
    for row in written["rows"]:
        print(f"  nb={row['byz_per_node']:<3} {row['defense']:<16} {row['attack']:<24} "
              f"mean mse_rel(T) = {row['mean_mse_rel_T']:.6g}")
    print(f"wrote {written['steps']}, {written['summary']} and {len(written['plots'])} plots")
    bad = certificate_violations(results)
    if bad:
        for run_id in bad:
            print(f"certificate violated in run {run_id}", file=sys.stderr)
        return EXIT_CERTIFICATE
    return EXIT_OK


def graph_report(topo, d: int) -> list[str]:
    """Lines describing the honest graph, its spectrum and the robustness constant."""
    spec = spectral_summary(topo)
    lines = [
        f"n_h            {topo.n_h}",
        f"|E_h|          {topo.n_edges_h}",
        f"|E_b|          {topo.n_edges_b}",
        f"mu_max(L_h)    {spec.mu_max_Lh:.10g}",
        f"mu_min+(L_h)   {spec.mu_min_plus_Lh:.10g}",
        f"delta_infty    {spec.delta_infty:.10g}",
    ]
    if gcr_applicable(spec.delta_infty) or topo.n_edges_b == 0:
        lines.append(f"eta_max        {eta_max(topo.n_edges_h, spec.delta_infty, spec.mu_max_Lh):.10g}")
    else:
        lines.append("eta_max        n/a (delta_infty >= 1, the clipping rule forces tau = 0)")
    counts = topo.byz_count()
    complete = topo.n_edges_h == topo.n_h * (topo.n_h - 1) // 2
    if complete and topo.n_edges_b and np.all(counts == counts[0]):
        bound = complete_graph_bound(topo.n_h, int(counts[0]), d)
        lines.append(f"complete-graph bound (d={d})  {bound:.10g}")
    return lines


def _cmd_graph_info(args) -> int:
    cfg = load_config(args.config)
    topo = cfg.build_topology()
    incidence(topo)
    for line in graph_report(topo, cfg.d):
        print(line)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from byzgossip.acceptance import run_suite

    print(f"kernel backend: {BACKEND}")
    results = run_suite()
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_CERTIFICATE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="byzgossip",
                                description="Byzantine-robust gossip averaging experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the defense x attack x seed grid of a config")
    r.add_argument("--config", required=True, help="path to a JSON experiment config")
    r.add_argument("--out", help="output directory (overrides the config's 'output')")
    r.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    r.set_defaults(func=_cmd_run)
    g = sub.add_parser("graph-info", help="print spectral facts about a config's topology")
    g.add_argument("--config", required=True)
    g.set_defaults(func=_cmd_graph_info)
    v = sub.add_parser("verify", help="run the acceptance suite")
    v.set_defaults(func=_cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
