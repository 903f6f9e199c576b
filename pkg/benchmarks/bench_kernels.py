"""Compare the compiled and numpy kernel backends.

Times each kernel on Two Worlds sized inputs, then a full 100-step GCR run
and a local-clipping run under each backend (the backend is switched by
re-importing with ``BYZGOSSIP_PURE_PYTHON``, in a subprocess).

Usage:
    python3 benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import importlib
import os
import subprocess
import sys
import timeit

import numpy as np

from byzgossip import _pykernels


def kernel_inputs(rng):
    m, d, n = 2 * 1504 + 192, 5, 64
    diffs = rng.standard_normal((m, d))
    taus = rng.exponential(1.0, m)
    dst = np.sort(rng.integers(0, n, m)).astype(np.intp)
    indptr = np.concatenate([[0], np.cumsum(np.bincount(dst, minlength=n))]).astype(np.intp)
    norms_desc = np.sort(rng.exponential(1.0, 1504))[::-1].copy()
    return diffs, taus, dst, indptr, norms_desc


def bench_kernels(impl, repeat, rng_seed=0):
    diffs, taus, dst, indptr, norms_desc = kernel_inputs(np.random.default_rng(rng_seed))
    out = np.zeros((64, diffs.shape[1]))
    vals = np.ascontiguousarray(taus)
    cases = {
        "clip_rows": lambda: impl.clip_rows(diffs, taus),
        "scatter_add": lambda: impl.scatter_add(out, dst, diffs, 0.1),
        "segment_kth_largest": lambda: impl.segment_kth_largest(vals, indptr, 6),
        "segment_top_mask": lambda: impl.segment_top_mask(vals, indptr, 6),
        "gcr_interval_scan": lambda: impl.gcr_interval_scan(norms_desc, norms_desc.sum() * 0.3, 1e-3, 0),
    }
    return {name: min(timeit.repeat(fn, number=1, repeat=repeat)) for name, fn in cases.items()}


RUN_SNIPPET = """
import time
from byzgossip import AttackModel, BACKEND, build_two_worlds, make_policy, run
topo = build_two_worlds(32, 16, 3)
for name, kw in (("gcr", {}), ("local_clip", {"b": 3})):
    run(topo, make_policy(name, **kw), AttackModel("alie"), "auto", 5, 5)
    start = time.perf_counter()
    run(topo, make_policy(name, **kw), AttackModel("alie"), "auto", 100, 5, rng_seed=1)
    print(BACKEND, name, time.perf_counter() - start)
"""


def bench_runs(pure):
    env = dict(os.environ, BYZGOSSIP_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", RUN_SNIPPET], env=env, check=True,
                         capture_output=True, text=True).stdout
    rows = {}
    for line in out.strip().splitlines():
        backend, name, secs = line.split()
        rows[name] = (backend, float(secs))
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)

    impls = {"python": _pykernels}
    try:
        impls["cython"] = importlib.import_module("byzgossip._ckernels")
    except ImportError:
        print("compiled extension not built; only the numpy backend is timed")

    timings = {name: bench_kernels(impl, args.repeat) for name, impl in impls.items()}
    print(f"{'kernel':<22}" + "".join(f"{n + ' (us)':>16}" for n in impls) + f"{'speedup':>10}")
    for kernel in timings["python"]:
        cells = [timings[n][kernel] * 1e6 for n in impls]
        speed = cells[0] / cells[-1] if len(cells) > 1 else 1.0
        print(f"{kernel:<22}" + "".join(f"{c:>16.1f}" for c in cells) + f"{speed:>9.1f}x")

    print()
    print("100-step runs, Two Worlds(32,16,3), ALIE:")
    py = bench_runs(pure=True)
    cy = bench_runs(pure=False) if "cython" in impls else py
    for name in py:
        print(f"  {name:<12} python {py[name][1]:.3f}s   {cy[name][0]} {cy[name][1]:.3f}s")


if __name__ == "__main__":
    main()
