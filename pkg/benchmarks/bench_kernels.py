"""Compiled kernels vs. numpy/Python fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]

Each kernel runs once on both paths to warm the JIT cache and to check
that the outputs agree, then the best of ``--repeat`` timings is reported.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from dbkclique import _accel, kernels
from dbkclique.engine import SolverConfig, dbk_solve
from dbkclique.graph import gnp_generate
from dbkclique.instances import build
from dbkclique.qubo import geometric_schedule, maxclique_to_qubo


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.allclose(a, b)
    return a == b


def cases(quick: bool):
    g40 = gnp_generate(40, 0.5, 1)
    g60 = gnp_generate(60 if not quick else 45, 0.7, 2)
    g200 = gnp_generate(200, 0.3, 3)
    keller = build("keller4")

    q = maxclique_to_qubo(gnp_generate(30, 0.5, 4))
    Qm, h = q.matrix(), q.linear
    sweeps = 200 if quick else 1000
    temps = geometric_schedule(q.max_abs_coefficient(), 0.01, sweeps)
    rng = np.random.default_rng(0)
    x0 = rng.integers(0, 2, size=(4, q.n)).astype(np.int8)
    uniforms = rng.random((4, sweeps, q.n))

    order200 = np.argsort(-g200.degrees, kind="stable")
    starts_u = rng.random((8, g60.n))
    return [
        ("max_clique G(40,0.5)", lambda: kernels.max_clique(g40.adj)),
        (f"max_clique G({g60.n},0.7)", lambda: kernels.max_clique(g60.adj)),
        ("core_peel G(200,0.3)", lambda: kernels.core_peel(g200.adj)),
        ("edge_kcore keller4 t=9", lambda: kernels.edge_kcore_adj(keller.adj, 9)),
        ("greedy_color G(200,0.3)", lambda: kernels.greedy_color(g200.adj, order200)),
        ("greedy_clique G(60,0.7) x8", lambda: kernels.greedy_clique(g60.adj, np.arange(8), starts_u)),
        (f"anneal n=30 x4 {sweeps} sweeps", lambda: kernels.anneal(Qm, h, x0, temps, uniforms)),
        ("dbk_solve G(60,0.9) leaf 20", lambda: dbk_solve(gnp_generate(60, 0.9, 5), SolverConfig(max_leaf_size=20)).omega),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args()
    if not _accel.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    previous = _accel.USE_JIT
    print(f"{'kernel':34s} {'jit [ms]':>10s} {'numpy [ms]':>11s} {'speedup':>8s}  agree")
    try:
        for name, fn in cases(args.quick):
            _accel.set_jit(True)
            fn()  # compile / load cache
            t_jit, out_jit = best_of(fn, args.repeat)
            _accel.set_jit(False)
            t_py, out_py = best_of(fn, max(1, args.repeat // 2))
            print(f"{name:34s} {t_jit * 1e3:10.2f} {t_py * 1e3:11.2f} {t_py / t_jit:8.1f}  {same(out_jit, out_py)}")
    finally:
        _accel.set_jit(previous)


if __name__ == "__main__":
    main()
