"""Compiled versus numpy kernels, per call and end to end.

Usage::

    python benchmarks/bench_kernels.py [--repeat N] [--sizes 2,2,2,14]

Each kernel runs on the program that minimizes ``MI(T; X, Y, Z)`` for the
chosen random distribution. The end-to-end rows time the full trivariate
decomposition with the solver's kernel module switched to each backend.
"""
from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from pidmaxent import pid, random_simplex
from pidmaxent.distributions import MarginalSpec
from pidmaxent.solver import build_program, kernels
from pidmaxent.solver import _kernels_py

try:
    from pidmaxent.solver import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

_NAMES = ("objective", "hessian_inverse", "apply_inverse", "block_lse_max")


def _calls(mod, prog, q, lam, At):
    cp, bp = prog.cell_ptr, prog.blk_ptr
    fac = mod.hessian_inverse(q, 1.0, q / lam, cp, bp)
    return {
        "objective": lambda: mod.objective(q, cp, bp),
        "hessian_inverse": lambda: mod.hessian_inverse(q, 1.0, q / lam, cp, bp),
        "apply_inverse": lambda: mod.apply_inverse(fac, At, cp, bp),
        "block_lse_max": lambda: mod.block_lse_max(-(At @ np.ones(At.shape[1])), cp, bp),
    }


def _best(fn, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def _pid_time(mod, dist, repeat):
    saved = {n: getattr(kernels, n) for n in _NAMES}
    try:
        for n in _NAMES:
            setattr(kernels, n, getattr(mod, n))
        return _best(lambda: pid(dist), repeat)
    finally:
        for n, f in saved.items():
            setattr(kernels, n, f)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", default="2,2,2,14")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not available; build with `pip install -e .`", file=sys.stderr)
        return 1

    dist = random_simplex(tuple(int(s) for s in args.sizes.split(",")), seed=args.seed)
    prog = build_program(dist, MarginalSpec.pairwise(dist), (1, 2, 3))
    rng = np.random.default_rng(args.seed)
    q = rng.random(len(prog.reference)) + 0.1
    q /= q.sum()
    lam = rng.random(q.size) + 0.1
    At = np.ascontiguousarray(prog.A.T)

    py, cy = _calls(_kernels_py, prog, q, lam, At), _calls(_kernels_c, prog, q, lam, At)
    print(f"program: {prog.describe()}, {q.size} variables, {At.shape[1]} constraints")
    print(f"{'kernel':<18}{'numpy (us)':>12}{'cython (us)':>13}{'speedup':>9}")
    for name in _NAMES:
        tp, tc = _best(py[name], args.repeat), _best(cy[name], args.repeat)
        print(f"{name:<18}{tp * 1e6:>12.1f}{tc * 1e6:>13.1f}{tp / tc:>9.2f}")
    tp, tc = _pid_time(_kernels_py, dist, args.repeat), _pid_time(_kernels_c, dist, args.repeat)
    print(f"{'pid end to end':<18}{tp * 1e6:>12.0f}{tc * 1e6:>13.0f}{tp / tc:>9.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
