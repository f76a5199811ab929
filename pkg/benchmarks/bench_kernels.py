"""Timing of the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is called
with identical inputs on both backends; the script reports the best of
several repeats and the largest absolute difference between the outputs.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from wingtail._kernels import _pure

try:
    from wingtail._kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None

# Heston fixture
B, RHO, SIGMA, A, V0 = 1.2, -0.6, 0.4, 0.048, 0.04


def _cases(n_paths: int, n_steps: int):
    rng = np.random.Generator(np.random.PCG64(7))
    z_v = rng.standard_normal((n_steps, n_paths))
    z_s = rng.standard_normal((n_steps, n_paths))
    return {
        "riccati_fixed (1e4 RK4 steps)": lambda m: m.riccati_fixed(2.0, 0.5, B, RHO, SIGMA, 1.0, 10_000),
        "riccati_adaptive (blow-up)": lambda m: m.riccati_adaptive(13.18, B, RHO, SIGMA, 3.0, 1e-11, 1e12,
                                                                   1_000_000)[3],
        f"heston_block ({n_paths} x {n_steps})": lambda m: m.heston_block(z_v, z_s, V0, A, B, SIGMA, RHO,
                                                                       1.0 / n_steps),
    }


def _gap(x, y) -> float:
    return float(np.max(np.abs(np.asarray(x, dtype=complex) - np.asarray(y, dtype=complex))))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=500)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; only the fallback is available")
        return
    print(f"{'kernel':<36}{'python [s]':>12}{'cython [s]':>12}{'speed-up':>10}{'max |diff|':>12}")
    for name, call in _cases(args.paths, args.steps).items():
        t_py = min(timeit.repeat(lambda: call(_pure), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: call(_ckernels), number=1, repeat=args.repeat))
        diff = _gap(call(_pure), call(_ckernels))
        print(f"{name:<36}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
