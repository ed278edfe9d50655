"""Benchmark the numba-jitted kernels against their pure-numpy fallbacks.

The package selects the jitted path automatically (disable it with
BPSVORTEX_PURE_NUMPY=1); this script times both implementations on
representative problem sizes and checks they agree.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from bpsvortex import _kernels as K


def timeit(fn, *args, repeat=20):
    fn(*args)  # warm-up / JIT compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        out = fn(*args)
    return (time.perf_counter() - t0) / repeat, out


def agree(a, b):
    if isinstance(a, tuple):
        return all(agree(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-14)


def main():
    if not K.NUMBA_ENABLED:
        print("numba path disabled (BPSVORTEX_PURE_NUMPY set or numba missing); "
              "nothing to compare")
        return

    rng = np.random.default_rng(0)
    n = 384
    h = 24.0 / (n - 1)
    x = np.linspace(-12.0, 12.0, n)
    v = rng.standard_normal((n, n))
    cx = rng.uniform(-6, 6, size=8)
    cy = rng.uniform(-6, 6, size=8)
    r = rng.uniform(0.0, 10.0, size=n * n)
    w = rng.standard_normal(n * n) ** 2
    edges = np.linspace(0.0, 10.0, 65)

    cases = [
        ("plane_laplacian 384^2", K._plane_laplacian_numba,
         K._plane_laplacian_numpy, (v, h, 0.0)),
        ("bump_sum 8 centres 384^2", K._bump_sum_numba,
         K._bump_sum_numpy, (x, x, cx, cy, 0.2)),
        ("log_factors 8 centres 384^2", K._log_factors_numba,
         K._log_factors_numpy, (x, x, cx, cy, 0.2)),
        ("radial_bin 147k pts", K._radial_bin_numba,
         K._radial_bin_numpy, (r, w, edges)),
    ]

    print(f"{'kernel':<30} {'numba':>10} {'numpy':>10} {'speedup':>9}  match")
    for name, jit_fn, np_fn, args in cases:
        t_jit, out_jit = timeit(jit_fn, *args)
        t_np, out_np = timeit(np_fn, *args)
        print(f"{name:<30} {t_jit * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms "
              f"{t_np / t_jit:>8.1f}x  {agree(out_jit, out_np)}")


if __name__ == "__main__":
    main()
