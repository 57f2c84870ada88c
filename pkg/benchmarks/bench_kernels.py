"""Timings for the compiled kernels against their numpy fallbacks.

Run as a plain script.  Set ANNULI_DISABLE_NUMBA=1 to confirm the
fallback path alone; in that mode only the numpy column is shown.
"""
import math
import time

import numpy as np

from annuli import _kernels as K
from annuli.geometry import Annulus, make_radial_grid
from annuli.variational import _interval_coefficients


def bench(fn, *args, warmup=1, repeat=5):
    for _ in range(warmup):
        fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def unit_points(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def gd_case():
    # realistic conditioning: canonical pair, n=2000 intervals
    grid = make_radial_grid(Annulus(1.0, 2.0), 2000)
    a = _interval_coefficients(grid)
    k0 = np.linspace(0.0, 1.0, grid.nodes.size)
    k0[1:-1] += 0.05 * np.sin(np.pi * np.linspace(0.0, 1.0, grid.nodes.size)[1:-1])
    return a, k0


def main():
    rng = np.random.default_rng(0)
    pts = unit_points(rng, 200_000)
    m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    m /= np.sqrt(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]

    n = 100_000
    diag = 2.0 + rng.random(n)
    lower = -rng.random(n)
    upper = -rng.random(n)
    lower[0] = 0.0
    upper[-1] = 0.0
    rhs = rng.standard_normal(n)

    ga, k0 = gd_case()

    cases = [
        ("mobius_apply (200k pts)",
         lambda f: f(a, b, c, d, pts),
         "mobius_apply_points"),
        ("conformal_stretch (200k pts)",
         lambda f: f(a, b, c, d, pts),
         "conformal_stretch_points"),
        ("rk4_shoot (20k steps)",
         lambda f: f(1.0, 2.0, 1.0, 2.0, 20_000, 1e-12, 1e12),
         "rk4_shoot"),
        ("thomas_solve (n=100k)",
         lambda f: f(lower, diag, upper, rhs),
         "thomas_solve"),
        ("gd_quadratic (n=2000, bb)",
         lambda f: f(ga, k0.copy(), 50_000, 1e-10, 1, 0.0),
         "gd_quadratic"),
    ]

    if K.HAVE_NUMBA:
        K.warm_up()
        print(f"{'kernel':<28} {'numba':>10} {'numpy':>10} {'speedup':>8}")
        for label, call, stem in cases:
            t_nb = bench(call, getattr(K, stem + "_numba"))
            t_np = bench(call, getattr(K, stem + "_numpy"))
            print(f"{label:<28} {t_nb:>9.5f}s {t_np:>9.5f}s {t_np / t_nb:>7.1f}x")
    else:
        print("numba backend unavailable (flag or missing package); numpy only")
        print(f"{'kernel':<28} {'numpy':>10}")
        for label, call, stem in cases:
            t_np = bench(call, getattr(K, stem + "_numpy"))
            print(f"{label:<28} {t_np:>9.5f}s")


if __name__ == "__main__":
    main()
