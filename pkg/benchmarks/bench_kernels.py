#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy reference.

Run after building the extension:  python3 benchmarks/bench_kernels.py
Set DIRACFLUX_FORCE_REF=1 at import time elsewhere to force the slow path.
"""

import time

import numpy as np

from diracflux._kernels import HAVE_COMPILED, _ref

if HAVE_COMPILED:
    from diracflux._kernels import _fast
else:
    _fast = None


def timeit(fn, *args, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    rng = np.random.default_rng(0)
    rows = []

    # azimuth-averaged packet amplitude (far-field table assembly)
    kc = np.linspace(0.0, 6.0, 193)
    u = np.linspace(-0.999, 0.999, 400)
    phis = np.arange(48) * 2 * np.pi / 48
    rot = np.eye(3)
    args = (kc, u, phis, rot, np.array([2.0, 0.0, 0.0]), 0.5, 0.7,
            1.0 + 0.0j, 0.0j, 1.0)
    rows.append(("gauss_phi_avg 193x400x48", args, "gauss_phi_avg"))

    # lattice evaluation of the wave at spacetime points
    nodes = rng.normal(size=(110592, 3))
    weights = rng.random(110592)
    psihat = rng.normal(size=(110592, 4)) + 1j * rng.normal(size=(110592, 4))
    pts = rng.normal(size=(16, 3)) * 5
    ts = rng.random(16) * 5
    rows.append(("plane_sum 48^3 x 16 pts",
                 (pts, ts, nodes, weights, psihat, 1.0), "plane_sum"))

    # brute-force oscillatory integral
    ax = np.linspace(-0.9, 2.4, 220)
    rows.append(("osc_gauss_sum 220^3",
                 (ax, ax, ax, 50.0, 0.0, np.array([0.6, 0.0, 0.0]), 1.0,
                  np.array([0.75, 0.0, 0.0]), 0.35, 1.6, 0.45,
                  np.array([1.0, 0, 0, 0], complex)), "osc_gauss_sum"))

    field = rng.normal(size=(32, 32, 32, 4)) + 0j
    tri_pts = rng.uniform(-7, 7, size=(20000, 3))
    rows.append(("trilinear 32^3 x 20k pts",
                 (field, (-8.0, -8.0, -8.0), 16.0 / 31.0, tri_pts),
                 "trilinear"))

    print(f"{'kernel':32s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}  max|diff|")
    for name, args, fn in rows:
        t_ref, out_ref = timeit(getattr(_ref, fn), *args)
        if _fast is None:
            print(f"{name:32s} {t_ref * 1e3:9.1f}ms {'n/a':>10s}")
            continue
        t_fast, out_fast = timeit(getattr(_fast, fn), *args)
        diff = np.max(np.abs(np.asarray(out_ref) - np.asarray(out_fast)))
        print(f"{name:32s} {t_ref * 1e3:9.1f}ms {t_fast * 1e3:9.1f}ms "
              f"{t_ref / t_fast:7.1f}x  {diff:.2e}")


if __name__ == "__main__":
    main()
