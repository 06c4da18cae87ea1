"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Defaults everywhere: m = 1, packet k0 = (2,0,0), sigma = 0.5.  The heavy
sweeps are shared through session fixtures; stated runtime budgets are
asserted along with the numerical tolerances.
"""

import time

import numpy as np
import pytest

from diracflux.detector import fas_sweep
from diracflux.fitting import loglog_slope
from diracflux.momentum import (ConeSpec, MomentumAmplitude, cartesian_grid,
                                covariant_momentum_side, gaussian_packet,
                                momentum_side)
from diracflux.spinor import (dirac_matrices, energy, flux_spatial, sdot,
                              snorm, spinor_components)

CONE = ConeSpec(axis=(1.0, 0.0, 0.0), half_angle=0.3)
RESULTS = []


def record(criterion, passed, detail):
    RESULTS.append((criterion, bool(passed), detail))
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")
    assert passed, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="session")
def free_sweeps(default_packet):
    t0 = time.time()
    cone_rep = fas_sweep(default_packet, CONE, [30.0, 60.0, 120.0],
                         n_theta=16, n_phi=8)
    full = ConeSpec(axis=(1.0, 0.0, 0.0), half_angle=np.pi)
    full_rep = fas_sweep(default_packet, full, [30.0, 60.0, 120.0], n_phi=8)
    return {"cone": cone_rep, "full": full_rep, "elapsed": time.time() - t0}


@pytest.fixture(scope="session")
def weak_bank_fields():
    """#9: 12-momentum certification bank at 32^3 on [-8, 8]."""
    from diracflux.lippmann import SpatialGrid, born_solve, gaussian_potential

    pot = gaussian_potential(0.05)
    grid = SpatialGrid(L=8.0, n=32)
    dirs = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1],
                     [1, 1, 0] / np.sqrt(2)], float)
    mags = (0.5, 1.0, 2.0)
    t0 = time.time()
    fields = [born_solve(pot, m * d, s, 1.0, grid, tol=1e-10)
              for m in mags for d in dirs[:2] for s in (1, 2)]
    # 3 mags x 2 dirs x 2 spins = 12 solved momenta
    return {"fields": fields, "pot": pot, "grid": grid,
            "elapsed": time.time() - t0}


def test_criterion_1_algebra_suite():
    t0 = time.time()
    rng = np.random.default_rng(1)
    dm = dirac_matrices()
    ok = True
    for i, ai in enumerate(dm.alphas):
        for j, aj in enumerate(dm.alphas):
            ok &= np.allclose(ai @ aj + aj @ ai, 2.0 * (i == j) * np.eye(4),
                              atol=1e-12)
        ok &= np.allclose(ai @ dm.beta + dm.beta @ ai, 0.0, atol=1e-12)

    n = 1200
    mag = 10.0 ** rng.uniform(-2, 3, n)
    d = rng.normal(size=(n, 3))
    k = mag[:, None] * d / np.linalg.norm(d, axis=1)[:, None]
    s1, s2 = spinor_components(k, 1.0)
    ek = energy(np.linalg.norm(k, axis=1), 1.0)
    orth = max(np.max(np.abs(sdot(s1, s1) - 1.0)),
               np.max(np.abs(sdot(s2, s2) - 1.0)),
               np.max(np.abs(sdot(s1, s2))))
    ok &= orth < 1e-12

    alphas = np.stack(dm.alphas)
    eig = 0.0
    for s in (s1, s2):
        hs = np.einsum("nij,nj->ni",
                       np.einsum("aij,na->nij", alphas, k)
                       + dm.beta[None, :, :], s)
        eig = max(eig, float(np.max(snorm(hs - ek[:, None] * s) / ek)))
    ok &= eig < 1e-12

    a = rng.normal(size=(n, 1)) + 1j * rng.normal(size=(n, 1))
    b = rng.normal(size=(n, 1)) + 1j * rng.normal(size=(n, 1))
    s = a * s1 + b * s2
    dens = np.real(sdot(s, s))
    fluxdev = np.max(np.abs(flux_spatial(s) - k / ek[:, None] * dens[:, None]))
    ok &= fluxdev < 1e-12 * float(np.max(dens))
    dt = time.time() - t0
    ok &= dt < 5.0
    record(1, ok, f"algebra to 1e-12 over {n} random inputs "
                  f"(orth {orth:.1e}, eig {eig:.1e}, flux {fluxdev:.1e}) "
                  f"in {dt:.2f}s (< 5s)")


def test_criterion_2_continuity_h_squared(default_packet):
    from diracflux.propagate import continuity_residual

    t0 = time.time()
    rng = np.random.default_rng(2)
    pts = rng.uniform(-3, 3, size=(50, 3))
    ts = rng.uniform(0, 3, size=50)
    r1 = max(continuity_residual(default_packet, p, float(t), h=1e-3)
             for p, t in zip(pts, ts))
    r2 = max(continuity_residual(default_packet, p, float(t), h=5e-4)
             for p, t in zip(pts, ts))
    ratio = r1 / r2
    dt = time.time() - t0
    ok = 3.5 <= ratio <= 4.5 and dt < 60.0
    record(2, ok, f"residual ratio h->h/2 = {ratio:.3f} in [3.5, 4.5], "
                  f"max residual {r1:.2e}, {dt:.1f}s (< 60s)")


def test_criterion_3_scattering_into_cones(default_packet):
    from diracflux.farfield import FarFieldEvaluator
    from diracflux.statphase import cones_asymptotic

    t0 = time.time()
    k = np.array([2.0, 0.0, 0.0])
    Ek = float(np.sqrt(k @ k + 1.0))
    lams = np.array([25.0, 50.0, 100.0, 200.0])
    pts = lams[:, None] * k[None, :]
    ev = FarFieldEvaluator(default_packet, pts, time_horizon=lams[-1] * Ek)
    errs, leads = [], []
    for i, lam in enumerate(lams):
        psi = ev.psi_at_times([lam * Ek], point_sel=[i])[0, 0]
        lead = cones_asymptotic(default_packet, lam, k)
        errs.append(float(snorm(psi - lead)))
        leads.append(float(snorm(lead)))
    err_slope = loglog_slope(lams, errs)
    lead_slope = loglog_slope(lams, leads)
    dt = time.time() - t0
    ok = err_slope <= -1.7 and abs(lead_slope + 1.5) <= 0.02 and dt < 300.0
    record(3, ok, f"error slope {err_slope:.3f} (<= -1.7), leading slope "
                  f"{lead_slope:.4f} (-1.5 +- 0.02), {dt:.1f}s (< 5min)")


def test_criterion_4_stationary_phase():
    from diracflux.statphase import (GaussianBumpChi, PhaseParams,
                                     error_scaling, k_stationary,
                                     phase_gradient)

    t0 = time.time()
    chi = GaussianBumpChi(center=(0.75, 0.0, 0.0), sigma=0.35,
                          cut_radius=1.6, cut_width=0.45)
    res = error_scaling(0.0, np.array([0.6, 0.0, 0.0]), 1.0,
                        [25.0, 50.0, 100.0, 200.0], chi)
    res2 = error_scaling(0.0, np.array([1.5, 0.0, 0.0]), 1.0,
                         [20.0, 40.0, 80.0, 160.0], chi)
    p = PhaseParams(a=0.0, y=np.array([0.6, 0.0, 0.0]), m=1.0, mu=100.0)
    grad = float(np.linalg.norm(phase_gradient(p, k_stationary(p))))
    dt = time.time() - t0
    ok = (res["slope"] <= -1.7 and res2["slope"] <= -1.7
          and grad <= 1e-10 and dt < 300.0)
    record(4, ok, f"remainder slope {res['slope']:.3f} (<= -1.7), "
                  f"no-stationary-point decay {res2['slope']:.3f} (<= -1.7), "
                  f"gradient residual {grad:.1e} (<= 1e-10), "
                  f"{dt:.1f}s (< 5min)")


def test_criterion_5_free_flux_across_surfaces(free_sweeps, default_packet):
    cone_rep = free_sweeps["cone"]
    full_rep = free_sweeps["full"]
    disc = cone_rep.column("abs_disc")
    pside = momentum_side(default_packet, CONE)
    mono = bool(np.all(np.diff(disc) <= 1e-12))
    final = disc[-1] / pside
    crossings = full_rep.column("crossing_direct")
    band = bool(np.all((crossings >= 0.97) & (crossings <= 1.01)))
    space_frac = abs(full_rep.rows[-1].spacelike_part) / crossings[-1]
    dt = free_sweeps["elapsed"]
    ok = mono and final < 0.05 and band and space_frac < 0.01 and dt < 1200.0
    record(5, ok,
           f"abs_disc {np.array2string(disc, precision=2)} monotone={mono}, "
           f"final/momentum_side {final:.2e} (< 0.05), full-sphere "
           f"{crossings[-1]:.5f} in [0.97, 1.01], space-like fraction "
           f"{space_frac:.1e} (< 0.01), {dt:.0f}s (< 20min)")


def test_criterion_6_substitution_identity(free_sweeps):
    rep = free_sweeps["cone"]
    direct = rep.column("crossing_direct")
    sub = rep.column("crossing_substituted")
    rel = float(np.max(np.abs(sub - direct) / np.abs(direct)))
    ok = rel <= 1e-6
    record(6, ok, f"max |substituted - direct| / direct = {rel:.2e} (<= 1e-6)")


def test_criterion_7_covariant_form():
    t0 = time.time()
    rng = np.random.default_rng(7)
    worst = 0.0
    for trial in range(20):
        g = cartesian_grid(rng.uniform(-1, 1, 3), 2.5, 10)
        f = rng.normal(size=(g.n_nodes, 2)) + 1j * rng.normal(size=(g.n_nodes, 2))
        amp = MomentumAmplitude(grid=g, f=f, m=float(rng.uniform(0.4, 2.5)))
        amp = amp.normalized()
        cone = ConeSpec(axis=rng.normal(size=3),
                        half_angle=float(rng.uniform(0.1, np.pi)))
        a = momentum_side(amp, cone)
        b = covariant_momentum_side(amp, cone)
        worst = max(worst, abs(a - b) / max(abs(a), 1e-30))
    dt = time.time() - t0
    ok = worst <= 1e-12 and dt < 10.0
    record(7, ok, f"max |covariant - plain| = {worst:.2e} (<= 1e-12) over 20 "
                  f"random amplitudes/cones, {dt:.1f}s (< 10s)")


def test_criterion_8_green_kernel():
    import sympy as sp

    from diracflux.lippmann import green_kernel

    t0 = time.time()
    dm = dirac_matrices()
    xs, ys, zs = sp.symbols("x y z", real=True)
    r = sp.sqrt(xs * xs + ys * ys + zs * zs)
    kk = sp.Rational(17, 10)
    Es = sp.sqrt(kk * kk + 1)
    gkg = sp.exp(sp.I * kk * r) / (4 * sp.pi * r)
    grads = [sp.lambdify((xs, ys, zs), sp.diff(gkg, v), "numpy")
             for v in (xs, ys, zs)]
    base = sp.lambdify((xs, ys, zs), gkg, "numpy")
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        x = rng.normal(size=3)
        x *= (0.3 + 2.0 * rng.random()) / np.linalg.norm(x)
        oracle = -(sum(-1j * dm.alphas[a] * grads[a](*x) for a in range(3))
                   + (dm.beta + float(Es) * np.eye(4)) * base(*x))
        worst = max(worst, np.abs(oracle - green_kernel(1.7, x, 1.0)).max())

    def fd_resid(h):
        out = 0.0
        rng2 = np.random.default_rng(88)
        for _ in range(12):
            x = rng2.normal(size=3)
            x *= (1.0 + rng2.random()) / np.linalg.norm(x)
            E = np.sqrt(1.7 ** 2 + 1.0)
            acc = E * green_kernel(1.7, x, 1.0) \
                - dm.beta @ green_kernel(1.7, x, 1.0)
            for a in range(3):
                xp, xm = x.copy(), x.copy()
                xp[a] += h
                xm[a] -= h
                acc = acc - (-1j) * dm.alphas[a] @ (
                    (green_kernel(1.7, xp, 1.0)
                     - green_kernel(1.7, xm, 1.0)) / (2 * h))
            out = max(out, np.abs(acc).max())
        return out

    ratio = fd_resid(2e-3) / fd_resid(1e-3)
    dt = time.time() - t0
    ok = worst < 1e-12 and 3.0 <= ratio <= 5.0 and dt < 30.0
    record(8, ok, f"analytic-construction agreement {worst:.1e} (< 1e-12) at "
                  f"100 points, FD residual ratio {ratio:.2f} (O(h^2)), "
                  f"{dt:.1f}s (< 30s)")


def test_criterion_9_lippmann_schwinger(weak_bank_fields):
    from diracflux.lippmann import (born_solve, eigen_residual,
                                    gaussian_potential, hoelder_quotients,
                                    zeta_decay_certificate)

    fields = weak_bank_fields["fields"]
    pot = weak_bank_fields["pot"]
    grid = weak_bank_fields["grid"]
    zero = gaussian_potential(0.0)
    mono = all(np.all(np.diff(f.deltas) < 0.0) for f in fields)
    floor_cache = {}
    worst_ratio = 0.0
    for f in fields:
        key = (tuple(np.round(f.k, 12)), f.s)
        if key not in floor_cache:
            free = born_solve(zero, f.k, f.s, 1.0, grid, max_iter=2)
            floor_cache[key] = eigen_residual(free, zero)
        ratio = eigen_residual(f, pot) / floor_cache[key]
        worst_ratio = max(worst_ratio, ratio)
    certs = [zeta_decay_certificate(f) for f in fields]
    decay_ok = all(c["outer_max"] <= 1.1 * c["mid_max"] for c in certs)
    hoelder = max(hoelder_quotients(f, n_samples=100)["max"] for f in fields)
    kmax = max(np.linalg.norm(f.k) for f in fields)
    dt = weak_bank_fields["elapsed"]
    ok = (mono and worst_ratio <= 10.0 and decay_ok
          and hoelder < 10.0 * (1.0 + kmax) and dt < 900.0)
    record(9, ok, f"12-momentum bank at 32^3: deltas monotone={mono}, "
                  f"residual/floor {worst_ratio:.2f} (<= 10), shell decay "
                  f"certified={decay_ok}, Hoelder max {hoelder:.2f} bounded, "
                  f"{dt:.0f}s (< 15min)")


@pytest.fixture(scope="session")
def potential_sweep(default_packet):
    from diracflux.detector import sphere_quadrature
    from diracflux.lippmann import (ScatteringState, SpatialGrid,
                                    build_farfield_bank, gaussian_potential)

    t0 = time.time()
    pot = gaussian_potential(0.05)
    surf = sphere_quadrature(30.0, CONE, 16, 8)
    bank = build_farfield_bank(pot, 1.0, surf.normals, n_r=10, n_u=6,
                               n_phi=8, grid=SpatialGrid(L=4.65, n=32),
                               tol=1e-6, lmax=4)
    state = ScatteringState(default_packet, bank)
    rep = fas_sweep(state, CONE, [30.0, 60.0, 120.0], n_theta=16, n_phi=8)
    return {"rep": rep, "elapsed": time.time() - t0}


def test_criterion_10_potential_fas(potential_sweep, default_packet):
    rep = potential_sweep["rep"]
    disc = rep.column("abs_disc")
    pside = momentum_side(default_packet, CONE)
    mono = bool(np.all(np.diff(disc) <= 1e-12))
    final = disc[-1] / pside
    dt = potential_sweep["elapsed"]
    ok = mono and final < 0.10 and dt < 3600.0
    record(10, ok,
           f"abs_disc {np.array2string(disc, precision=2)} monotone={mono}, "
           f"final/momentum_side {final:.2e} (< 0.10), {dt:.0f}s (< 60min)")


def test_criterion_11_determinism(tmp_path):
    from diracflux.cli import parse_config, run
    from diracflux import _kernels

    cfg = parse_config("run.scenario = statphase-bench\n"
                       "statphase.mu_list = 10 20 40\n"
                       "statphase.mu_list_nostat = 10 20 40\n")
    r1 = run(cfg, str(tmp_path / "a"))
    r2 = run(cfg, str(tmp_path / "b"))
    byte_equal = ((tmp_path / "a" / "statphase.csv").read_bytes()
                  == (tmp_path / "b" / "statphase.csv").read_bytes())

    cfg2 = parse_config("run.scenario = cones-scaling\n"
                        "cones.lambda_list = 10 20 40\n")
    slopes = []
    for threads in (1, 2):
        if hasattr(_kernels.impl, "set_num_threads"):
            _kernels.impl.set_num_threads(threads)
        rep = run(cfg2, str(tmp_path / f"t{threads}"))
        slopes.append(rep.extras["cones"]["err_slope"])
    drift = abs(slopes[0] - slopes[1]) / max(1.0, abs(slopes[0]))
    ok = byte_equal and drift <= 1e-12
    record(11, ok, f"CSV bytes identical across reruns={byte_equal}, "
                   f"thread-count drift {drift:.2e} (<= 1e-12)")
