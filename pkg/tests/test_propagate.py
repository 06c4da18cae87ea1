import numpy as np
import pytest

from diracflux.errors import AliasingError
from diracflux.momentum import MomentumAmplitude, MomentumGrid, cartesian_grid, \
    gaussian_packet, synthesize_all
from diracflux.propagate import (PREFACTOR, continuity_residual,
                                 continuity_residual_signed, evaluate_wave,
                                 evaluate_wave_batch, evaluate_wave_grid,
                                 flux_at, spacelike_decay_check)
from diracflux.spinor import flux_density, snorm


def test_value_at_origin_is_plain_sum(default_packet):
    psi = evaluate_wave(default_packet, np.zeros(3), 0.0)
    g = default_packet.grid
    expect = PREFACTOR * np.sum(
        g.weights[:, None] * synthesize_all(default_packet), axis=0)
    assert np.allclose(psi, expect, atol=1e-15)


def test_single_node_time_phase():
    grid = MomentumGrid(nodes=np.array([[1.0, 0.0, 0.0]]),
                        weights=np.array([2.0]), layout="spherical")
    amp = MomentumAmplitude(grid=grid, f=np.array([[1.0 + 0j, 0.0]]), m=1.0)
    x = np.array([0.3, -0.2, 0.5])
    p0 = evaluate_wave(amp, x, 0.0)
    p1 = evaluate_wave(amp, x, 2.5)
    assert np.allclose(p1, p0 * np.exp(-1j * np.sqrt(2.0) * 2.5), atol=1e-14)


def test_plancherel_spatial_box(wide_packet):
    # oracle: spatial Riemann sum at two resolutions
    vals = []
    for nx in (48, 64):
        ax = np.linspace(-10.0, 10.0, nx)
        h = ax[1] - ax[0]
        psi = evaluate_wave_grid(wide_packet, (ax, ax, ax), 0.0)
        vals.append(float(np.sum(flux_density(psi)) * h ** 3))
    assert vals[1] == pytest.approx(1.0, abs=1e-4)
    assert abs(vals[1] - vals[0]) < 1e-4


def test_norm_conservation_under_evolution(wide_packet):
    # box corners stay inside the aliasing guard of the 9-sigma packet grid
    ax = np.linspace(-8.0, 12.0, 72)
    h = ax[1] - ax[0]
    norms = []
    for t in (0.0, 5.0):
        psi = evaluate_wave_grid(wide_packet, (ax, ax, ax), t)
        norms.append(float(np.sum(flux_density(psi)) * h ** 3))
    assert abs(norms[1] - norms[0]) < 1e-4


def test_phase_coherence_against_independent_sums(default_packet, rng):
    # kernel path vs separable path vs compensated direct sum, all 1e-12
    pts = rng.uniform(-5, 5, size=(3, 3))
    ts = rng.uniform(0, 4, size=3)
    batch = evaluate_wave_batch(default_packet, pts, ts)
    g = default_packet.grid
    psihat = synthesize_all(default_packet)
    kmag = np.linalg.norm(g.nodes, axis=1)
    ek = np.sqrt(kmag ** 2 + 1.0)
    for i in range(3):
        phases = np.exp(1j * (g.nodes @ pts[i] - ek * ts[i]))
        terms = (g.weights * phases)[:, None] * psihat
        # compensated summation in a shuffled order
        order = rng.permutation(terms.shape[0])
        direct = np.zeros(4, complex)
        comp = np.zeros(4, complex)
        for n in order:
            y = terms[n] - comp
            t = direct + y
            comp = (t - direct) - y
            direct = t
        assert snorm(batch[i] - PREFACTOR * direct) < 1e-12
    for i in range(3):
        gridded = evaluate_wave_grid(
            default_packet, (pts[i, :1], pts[i, 1:2], pts[i, 2:3]), ts[i])
        assert snorm(batch[i] - gridded[0, 0, 0]) < 1e-12


def test_aliasing_guard(default_packet):
    with pytest.raises(AliasingError):
        evaluate_wave(default_packet, np.array([40.0, 0.0, 0.0]), 10.0)
    with pytest.warns(UserWarning):
        evaluate_wave(default_packet, np.array([40.0, 0.0, 0.0]), 10.0,
                      on_alias="warn")


def test_flux_at_zero_amplitude():
    g = cartesian_grid((0, 0, 0), 2.0, 8)
    amp = MomentumAmplitude(grid=g, f=np.zeros((g.n_nodes, 2), complex), m=1.0)
    f = flux_at(amp, np.array([0.5, 0.0, 0.0]), 1.0)
    assert f.j0 == 0.0 and np.all(f.j == 0.0)


def test_flux_time_component_dominates(default_packet, rng):
    for _ in range(5):
        x = rng.uniform(-2, 2, 3)
        f = flux_at(default_packet, x, float(rng.uniform(0, 2)))
        assert np.linalg.norm(f.j) <= f.j0 * (1.0 + 1e-12)


def test_continuity_residual_h_squared(default_packet):
    x = np.array([0.5, 0.2, -0.1])
    r1 = continuity_residual(default_packet, x, 1.0, h=1e-2)
    r2 = continuity_residual(default_packet, x, 1.0, h=5e-3)
    assert r1 < 1e-4
    assert r1 / r2 == pytest.approx(4.0, abs=0.6)


def test_continuity_sign_resolution(default_packet):
    plus, minus = continuity_residual_signed(default_packet,
                                             np.array([0.4, -0.3, 0.2]), 0.7,
                                             h=1e-3)
    # the standard-sign residual vanishes; the opposite sign does not
    assert plus < 1e-6
    assert minus > 1e3 * plus


def test_continuity_zero_amplitude():
    g = cartesian_grid((0, 0, 0), 2.0, 8)
    amp = MomentumAmplitude(grid=g, f=np.zeros((g.n_nodes, 2), complex), m=1.0)
    assert continuity_residual(amp, np.array([0.3, 0.0, 0.0]), 0.5) == 0.0


def test_continuity_single_plane_wave_density_static():
    grid = MomentumGrid(nodes=np.array([[1.0, 0.0, 0.0]]),
                        weights=np.array([1.0]), layout="spherical")
    amp = MomentumAmplitude(grid=grid, f=np.array([[1.0 + 0j, 0.0]]), m=1.0)
    r = continuity_residual(amp, np.array([0.2, 0.1, 0.0]), 0.9, h=1e-3)
    assert r < 1e-11


def test_spacelike_decay_on_light_cone(default_packet):
    # along the propagation axis the light-cone profile decays monotonically
    xs = np.array([20.0, 40.0, 80.0, 140.0, 200.0])
    rep = spacelike_decay_check(default_packet, 1.0, xs)
    assert rep["sup"] <= rep["x2_norm"][0] * (1.0 + 1e-9)
    assert np.all(np.diff(rep["x2_norm"]) <= 0.0)


def test_spacelike_decay_deep_spacelike(default_packet):
    # far outside the cone the state is below the evaluator's absolute
    # accuracy (~1e-10); boundedness is asserted against that floor
    xs = np.array([20.0, 40.0, 80.0, 140.0, 200.0])
    for eta in (0.0, 0.5):
        rep = spacelike_decay_check(default_packet, eta, xs)
        assert rep["sup"] <= max(1.5 * rep["x2_norm"][0], 5e-5)


def test_spacelike_zero_amplitude():
    g = cartesian_grid((0, 0, 0), 3.0, 12)
    amp = MomentumAmplitude(grid=g, f=np.zeros((g.n_nodes, 2), complex), m=1.0)
    rep = spacelike_decay_check(amp, 0.5, np.array([20.0, 40.0]))
    assert rep["sup"] == 0.0


def test_spacelike_c_over_x2_bound(default_packet):
    # outside the light cone ||psi|| <= C / x^2 with C fixed at the smallest x
    xs = np.array([25.0, 50.0, 100.0, 200.0])
    rep = spacelike_decay_check(default_packet, 0.8, xs)
    C = rep["x2_norm"][0]
    assert np.all(rep["x2_norm"] <= C * (1.0 + 1e-9))
