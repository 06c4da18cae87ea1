import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from diracflux.farfield import (FarFieldEvaluator, gl_nodes_for_phase,
                                rotation_to)
from diracflux.propagate import evaluate_wave
from diracflux.spinor import snorm


def test_gl_rate_calibration():
    # the node-count rule must resolve pure oscillations to ~1e-12
    for phase in (200.0, 600.0, 1500.0):
        n = gl_nodes_for_phase(phase)
        u, w = leggauss(n)
        z = phase / 2.0
        val = np.sum(w * np.exp(1j * z * u))
        exact = 2.0 * np.sin(z) / z
        assert abs(val - exact) < 1e-12


def test_rotation_to_axis(rng):
    for _ in range(20):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        R = rotation_to(v)
        assert np.allclose(R @ np.array([0.0, 0.0, 1.0]), v, atol=1e-12)
        assert np.allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert np.allclose(rotation_to([0.0, 0.0, 1.0]), np.eye(3))
    Rm = rotation_to([0.0, 0.0, -1.0])
    assert np.allclose(Rm @ [0.0, 0.0, 1.0], [0.0, 0.0, -1.0])


def test_matches_lattice_at_moderate_radius(wide_packet):
    # inside the lattice guard both evaluators are valid; the wide 9-sigma
    # box makes their different truncations agree below 1e-8
    pts = np.array([[12.0, 2.0, 1.0], [0.0, 0.0, 0.0], [-6.0, 3.0, -4.0]])
    ev = FarFieldEvaluator(wide_packet, pts, time_horizon=20.0)
    for t in (0.0, 6.0, 13.5):
        ff = ev.psi_at_times([t])[0]
        for i, x in enumerate(pts):
            lat = evaluate_wave(wide_packet, x, t)
            assert snorm(ff[i] - lat) < 2e-8


def test_self_convergence_far(default_packet):
    x = 120.0 * np.array([np.cos(0.1), np.sin(0.1), 0.0])
    ts = np.array([0.5 * 134.2, 134.2, 300.0])
    base = FarFieldEvaluator(default_packet, x[None, :], time_horizon=350.0)
    fine = FarFieldEvaluator(default_packet, x[None, :], time_horizon=350.0,
                             lmax=128, nphi=72, nkc=289)
    a = base.psi_at_times(ts)[:, 0, :]
    b = fine.psi_at_times(ts)[:, 0, :]
    peak = np.max(snorm(b))
    assert np.max(snorm(a - b)) < 4e-8 * peak + 1e-13


def test_legendre_spectrum_tail_is_resolved(default_packet):
    pts = np.array([[60.0, 5.0, -3.0]])
    ev = FarFieldEvaluator(default_packet, pts, time_horizon=100.0)
    assert ev.spectrum_tail() < 1e-9


def test_gridded_amplitude_fallback(default_packet):
    # strip the analytic profile: interpolation path stays close at desk radii
    from dataclasses import replace

    gridded = replace(default_packet, profile=None)
    pts = np.array([[10.0, 1.0, 0.0]])
    ev_a = FarFieldEvaluator(default_packet, pts, time_horizon=15.0)
    ev_b = FarFieldEvaluator(gridded, pts, time_horizon=15.0,
                             kmax=ev_a.kmax)
    t = np.array([11.0])
    a = ev_a.psi_at_times(t)[0, 0]
    b = ev_b.psi_at_times(t)[0, 0]
    # trilinear interpolation of the channels limits the fallback to ~(h/sigma)^2
    assert snorm(a - b) < 1e-2 * max(snorm(a), 1e-300)
