"""Compiled and reference kernels must agree to rounding, and the compiled
path must be bitwise independent of its thread count."""

import numpy as np
import pytest

from diracflux._kernels import HAVE_COMPILED, _ref

if HAVE_COMPILED:
    from diracflux._kernels import _fast
else:  # pragma: no cover - exercised only in no-compiler installs
    _fast = None

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED,
                                    reason="compiled kernels not built")


@pytest.fixture()
def gauss_args(rng):
    kc = np.linspace(0.0, 5.0, 33)
    u = np.linspace(-0.99, 0.99, 21)
    phis = np.arange(16) * 2 * np.pi / 16
    rot = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    if np.linalg.det(rot) < 0:
        rot[:, 0] *= -1
    return (kc, u, phis, rot, np.array([2.0, 0.1, -0.3]), 0.5, 0.7,
            0.8 + 0.1j, 0.2 - 0.4j, 1.0)


@needs_compiled
def test_gauss_phi_avg_matches(gauss_args):
    a = _fast.gauss_phi_avg(*gauss_args)
    b = _ref.gauss_phi_avg(*gauss_args)
    assert np.max(np.abs(a - b)) < 1e-13


@needs_compiled
def test_plane_sum_matches(rng):
    nodes = rng.normal(size=(500, 3))
    weights = rng.random(500)
    psihat = rng.normal(size=(500, 4)) + 1j * rng.normal(size=(500, 4))
    pts = rng.normal(size=(7, 3)) * 3
    ts = rng.random(7) * 5
    a = _fast.plane_sum(pts, ts, nodes, weights, psihat, 1.0)
    b = _ref.plane_sum(pts, ts, nodes, weights, psihat, 1.0)
    assert np.max(np.abs(a - b)) < 1e-11


@needs_compiled
def test_osc_gauss_sum_matches():
    ax = np.linspace(-1.0, 2.5, 41)
    ay = np.linspace(-1.7, 1.7, 35)
    az = np.linspace(-1.7, 1.7, 37)
    args = (ax, ay, az, 12.0, 0.3, np.array([0.5, 0.1, 0.0]), 1.0,
            np.array([0.75, 0.0, 0.0]), 0.4, 1.5, 0.4,
            np.array([1.0, 0.5j, -0.25, 0.0]))
    a = _fast.osc_gauss_sum(*args)
    b = _ref.osc_gauss_sum(*args)
    assert np.max(np.abs(a - b)) < 1e-13


@needs_compiled
def test_trilinear_matches(rng):
    field = rng.normal(size=(9, 9, 9, 4)) + 1j * rng.normal(size=(9, 9, 9, 4))
    pts = rng.uniform(-3.5, 3.5, size=(40, 3))
    a = _fast.trilinear(field, (-4.0, -4.0, -4.0), 1.0, pts)
    b = _ref.trilinear(field, (-4.0, -4.0, -4.0), 1.0, pts)
    assert np.max(np.abs(a - b)) < 1e-13


@needs_compiled
def test_bump_matches():
    r = np.linspace(0.0, 2.0, 101)
    assert np.max(np.abs(_fast.bump_radial(r, 1.5, 0.4)
                         - _ref.bump_radial(r, 1.5, 0.4))) < 1e-15


@needs_compiled
def test_thread_count_bitwise_determinism(gauss_args, rng):
    ax = np.linspace(-1.0, 2.5, 61)
    osc_args = (ax, ax, ax, 20.0, 0.0, np.array([0.6, 0.0, 0.0]), 1.0,
                np.array([0.75, 0.0, 0.0]), 0.4, 1.5, 0.4,
                np.array([1.0, 0.0, 0.0, 0.0]))
    nodes = rng.normal(size=(2000, 3))
    weights = rng.random(2000)
    psihat = rng.normal(size=(2000, 4)) + 1j * rng.normal(size=(2000, 4))
    pts = rng.normal(size=(5, 3))
    ts = rng.random(5)
    results = []
    for n in (1, 2):
        _fast.set_num_threads(n)
        results.append((
            _fast.gauss_phi_avg(*gauss_args).copy(),
            _fast.osc_gauss_sum(*osc_args).copy(),
            _fast.plane_sum(pts, ts, nodes, weights, psihat, 1.0).copy(),
        ))
    _fast.set_num_threads(0 or 2)
    for a, b in zip(*results):
        assert np.array_equal(a, b)
