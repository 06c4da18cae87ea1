import numpy as np
import pytest

from diracflux.detector import (crossing_detail, crossing_direct,
                                crossing_substituted, covariant_check,
                                default_k_min, default_t_max, fas_sweep,
                                full_sphere_quadrature, sphere_band_quadrature,
                                sphere_quadrature, tail_probability,
                                write_fas_csv)
from diracflux.momentum import ConeSpec, MomentumAmplitude, cartesian_grid, \
    momentum_side

CONE = ConeSpec(axis=(1, 0, 0), half_angle=0.3)


def _zero_state():
    g = cartesian_grid((2, 0, 0), 3.0, 8)
    return MomentumAmplitude(grid=g, f=np.zeros((g.n_nodes, 2), complex),
                             m=1.0)


def test_surface_weight_sums():
    full = full_sphere_quadrature(5.0)
    assert full.weights.sum() == pytest.approx(4.0 * np.pi * 25.0, rel=1e-10)
    hemi = sphere_quadrature(5.0, ConeSpec(axis=(0, 0, 1), half_angle=np.pi / 2))
    assert hemi.weights.sum() == pytest.approx(2.0 * np.pi * 25.0, rel=1e-10)
    cone = sphere_quadrature(5.0, CONE)
    assert cone.weights.sum() == pytest.approx(
        25.0 * CONE.solid_angle, rel=1e-10)


def test_surface_points_on_sphere():
    q = sphere_quadrature(7.0, CONE, 12, 8)
    assert np.max(np.abs(np.linalg.norm(q.points, axis=1) - 7.0)) < 1e-12
    assert np.max(np.abs(np.linalg.norm(q.normals, axis=1) - 1.0)) < 1e-12
    assert np.all(q.cone.contains(q.normals))


def test_surface_argument_validation():
    with pytest.raises(ValueError):
        sphere_quadrature(-1.0, CONE)
    with pytest.raises(ValueError):
        sphere_quadrature(5.0, CONE, n_theta=2)


def test_zero_state_all_zero():
    surf = sphere_quadrature(20.0, CONE, 8, 6)
    d = crossing_detail(_zero_state(), surf, t_max=50.0, k_min=0.5)
    assert d.crossing == 0.0
    assert d.abs_flux == 0.0
    assert d.substituted == 0.0


def test_crossing_defaults(default_packet):
    km = default_k_min(default_packet)
    assert km == pytest.approx(0.5)
    assert default_t_max(30.0, default_packet) == pytest.approx(
        30.0 * np.sqrt(0.25 + 1.0) / 0.5)
    tail = tail_probability(default_packet, km)
    assert 0.0 < tail < 1e-3


def test_crossing_vs_momentum_side_moderate_radius(default_packet):
    surf = sphere_quadrature(30.0, CONE, 16, 8)
    c = crossing_direct(default_packet, surf)
    p = momentum_side(default_packet, CONE)
    assert abs(c - p) / p < 0.05


def test_substitution_identity_and_abs_bound(default_packet):
    surf = sphere_quadrature(24.0, CONE, 12, 8)
    d = crossing_detail(default_packet, surf)
    assert abs(d.substituted - d.crossing) <= 1e-6 * abs(d.crossing)
    assert d.abs_flux >= d.crossing - 1e-12
    assert d.tail_bound < 1e-3


def test_substituted_public_contract(default_packet):
    surf = sphere_quadrature(24.0, CONE, 8, 6)
    v = crossing_substituted(default_packet, surf)
    assert v == pytest.approx(crossing_direct(default_packet, surf), rel=1e-6)

    class NotFree:
        pass

    with pytest.raises(ValueError):
        crossing_substituted(NotFree(), surf)


def test_cone_additivity_bands(default_packet):
    # crossing over a polar-band partition of the sphere agrees with the
    # nested-cone telescoping of the same integral
    R = 20.0
    bands = ((0.0, 0.3, 16), (0.3, 1.2, 12), (1.2, 2.2, 10), (2.2, np.pi, 8))
    total_bands = 0.0
    for lo, hi, nt in bands:
        q = sphere_band_quadrature(R, (1, 0, 0), lo, hi, nt, 8)
        total_bands += crossing_direct(default_packet, q, t_max=60.0)
    full = crossing_direct(default_packet, full_sphere_quadrature(R),
                           t_max=60.0)
    assert abs(total_bands - full) < 1e-8


def test_fas_sweep_report_and_csv(default_packet, tmp_path):
    rep = fas_sweep(default_packet, CONE, [20.0, 40.0], n_theta=12, n_phi=6)
    assert len(rep.rows) == 2
    disc = rep.column("abs_disc")
    assert disc[1] < disc[0]
    path = tmp_path / "fas.csv"
    write_fas_csv(rep, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ("R,crossing_direct,crossing_substituted,abs_flux,"
                        "spacelike_part,momentum_side,signed_disc,abs_disc,"
                        "tail_bound")
    assert len(lines) == 3
    row = [float(v) for v in lines[1].split(",")]
    assert row[0] == 20.0
    assert row[7] == abs(row[6])


def test_fas_sweep_single_radius(default_packet):
    rep = fas_sweep(default_packet, CONE, [25.0], n_theta=10, n_phi=6)
    assert len(rep.rows) == 1


def test_fas_sweep_requires_increasing_radii(default_packet):
    with pytest.raises(ValueError):
        fas_sweep(default_packet, CONE, [40.0, 20.0])


def test_transit_truncation_warning(default_packet):
    surf = sphere_quadrature(25.0, CONE, 8, 6)
    with pytest.warns(UserWarning):
        d = crossing_detail(default_packet, surf, t_max=26.0, k_min=0.5,
                            substituted=False)
    assert d.truncation_flagged


def test_far_field_alignment(default_packet):
    surf = sphere_quadrature(60.0, CONE, 12, 6)
    d = crossing_detail(default_packet, surf, substituted=False)
    assert d.alignment_angle < 0.05


def test_covariant_check_identities(default_packet):
    rep = covariant_check(default_packet, CONE, [20.0], n_theta=8, n_phi=6)
    assert rep["rhs_identity_error"] <= 1e-12
    for row in rep["rows"]:
        assert abs(row["covariant_lhs"] - row["crossing"]) <= 1e-10
