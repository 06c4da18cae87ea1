"""Free time evolution by direct quadrature over the momentum grid.

``evaluate_wave`` sums the lattice exactly as written:
    psi(x, t) = (2 pi)^{-3/2} sum_n w_n exp(i(k_n.x - E_n t)) psi_hat(k_n)
which is trustworthy only while the phase advance per grid cell stays below
pi; beyond that the sum aliases (lattice images of the packet contaminate the
value) and the call refuses with ``AliasingError``.  Far-field work goes
through :mod:`diracflux.farfield` instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import AliasingError, AliasingWarning
from .momentum import synthesize_all
from .spinor import FluxVector, flux_density, flux_spatial, snorm

__all__ = [
    "SpacetimePoint",
    "evaluate_wave",
    "evaluate_wave_batch",
    "evaluate_wave_grid",
    "flux_at",
    "continuity_residual",
    "continuity_residual_signed",
    "spacelike_decay_check",
]

PREFACTOR = (2.0 * np.pi) ** -1.5


@dataclass(frozen=True)
class SpacetimePoint:
    x: np.ndarray
    t: float


def _grid_spacing(grid):
    if grid.layout == "cartesian":
        return max(ax[1] - ax[0] for ax in grid.axes)
    # spherical product: use the largest nearest-neighbour radial scale
    kmag = np.unique(np.round(np.linalg.norm(grid.nodes, axis=1), 12))
    if kmag.size < 2:
        return 0.0
    return float(np.max(np.diff(kmag)))


def _alias_check(amplitude, points, on_alias):
    h = _grid_spacing(amplitude.grid)
    rmax = float(np.max(np.linalg.norm(np.atleast_2d(points), axis=1)))
    advance = rmax * h
    if advance > np.pi:
        msg = (f"phase advance per grid cell {advance:.3f} exceeds pi at "
               f"|x| = {rmax:.3f} (spacing {h:.4f}); lattice sum untrusted")
        if on_alias == "raise":
            raise AliasingError(msg)
        if on_alias == "warn":
            warnings.warn(msg, AliasingWarning)


def evaluate_wave(amplitude, point, t=None, on_alias="raise"):
    """psi(x, t) at a single spacetime point by the lattice sum."""
    if isinstance(point, SpacetimePoint):
        x, t = point.x, point.t
    else:
        x = point
    out = evaluate_wave_batch(amplitude, np.asarray(x, float)[None, :],
                              np.array([t], float), on_alias=on_alias)
    return out[0]


def evaluate_wave_batch(amplitude, points, times, on_alias="raise"):
    """psi at many (x_p, t_p) pairs; shape (P, 4)."""
    _alias_check(amplitude, points, on_alias)
    psihat = synthesize_all(amplitude)
    out = _kernels.plane_sum(points, times, amplitude.grid.nodes,
                             amplitude.grid.weights, psihat, amplitude.m)
    return PREFACTOR * out


def evaluate_wave_grid(amplitude, axes, t, on_alias="raise"):
    """psi(x, t) on a cartesian spatial grid, separable contraction per axis.

    Same lattice sum as ``evaluate_wave`` in a different summation order
    (exp(-i E t) folded into the amplitude, then one tensor contraction per
    axis); agrees with the pointwise path to rounding.  Returns an array of
    shape (nx, ny, nz, 4).
    """
    grid = amplitude.grid
    if grid.layout != "cartesian":
        raise ValueError("separable evaluation needs a cartesian momentum grid")
    corners = np.array([[ax[0] for ax in axes], [ax[-1] for ax in axes]])
    rmax_pt = np.max(np.abs(corners), axis=0)
    _alias_check(amplitude, rmax_pt[None, :], on_alias)

    psihat = synthesize_all(amplitude)
    kmag = np.linalg.norm(grid.nodes, axis=1)
    ek = np.sqrt(kmag ** 2 + amplitude.m ** 2)
    f_t = (grid.weights * np.exp(-1j * ek * t))[:, None] * psihat
    n = grid.shape
    f_t = f_t.reshape(n + (4,))
    out = f_t
    for axis in range(3):
        phase = np.exp(1j * np.outer(np.asarray(axes[axis]), grid.axes[axis]))
        out = np.tensordot(phase, out, axes=([1], [0]))
        # tensordot moves the contracted axis to front; cycle keeps ordering
        out = np.moveaxis(out, 0, 2)
    return PREFACTOR * out


def flux_at(amplitude, point, t=None, on_alias="raise") -> FluxVector:
    """4-flux of the freely evolved state at one spacetime point."""
    psi = evaluate_wave(amplitude, point, t, on_alias=on_alias)
    return FluxVector(j0=float(flux_density(psi)), j=flux_spatial(psi))


def continuity_residual_signed(amplitude, point, t=None, h=1e-3, on_alias="raise"):
    """Central-difference residuals (d_t j0 + div j, d_t j0 - div j).

    The standard Dirac continuity equation makes the first vanish; the second
    corresponds to the opposite relative sign sometimes printed.  Both are
    returned so the suite can record which one is zero.
    """
    if isinstance(point, SpacetimePoint):
        x, t = point.x, point.t
    else:
        x = np.asarray(point, float)
    pts = [x]
    ts = [t + h, t - h]
    for a in range(3):
        for s in (+1.0, -1.0):
            q = x.copy()
            q[a] += s * h
            pts.append(q)
    points = np.vstack([x, x] + pts[1:])
    times = np.array(ts + [t] * 6)
    psi = evaluate_wave_batch(amplitude, points, times, on_alias=on_alias)
    j0p, j0m = flux_density(psi[0]), flux_density(psi[1])
    dj0_dt = (j0p - j0m) / (2.0 * h)
    div = 0.0
    for a in range(3):
        jp = flux_spatial(psi[2 + 2 * a])[a]
        jm = flux_spatial(psi[3 + 2 * a])[a]
        div += (jp - jm) / (2.0 * h)
    return abs(dj0_dt + div), abs(dj0_dt - div)


def continuity_residual(amplitude, point, t=None, h=1e-3, on_alias="raise"):
    """|d_t j0 + div j| by central differences (the sign that vanishes)."""
    plus, _ = continuity_residual_signed(amplitude, point, t, h, on_alias)
    return plus


def spacelike_decay_check(amplitude, eta, x_list, direction=(1.0, 0.0, 0.0)):
    """sup over x_list of x^2 ||psi(x e, eta x)||_s along a fixed direction.

    Probes the region outside (eta < 1) or on (eta = 1) the light cone, where
    the wavefunction obeys a C / x^2 bound.  Far-field evaluation, so large x
    is fine regardless of the amplitude's grid spacing.
    """
    from .farfield import FarFieldEvaluator

    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    x_list = np.asarray(x_list, float)
    if np.any(np.diff(x_list) <= 0.0):
        raise ValueError("x_list must be increasing")
    e = np.asarray(direction, float)
    e = e / np.linalg.norm(e)
    points = x_list[:, None] * e[None, :]
    ev = FarFieldEvaluator(amplitude, points, time_horizon=float(eta * x_list[-1]))
    norms = np.empty(x_list.size)
    for i, x in enumerate(x_list):
        psi = ev.psi_at_times(np.array([eta * x]), point_sel=[i])[0, 0]
        norms[i] = snorm(psi)
    bound = x_list ** 2 * norms
    return {
        "eta": float(eta),
        "x": x_list,
        "x2_norm": bound,
        "sup": float(np.max(bound)),
        "sup_at": float(x_list[np.argmax(bound)]),
    }
