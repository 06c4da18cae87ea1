"""Far-field evaluation of the freely evolving wavefunction.

Direct lattice summation over a cartesian momentum grid aliases once the
phase advance per cell exceeds pi, which at detector radii it always does.
This module evaluates the same integral

    psi(x, t) = (2 pi)^{-3/2} int exp(i(k.x - E_k t)) psi_hat(k) d^3 k

by a spherical-product quadrature aligned with each target point: azimuthal
average, Legendre transform in cos(theta) (the plane-wave factor integrates
against P_l to a spherical Bessel function), and a radial Gauss-Legendre grid
sized to the total phase k_max (r + T).  All integrands are band-limited, so
Gauss-Legendre node counts proportional to the phase budget give spectral
accuracy; self-convergence of the default sizing is pinned by tests.

Potential-case states add an outgoing scattered channel
A_extra(k) = exp(i k r)/r * B(k) through ``extra_assemble``.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander
from scipy.interpolate import CubicSpline
from scipy.special import spherical_jn

from . import _kernels
from .momentum import GaussianSpec
from .spinor import spinor_components

__all__ = ["FarFieldEvaluator", "gl_nodes_for_phase", "rotation_to"]

PREFACTOR = (2.0 * np.pi) ** -1.5

# Gauss-Legendre resolves exp(i Phi u/2) on [-1, 1] once n > ~0.29 Phi; the
# margin absorbs the smooth amplitude factors.  Pinned by a calibration test.
_GL_RATE = 0.31
_GL_MARGIN = 72


def gl_nodes_for_phase(phase):
    """Node count for a Gauss-Legendre rule resolving a given total phase."""
    return int(np.ceil(_GL_RATE * abs(phase))) + _GL_MARGIN


def rotation_to(zhat):
    """Rotation matrix taking e_z to the unit vector zhat."""
    z = np.array([0.0, 0.0, 1.0])
    zhat = np.asarray(zhat, float)
    v = np.cross(z, zhat)
    c = float(z @ zhat)
    s = np.linalg.norm(v)
    if s < 1e-14:
        return np.eye(3) if c > 0.0 else np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx / (1.0 + c)


def _profile_kmax(profile, m):
    return float(np.linalg.norm(profile.k0) + 8.0 * profile.sigma)


class FarFieldEvaluator:
    """Tabulates radial amplitudes A_p(k) per target point, then evaluates
    psi(x_p, t) = (2 pi)^{-3/2} int exp(-i E_k t) A_p(k) dk for any times."""

    def __init__(self, amplitude, points, *, time_horizon, kmax=None,
                 lmax=96, nphi=48, nkc=193, extra_assemble=None):
        self.amplitude = amplitude
        self.m = amplitude.m
        self.points = np.atleast_2d(np.asarray(points, float))
        self.time_horizon = float(time_horizon)
        prof = amplitude.profile
        if kmax is None:
            if prof is None:
                kmax = float(np.max(np.linalg.norm(amplitude.grid.nodes, axis=1)))
            else:
                kmax = _profile_kmax(prof, self.m)
        self.kmax = float(kmax)
        self.lmax = int(lmax)
        self.nphi = int(nphi)
        self.nkc = int(nkc)

        rmax = float(np.max(np.linalg.norm(self.points, axis=1)))
        nk = gl_nodes_for_phase(self.kmax * (rmax + self.time_horizon))
        xg, wg = leggauss(nk)
        self.kgrid = 0.5 * self.kmax * (xg + 1.0)
        self.kweights = 0.5 * self.kmax * wg
        self.Ek = np.sqrt(self.kgrid ** 2 + self.m ** 2)

        self.ctail = 0.0  # worst relative tail of the Legendre spectrum
        A = self._assemble_tables()
        if extra_assemble is not None:
            A = A + extra_assemble(self.kgrid, self.points)
        # fold quadrature weights in once; zgemm with the phase matrix remains
        self._Aw = (self.kweights[:, None, None] * A).reshape(nk, -1)

    # -- table construction ------------------------------------------------

    def _phi_averaged(self, kc, u, rot):
        """Azimuth-averaged psi_hat on the (k, cos-theta) grid, local frame."""
        prof = self.amplitude.profile
        phis = np.arange(self.nphi) * 2.0 * np.pi / self.nphi
        if isinstance(prof, GaussianSpec):
            return _kernels.gauss_phi_avg(
                kc, u, phis, rot, prof.k0, prof.sigma, prof.amp,
                complex(prof.mix[0]), complex(prof.mix[1]), self.m)
        return self._phi_averaged_generic(kc, u, phis, rot)

    def _phi_averaged_generic(self, kc, u, phis, rot):
        """Fallback for gridded amplitudes: interpolate the spin channels."""
        interp = _gridded_channels(self.amplitude)
        st = np.sqrt(np.maximum(0.0, 1.0 - u * u))
        out = np.zeros((kc.size, u.size, 4), dtype=complex)
        for p, phi in enumerate(phis):
            local = np.stack(
                [st * np.cos(phi), st * np.sin(phi), u], axis=-1)
            dirs = local @ rot.T
            kv = kc[:, None, None] * dirs[None, :, :]
            f = interp(kv.reshape(-1, 3)).reshape(kc.size, u.size, 2)
            s1, s2 = spinor_components(kv, self.m)
            out += f[..., :1] * s1 + f[..., 1:] * s2
        return out / len(phis)

    def _assemble_tables(self):
        nk = self.kgrid.size
        P = self.points.shape[0]
        A = np.empty((nk, P, 4), dtype=complex)
        kc = np.linspace(0.0, self.kmax, self.nkc)
        # cubic interpolation kc -> kgrid is linear in the data: one matrix
        S = CubicSpline(kc, np.eye(self.nkc), axis=0)(self.kgrid)  # (nk, nkc)
        il = 1j ** np.arange(self.lmax + 1)
        radii = np.linalg.norm(self.points, axis=1)
        # group points by radius so Bessel/Legendre tables are shared
        order = {}
        for idx, r in enumerate(radii):
            order.setdefault(round(float(r), 9), []).append(idx)
        for r, idxs in order.items():
            nu = max(int(0.58 * self.kmax * r) + 48, self.lmax + 32)
            u, wu = leggauss(nu)
            P_lu = legvander(u, self.lmax)                      # (nu, L+1)
            lw = (2.0 * np.arange(self.lmax + 1) + 1.0) / 2.0
            proj = (wu[:, None] * P_lu) * lw[None, :]           # (nu, L+1)
            jl = spherical_jn(
                np.arange(self.lmax + 1)[None, :], (self.kgrid * r)[:, None])
            bessel = 2.0 * jl * il[None, :]                     # (nk, L+1)
            for idx in idxs:
                x = self.points[idx]
                rot = rotation_to(x / r) if r > 0 else np.eye(3)
                g = self._phi_averaged(kc, u, rot)              # (nkc, nu, 4)
                cl = np.tensordot(g, proj, axes=([1], [0]))     # (nkc, 4, L+1)
                tail = np.max(np.abs(cl[:, :, -8:])) / max(np.max(np.abs(cl)), 1e-300)
                self.ctail = max(self.ctail, float(tail))
                clf = np.tensordot(S, cl, axes=([1], [0]))      # (nk, 4, L+1)
                A[:, idx, :] = (2.0 * np.pi) * self.kgrid[:, None] ** 2 * np.einsum(
                    "kcl,kl->kc", clf, bessel)
        return A

    # -- evaluation ----------------------------------------------------------

    def psi_at_times(self, times, point_sel=None, chunk=384):
        """psi(x_p, t_i) for all points (or a selection); shape (nt, P, 4)."""
        times = np.atleast_1d(np.asarray(times, float))
        if point_sel is None:
            Aw = self._Aw
            P = self.points.shape[0]
        else:
            Aw = self._Aw.reshape(self.kgrid.size, -1, 4)[:, point_sel, :]
            P = Aw.shape[1]
            Aw = Aw.reshape(self.kgrid.size, -1)
        out = np.empty((times.size, Aw.shape[1]), dtype=complex)
        for s in range(0, times.size, chunk):
            ts = times[s:s + chunk]
            phase = np.exp(-1j * np.outer(ts, self.Ek))
            out[s:s + chunk] = phase @ Aw
        return PREFACTOR * out.reshape(times.size, P, 4)

    def spectrum_tail(self):
        """Worst relative magnitude of the last Legendre coefficients."""
        return self.ctail


def _gridded_channels(amplitude):
    from scipy.interpolate import RegularGridInterpolator

    grid = amplitude.grid
    if grid.layout != "cartesian":
        raise ValueError("far-field evaluation of gridded amplitudes needs a "
                         "cartesian layout (or an analytic profile)")
    shape = grid.shape
    f = amplitude.f.reshape(shape + (2,))
    itp = RegularGridInterpolator(grid.axes, f, method="linear",
                                  bounds_error=False, fill_value=0.0)

    def channels(kvecs):
        return itp(kvecs)

    return channels
