# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the reference kernels in ``_ref``.

Accumulation order is fixed (per-plane / per-point partials combined
sequentially), so results are bitwise independent of the thread count.
"""

import numpy as np

cimport numpy as cnp
cimport openmp
from cython.parallel cimport prange
from libc.math cimport cos, exp, sin, sqrt

IMPL_NAME = "cython"


def set_num_threads(n):
    openmp.omp_set_num_threads(int(n))


cdef inline double _bump(double r, double cut_r, double cut_w) nogil:
    cdef double s, ea, eb
    if cut_w <= 0.0:
        return 1.0 if r <= cut_r else 0.0
    s = (r - (cut_r - cut_w)) / cut_w
    if s <= 0.0:
        return 1.0
    if s >= 1.0:
        return 0.0
    ea = exp(-1.0 / (1.0 - s))
    eb = exp(-1.0 / s)
    return ea / (ea + eb)


def bump_radial(r, cut_r, cut_w):
    arr = np.asarray(r, dtype=np.float64)
    shape = arr.shape
    flat = np.ascontiguousarray(np.atleast_1d(arr).ravel())
    out = np.empty_like(flat)
    cdef double[::1] rv = flat
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double cr = cut_r, cw = cut_w
    for i in range(rv.shape[0]):
        ov[i] = _bump(rv[i], cr, cw)
    return out.reshape(shape)


def gauss_phi_avg(kc, u, phis, rot, k0, sigma, norm, mix1, mix2, m):
    kc = np.ascontiguousarray(kc, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    phis = np.ascontiguousarray(phis, dtype=np.float64)
    rot = np.asarray(rot, dtype=np.float64)
    k0 = np.asarray(k0, dtype=np.float64)

    st = np.sqrt(np.maximum(0.0, 1.0 - u * u))
    local = np.stack(
        [
            st[:, None] * np.cos(phis)[None, :],
            st[:, None] * np.sin(phis)[None, :],
            np.broadcast_to(u[:, None], (u.size, phis.size)),
        ],
        axis=-1,
    )
    dirs = np.ascontiguousarray(local @ rot.T)

    cdef Py_ssize_t nk = kc.shape[0], nu = u.shape[0], nphi = phis.shape[0]
    out = np.zeros((nk, nu, 4), dtype=np.complex128)

    cdef double[::1] kcv = kc
    cdef double[:, :, ::1] dv = dirs
    cdef double complex[:, :, ::1] ov = out
    cdef double inv4s2 = 1.0 / (4.0 * sigma * sigma)
    cdef double k0sq = float(k0 @ k0)
    cdef double k01 = k0[0], k02 = k0[1], k03 = k0[2]
    cdef double mm = m, nrm = norm
    cdef double complex cmix1 = mix1, cmix2 = mix2
    cdef Py_ssize_t i, q, p
    cdef double k, Ek, Eh, scale, f, g, sf, s0, s1, s2, d0, d1, d2
    cdef double complex km, kp

    for i in prange(nk, nogil=True):
        k = kcv[i]
        Ek = sqrt(k * k + mm * mm)
        Eh = Ek + mm
        scale = 1.0 / sqrt(2.0 * Ek * Eh) / nphi
        for q in range(nu):
            sf = 0.0
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            for p in range(nphi):
                d0 = dv[q, p, 0]
                d1 = dv[q, p, 1]
                d2 = dv[q, p, 2]
                g = d0 * k01 + d1 * k02 + d2 * k03
                f = nrm * exp(-(k * k + k0sq - 2.0 * k * g) * inv4s2)
                sf = sf + f
                s0 = s0 + f * d0
                s1 = s1 + f * d1
                s2 = s2 + f * d2
            km = k * (s1 - 1j * s2)
            kp = k * (s1 + 1j * s2)
            ov[i, q, 0] = cmix1 * Eh * sf * scale
            ov[i, q, 1] = cmix2 * Eh * sf * scale
            ov[i, q, 2] = (cmix1 * (k * s0) + cmix2 * km) * scale
            ov[i, q, 3] = (cmix1 * kp - cmix2 * (k * s0)) * scale
    return out


def plane_sum(points, times, nodes, weights, psihat, m):
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
    times = np.ascontiguousarray(np.atleast_1d(times), dtype=np.float64)
    nodes = np.ascontiguousarray(nodes, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    psihat = np.ascontiguousarray(psihat, dtype=np.complex128)
    En = np.ascontiguousarray(
        np.sqrt(np.sum(np.asarray(nodes) ** 2, axis=1) + m * m)
    )

    cdef Py_ssize_t P = points.shape[0], N = nodes.shape[0]
    out = np.zeros((P, 4), dtype=np.complex128)

    cdef double[:, ::1] xv = points
    cdef double[::1] tv = times
    cdef double[:, ::1] kv = nodes
    cdef double[::1] wv = weights
    cdef double complex[:, ::1] fv = psihat
    cdef double[::1] ev = En
    cdef double complex[:, ::1] ov = out
    cdef Py_ssize_t p, n
    cdef double ph, c, s, x0, x1, x2, t
    cdef double complex e

    for p in prange(P, nogil=True):
        x0 = xv[p, 0]
        x1 = xv[p, 1]
        x2 = xv[p, 2]
        t = tv[p]
        for n in range(N):
            ph = kv[n, 0] * x0 + kv[n, 1] * x1 + kv[n, 2] * x2 - ev[n] * t
            c = cos(ph)
            s = sin(ph)
            e = wv[n] * (c + 1j * s)
            ov[p, 0] = ov[p, 0] + e * fv[n, 0]
            ov[p, 1] = ov[p, 1] + e * fv[n, 1]
            ov[p, 2] = ov[p, 2] + e * fv[n, 2]
            ov[p, 3] = ov[p, 3] + e * fv[n, 3]
    return out


def osc_gauss_sum(ax, ay, az, mu, a, y, m, center, chi_sigma, cut_r, cut_w, coef):
    ax = np.ascontiguousarray(ax, dtype=np.float64)
    ay = np.ascontiguousarray(ay, dtype=np.float64)
    az = np.ascontiguousarray(az, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)

    cdef Py_ssize_t nx = ax.shape[0], ny = ay.shape[0], nz = az.shape[0]
    wx = _trap(ax)
    wy = _trap(ay)
    wz = _trap(az)
    partial = np.zeros(nx, dtype=np.complex128)

    cdef double[::1] axv = ax, ayv = ay, azv = az
    cdef double[::1] wxv = wx, wyv = wy, wzv = wz
    cdef double complex[::1] pv = partial
    cdef double muv = mu, av = a, mm = m
    cdef double y0 = y[0], y1 = y[1], y2 = y[2]
    cdef double c0 = center[0], c1 = center[1], c2 = center[2]
    cdef double inv4s2 = 1.0 / (4.0 * chi_sigma * chi_sigma)
    cdef double crv = cut_r, cwv = cut_w
    cdef Py_ssize_t i, j, l
    cdef double kx, ky, kz, ksq, kmag, g, dsq, chi, ph, w
    cdef double complex acc

    for i in prange(nx, nogil=True):
        kx = axv[i]
        acc = 0.0
        for j in range(ny):
            ky = ayv[j]
            w = wyv[j]
            for l in range(nz):
                kz = azv[l]
                dsq = (kx - c0) ** 2 + (ky - c1) ** 2 + (kz - c2) ** 2
                if dsq > crv * crv:
                    continue
                ksq = kx * kx + ky * ky + kz * kz
                kmag = sqrt(ksq)
                g = sqrt(ksq + mm * mm) + av * kmag - (y0 * kx + y1 * ky + y2 * kz)
                chi = exp(-dsq * inv4s2) * _bump(sqrt(dsq), crv, cwv)
                ph = -muv * g
                acc = acc + (w * wzv[l] * chi) * (cos(ph) + 1j * sin(ph))
        pv[i] = wxv[i] * acc

    total = partial.sum()  # fixed order over planes
    return np.asarray(coef, dtype=np.complex128) * total


def _trap(axis):
    h = axis[1] - axis[0] if axis.size > 1 else 1.0
    w = np.full(axis.size, h)
    if axis.size > 1:
        w[0] *= 0.5
        w[-1] *= 0.5
    return w


def trilinear(field, lo, h, pts):
    field = np.ascontiguousarray(field, dtype=np.complex128)
    pts = np.ascontiguousarray(np.atleast_2d(pts), dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)

    cdef Py_ssize_t P = pts.shape[0], C = field.shape[3]
    out = np.zeros((P, C), dtype=np.complex128)

    cdef double complex[:, :, :, ::1] fv = field
    cdef double[:, ::1] xv = pts
    cdef double complex[:, ::1] ov = out
    cdef double l0 = lo[0], l1 = lo[1], l2 = lo[2], hh = h
    cdef Py_ssize_t n0 = field.shape[0], n1 = field.shape[1], n2 = field.shape[2]
    cdef Py_ssize_t p, c, i0, i1, i2
    cdef double r0, r1, r2, f0, f1, f2, w

    for p in prange(P, nogil=True):
        r0 = (xv[p, 0] - l0) / hh
        r1 = (xv[p, 1] - l1) / hh
        r2 = (xv[p, 2] - l2) / hh
        i0 = <Py_ssize_t> r0
        i1 = <Py_ssize_t> r1
        i2 = <Py_ssize_t> r2
        if i0 < 0:
            i0 = 0
        if i0 > n0 - 2:
            i0 = n0 - 2
        if i1 < 0:
            i1 = 0
        if i1 > n1 - 2:
            i1 = n1 - 2
        if i2 < 0:
            i2 = 0
        if i2 > n2 - 2:
            i2 = n2 - 2
        f0 = r0 - i0
        f1 = r1 - i1
        f2 = r2 - i2
        for c in range(C):
            ov[p, c] = (
                (1 - f0) * (1 - f1) * (1 - f2) * fv[i0, i1, i2, c]
                + f0 * (1 - f1) * (1 - f2) * fv[i0 + 1, i1, i2, c]
                + (1 - f0) * f1 * (1 - f2) * fv[i0, i1 + 1, i2, c]
                + (1 - f0) * (1 - f1) * f2 * fv[i0, i1, i2 + 1, c]
                + f0 * f1 * (1 - f2) * fv[i0 + 1, i1 + 1, i2, c]
                + f0 * (1 - f1) * f2 * fv[i0 + 1, i1, i2 + 1, c]
                + (1 - f0) * f1 * f2 * fv[i0, i1 + 1, i2 + 1, c]
                + f0 * f1 * f2 * fv[i0 + 1, i1 + 1, i2 + 1, c]
            )
    return out
