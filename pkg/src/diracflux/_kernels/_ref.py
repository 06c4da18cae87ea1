"""Pure-NumPy reference implementations of the hot kernels.

The compiled module ``_fast`` mirrors these signatures; results agree to
rounding.  Sums are accumulated in fixed chunk order so the output does not
depend on thread count (this path is single-threaded anyway).
"""

import numpy as np

IMPL_NAME = "numpy"

_CHUNK = 262144  # nodes per accumulation chunk


def _smoothstep_down(s):
    """C-infinity step: 1 for s <= 0, 0 for s >= 1, monotone in between."""
    out = np.empty_like(s)
    lo = s <= 0.0
    hi = s >= 1.0
    mid = ~(lo | hi)
    out[lo] = 1.0
    out[hi] = 0.0
    sm = s[mid]
    a = np.exp(-1.0 / (1.0 - sm))
    b = np.exp(-1.0 / sm)
    out[mid] = a / (a + b)
    return out


def bump_radial(r, cut_r, cut_w):
    """Radial C-infinity cutoff: 1 inside cut_r - cut_w, 0 beyond cut_r.

    Preserves the input shape (scalars come back as 0-d values)."""
    r = np.asarray(r, float)
    shape = r.shape
    r = np.atleast_1d(r)
    if cut_w <= 0.0:
        out = (r <= cut_r).astype(float)
    else:
        out = _smoothstep_down((r - (cut_r - cut_w)) / cut_w)
    return out.reshape(shape)


def gauss_phi_avg(kc, u, phis, rot, k0, sigma, norm, mix1, mix2, m):
    """Azimuth-averaged Gaussian-packet amplitude on a (k, cos-theta) grid.

    The momentum vectors are kc[i] * rot @ (st*cos(phi), st*sin(phi), u[q]);
    the packet is psi_hat(k) = norm * exp(-|k-k0|^2/(4 sigma^2)) *
    (mix1 s1_k + mix2 s2_k).  Returns the phi-average, shape (nk, nu, 4).
    """
    kc = np.asarray(kc, float)
    u = np.asarray(u, float)
    phis = np.asarray(phis, float)
    st = np.sqrt(np.maximum(0.0, 1.0 - u * u))
    # global-frame directions, shape (nu, nphi, 3)
    local = np.stack(
        [
            st[:, None] * np.cos(phis)[None, :],
            st[:, None] * np.sin(phis)[None, :],
            np.broadcast_to(u[:, None], (u.size, phis.size)),
        ],
        axis=-1,
    )
    dirs = local @ np.asarray(rot, float).T
    inv4s2 = 1.0 / (4.0 * sigma * sigma)
    k0 = np.asarray(k0, float)
    k0sq = float(k0 @ k0)
    g = dirs @ k0  # (nu, nphi)

    nk, nu = kc.size, u.size
    out = np.zeros((nk, nu, 4), dtype=complex)
    Ek = np.sqrt(kc * kc + m * m)
    Eh = Ek + m
    scale = 1.0 / np.sqrt(2.0 * Ek * Eh)
    for i in range(nk):
        k = kc[i]
        f = norm * np.exp(-(k * k + k0sq - 2.0 * k * g) * inv4s2)  # (nu, nphi)
        k1 = k * dirs[..., 0]
        kp = k * (dirs[..., 1] + 1j * dirs[..., 2])
        km = np.conj(kp)
        c0 = (mix1 * Eh[i]) * f
        c1 = (mix2 * Eh[i]) * f
        c2 = f * (mix1 * k1 + mix2 * km)
        c3 = f * (mix1 * kp - mix2 * k1)
        avg = np.stack([c0.mean(axis=1), c1.mean(axis=1),
                        c2.mean(axis=1), c3.mean(axis=1)], axis=-1)
        out[i] = avg * scale[i]
    return out


def plane_sum(points, times, nodes, weights, psihat, m):
    """sum_n w_n exp(i (k_n . x_p - E_n t_p)) psihat_n for each point p.

    Shapes: points (P, 3), times (P,), nodes (N, 3), weights (N,),
    psihat (N, 4); returns (P, 4) complex.  No (2 pi)^{-3/2} prefactor.
    """
    points = np.atleast_2d(np.asarray(points, float))
    times = np.atleast_1d(np.asarray(times, float))
    nodes = np.asarray(nodes, float)
    weights = np.asarray(weights, float)
    psihat = np.asarray(psihat, complex)
    En = np.sqrt(np.sum(nodes * nodes, axis=1) + m * m)
    wpsi = weights[:, None] * psihat
    out = np.zeros((points.shape[0], 4), dtype=complex)
    for p in range(points.shape[0]):
        acc = np.zeros(4, dtype=complex)
        for s in range(0, nodes.shape[0], _CHUNK):
            e = slice(s, s + _CHUNK)
            phase = np.exp(1j * (nodes[e] @ points[p] - En[e] * times[p]))
            acc += phase @ wpsi[e]
        out[p] = acc
    return out


def osc_gauss_sum(ax, ay, az, mu, a, y, m, center, chi_sigma, cut_r, cut_w, coef):
    """Brute-force oscillatory sum over a cartesian lattice.

    Integrand: exp(-i mu g(k)) * coef * exp(-|k-c|^2/(4 sigma^2)) * bump(|k-c|)
    with g(k) = sqrt(k^2+m^2) + a|k| - y.k; trapezoid weights per axis.
    Returns the weighted (4,) complex sum.
    """
    ax = np.asarray(ax, float)
    ay = np.asarray(ay, float)
    az = np.asarray(az, float)
    y = np.asarray(y, float)
    center = np.asarray(center, float)
    coef = np.asarray(coef, complex)

    wx = _trap_weights(ax)
    wy = _trap_weights(ay)
    wz = _trap_weights(az)
    KY, KZ = np.meshgrid(ay, az, indexing="ij")
    wyz = np.outer(wy, wz)
    inv4s2 = 1.0 / (4.0 * chi_sigma * chi_sigma)

    acc = 0.0 + 0.0j
    for i, kx in enumerate(ax):
        ksq = kx * kx + KY * KY + KZ * KZ
        kmag = np.sqrt(ksq)
        g = np.sqrt(ksq + m * m) + a * kmag - (y[0] * kx + y[1] * KY + y[2] * KZ)
        dsq = (kx - center[0]) ** 2 + (KY - center[1]) ** 2 + (KZ - center[2]) ** 2
        r = np.sqrt(dsq)
        chi = np.exp(-dsq * inv4s2) * bump_radial(r, cut_r, cut_w)
        acc += wx[i] * np.sum(wyz * chi * np.exp(-1j * mu * g))
    return coef * acc


def _trap_weights(axis):
    h = axis[1] - axis[0] if axis.size > 1 else 1.0
    w = np.full(axis.size, h)
    if axis.size > 1:
        w[0] *= 0.5
        w[-1] *= 0.5
    return w


def trilinear(field, lo, h, pts):
    """Trilinear interpolation of a (n1, n2, n3, C) complex field at pts (P, 3)."""
    field = np.asarray(field)
    pts = np.atleast_2d(np.asarray(pts, float))
    n = np.array(field.shape[:3])
    rel = (pts - np.asarray(lo, float)) / h
    i0 = np.clip(np.floor(rel).astype(int), 0, n - 2)
    f = rel - i0
    out = np.zeros((pts.shape[0], field.shape[3]), dtype=field.dtype)
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                w = (
                    (f[:, 0] if dx else 1.0 - f[:, 0])
                    * (f[:, 1] if dy else 1.0 - f[:, 1])
                    * (f[:, 2] if dz else 1.0 - f[:, 2])
                )
                out += w[:, None] * field[i0[:, 0] + dx, i0[:, 1] + dy, i0[:, 2] + dz]
    return out


def set_num_threads(n):
    """Single-threaded reference path; BLAS threads are capped by the CLI."""
