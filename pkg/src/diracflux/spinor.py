"""Dirac matrix algebra, positive-energy spinors and the 4-flux.

Conventions (c = hbar = 1):
  sigma_1 = diag(1, -1),  sigma_2 = [[0, 1], [1, 0]],  sigma_3 = [[0, -i], [i, 0]]
  alpha_l = [[0, sigma_l], [sigma_l, 0]],  beta = diag(1, 1, -1, -1)

The free Hamiltonian is H0 = -i alpha.grad + beta m; its positive-energy
eigenvectors at momentum k are the two spinors returned by
``positive_spinors``, orthonormal under the spin-space inner product
``sdot`` (conjugation on the first argument).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DiracMatrixSet",
    "SpinorBasisPair",
    "FluxVector",
    "dirac_matrices",
    "positive_spinors",
    "spinor_components",
    "sdot",
    "snorm",
    "flux",
    "energy",
]


@dataclass(frozen=True)
class DiracMatrixSet:
    alpha1: np.ndarray
    alpha2: np.ndarray
    alpha3: np.ndarray
    beta: np.ndarray

    @property
    def alphas(self):
        return (self.alpha1, self.alpha2, self.alpha3)

    def alpha_dot(self, v):
        """alpha . v for a 3-vector v (entries may be arrays)."""
        return self.alpha1 * v[0] + self.alpha2 * v[1] + self.alpha3 * v[2]


@dataclass(frozen=True)
class SpinorBasisPair:
    """Normalized positive-energy spinors s1, s2 at momentum k."""

    s1: np.ndarray
    s2: np.ndarray
    k: np.ndarray
    m: float
    E_k: float
    Ehat_k: float


@dataclass(frozen=True)
class FluxVector:
    j0: float
    j: np.ndarray  # spatial 3-vector


_SIGMA = (
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
)


def dirac_matrices() -> DiracMatrixSet:
    """Return (alpha_1, alpha_2, alpha_3, beta) in the representation above."""
    alphas = []
    for s in _SIGMA:
        a = np.zeros((4, 4), dtype=complex)
        a[:2, 2:] = s
        a[2:, :2] = s
        alphas.append(a)
    beta = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
    return DiracMatrixSet(alphas[0], alphas[1], alphas[2], beta)


def energy(kmag, m):
    """E_k = sqrt(k^2 + m^2); kmag may be an array."""
    return np.sqrt(np.asarray(kmag) ** 2 + m * m)


def sdot(phi, chi):
    """Spin-space inner product <phi, chi>, conjugating the first argument.

    Works on stacked spinors: the last axis (length 4) is contracted.
    """
    return np.sum(np.conj(phi) * chi, axis=-1)


def snorm(phi):
    """Scalar norm ||phi||_s = sqrt(<phi, phi>)."""
    return np.sqrt(np.real(sdot(phi, phi)))


def spinor_components(kvecs, m):
    """Normalized s1, s2 for an array of momenta ``kvecs`` of shape (..., 3).

    Returns two complex arrays of shape (..., 4).  Regular at k = 0.
    """
    kvecs = np.asarray(kvecs, dtype=float)
    k1, k2, k3 = kvecs[..., 0], kvecs[..., 1], kvecs[..., 2]
    kk = np.sqrt(k1 * k1 + k2 * k2 + k3 * k3)
    Ek = np.sqrt(kk * kk + m * m)
    Eh = Ek + m
    scale = 1.0 / np.sqrt(2.0 * Ek * Eh)
    kp = k2 + 1j * k3
    km = k2 - 1j * k3
    zero = np.zeros_like(Eh)
    s1 = np.stack([Eh + 0j, zero + 0j, k1 + 0j, kp], axis=-1)
    s2 = np.stack([zero + 0j, Eh + 0j, km, -k1 + 0j], axis=-1)
    return s1 * scale[..., None], s2 * scale[..., None]


def positive_spinors(k, m) -> SpinorBasisPair:
    """Normalized positive-energy spinor pair at momentum ``k`` (3-vector)."""
    if m <= 0.0:
        raise ValueError("mass must be positive")
    k = np.asarray(k, dtype=float)
    s1, s2 = spinor_components(k, m)
    E_k = float(energy(np.linalg.norm(k), m))
    return SpinorBasisPair(s1=s1, s2=s2, k=k, m=float(m), E_k=E_k, Ehat_k=E_k + m)


def flux(psi) -> FluxVector:
    """4-flux (j0, j) of a single spinor value: j0 = <psi,psi>, j_l = <psi, alpha_l psi>."""
    psi = np.asarray(psi, dtype=complex)
    j0 = float(np.real(sdot(psi, psi)))
    jvec = flux_spatial(psi)
    return FluxVector(j0=j0, j=jvec)


def flux_spatial(psi):
    """Spatial flux <psi, alpha psi> for stacked spinors of shape (..., 4).

    Returns a real array of shape (..., 3).  Uses the block structure of the
    alpha matrices instead of explicit 4x4 products.
    """
    psi = np.asarray(psi, dtype=complex)
    a, b, c, d = psi[..., 0], psi[..., 1], psi[..., 2], psi[..., 3]
    # <psi, alpha_l psi> = 2 Re conj(upper) . sigma_l . lower
    j1 = 2.0 * np.real(np.conj(a) * c - np.conj(b) * d)
    j2 = 2.0 * np.real(np.conj(a) * d + np.conj(b) * c)
    j3 = 2.0 * np.real(1j * (np.conj(b) * c - np.conj(a) * d))
    return np.stack([j1, j2, j3], axis=-1)


def flux_density(psi):
    """j0 = <psi,psi> for stacked spinors of shape (..., 4)."""
    return np.real(sdot(psi, psi))
