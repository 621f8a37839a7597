"""Dense complex linear algebra kernels.

Everything downstream (channels, codes, recoveries) works with plain
complex128 numpy arrays.  This module owns the numerically delicate
pieces: spectral decompositions, pseudo powers on a support, polar
decompositions, and the partial trace over the logical index.

Rank decisions use a relative eigenvalue cutoff, ``tol * max(1, |H|)``,
so the same tolerance works across noise strengths.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NegativeSpectrum, NonHermitianInput

HERMITICITY_TOL = 1e-10
RANK_TOL = 1e-10


class SpectralDecomposition(NamedTuple):
    """Eigenvalues in ascending order and the unitary of eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def max_abs(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermitize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (a + a†) / 2."""
    a = np.asarray(a)
    return (a + a.conj().T) / 2.0


def hermitian_eig(h: np.ndarray, tol: float = HERMITICITY_TOL) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Raises NonHermitianInput when the anti-Hermitian part exceeds ``tol``.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {h.shape}")
    residual = max_abs(h - h.conj().T)
    if residual >= tol:
        raise NonHermitianInput(f"|H - H^dag|_max = {residual:.3e} >= {tol:.1e}")
    values, vectors = np.linalg.eigh(hermitize(h))
    return SpectralDecomposition(values, vectors)


def _checked_spectrum(h: np.ndarray, tol: float) -> SpectralDecomposition:
    dec = hermitian_eig(h, tol=max(tol, HERMITICITY_TOL))
    scale = max_abs(dec.values)
    if dec.values.size and dec.values[0] < -tol * max(1.0, scale):
        raise NegativeSpectrum(
            f"min eigenvalue {dec.values[0]:.3e} below -{tol:.1e} * {max(1.0, scale):.3e}"
        )
    return dec


def support_projector(h: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Projector onto the non-null eigenspace of a PSD matrix.

    An eigenvalue counts as zero when it is <= tol * max(1, |H|).
    """
    values, vectors = _checked_spectrum(h, tol)
    cutoff = tol * max(1.0, max_abs(values))
    cols = vectors[:, values > cutoff]
    return cols @ cols.conj().T


def support_rank(h: np.ndarray, tol: float = RANK_TOL) -> int:
    values, _ = _checked_spectrum(h, tol)
    cutoff = tol * max(1.0, max_abs(values))
    return int(np.count_nonzero(values > cutoff))


def psd_power(h: np.ndarray, p: float, tol: float = RANK_TOL) -> np.ndarray:
    """Spectral power of a PSD matrix, taken as a pseudo-power on the support.

    Eigenvalues below the relative cutoff are treated as exact zeros, so for
    negative powers this is the pseudo-inverse power.
    """
    values, vectors = _checked_spectrum(h, tol)
    cutoff = tol * max(1.0, max_abs(values))
    powered = np.zeros_like(values)
    keep = values > cutoff
    powered[keep] = values[keep] ** p
    return (vectors * powered) @ vectors.conj().T


def polar_decompose(a: np.ndarray, tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Polar decomposition a = u s with s = sqrt(a† a) PSD and u unitary.

    The unitary is completed on the null space of s by the SVD, which is
    deterministic for a given input; callers must only rely on u restricted
    to the support of s.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"polar decomposition needs a square matrix, got {a.shape}")
    w, sing, vh = np.linalg.svd(a)
    u = w @ vh
    s = vh.conj().T @ (sing[:, None] * vh)
    return u, hermitize(s)


def partial_trace_logical(m: np.ndarray, d: int, n: int) -> np.ndarray:
    """Trace out the logical index of a (d*n) x (d*n) matrix.

    The composite index is [mu, k] with mu (logical, dimension d) fast and
    k (Kraus, dimension n) slow; returns T[k, l] = sum_mu M[k*d+mu, l*d+mu].
    """
    m = np.asarray(m)
    if m.shape != (d * n, d * n):
        raise DimensionMismatch(f"expected {(d * n, d * n)}, got {m.shape}")
    return np.einsum("kmlm->kl", m.reshape(n, d, n, d))


def min_eigenvalue(h: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part; cheap PSD check helper."""
    return float(np.linalg.eigvalsh(hermitize(h))[0])
