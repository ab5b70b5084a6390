"""Fourier-domain primitives shared by the translation, scale and long-term
filters: per-channel DFTs, Gaussian regression labels, and the correlation
response evaluated as a spectral ratio.

Conventions: unnormalized forward transform, 1/(mn) inverse (numpy default),
transforms over the leading two axes so trailing channel axes pass through.
Labels place their peak at index (0, 0) so a response argmax reads directly
as a circular displacement.
"""

from __future__ import annotations

import numpy as np


def dft(x: np.ndarray) -> np.ndarray:
    """Per-channel 2-D DFT over axes (0, 1)."""
    return np.fft.fft2(x, axes=(0, 1))


def idft(X: np.ndarray) -> np.ndarray:
    """Inverse of dft.  Keeps the complex result; callers take .real when the
    input is known conjugate-symmetric."""
    return np.fft.ifft2(X, axes=(0, 1))


def dft1(x: np.ndarray) -> np.ndarray:
    """Per-channel 1-D DFT over axis 0 (scale-filter layout: scales x dims)."""
    return np.fft.fft(x, axis=0)


def idft1(X: np.ndarray) -> np.ndarray:
    return np.fft.ifft(X, axis=0)


def _centered_offsets(n: int) -> np.ndarray:
    """Signed circular distance of each index from the origin: 0, 1, ...,
    then negative values wrapping around."""
    return (np.arange(n) + n // 2) % n - n // 2


def signed_index(i: int, n: int) -> int:
    """Map a circular index in [0, n) to its signed displacement from 0."""
    return int(i) - n if i > n // 2 else int(i)


def gaussian_label(m: int, n: int, sigma: float) -> np.ndarray:
    """Gaussian regression target of shape (m, n), peak value 1 at (0, 0),
    wrapping circularly so shifted copies of the template map to shifted
    peaks."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    du = _centered_offsets(m)[:, None]
    dv = _centered_offsets(n)[None, :]
    return np.exp(-(du**2 + dv**2) / (2.0 * sigma**2))


def gaussian_label_1d(n: int, sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d = _centered_offsets(n)
    return np.exp(-(d**2) / (2.0 * sigma**2))


def spectral_response(A: np.ndarray, B: np.ndarray, Z: np.ndarray, lam: float) -> np.ndarray:
    """Correlation response: real part of idft(sum_l conj(A^l) Z^l / (B + lam)).

    A and Z share shape (m, n, d); B is the real (m, n) denominator field.
    """
    if A.shape != Z.shape:
        raise ValueError(f"numerator/sample grid mismatch: {A.shape} vs {Z.shape}")
    if B.shape != A.shape[:2]:
        raise ValueError(f"denominator grid mismatch: {B.shape} vs {A.shape[:2]}")
    num = np.sum(np.conj(A) * Z, axis=2)
    return idft(num / (B + lam)).real


def spectral_response_1d(A: np.ndarray, B: np.ndarray, Z: np.ndarray, lam: float) -> np.ndarray:
    """1-D analog over axis 0 for the scale filter: A, Z are (n, d), B is (n,)."""
    if A.shape != Z.shape:
        raise ValueError(f"numerator/sample grid mismatch: {A.shape} vs {Z.shape}")
    num = np.sum(np.conj(A) * Z, axis=1)
    return idft1(num / (B + lam)).real
