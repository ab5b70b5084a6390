"""Low-light preprocessing: bounding-box luminance gating, the fast exposure
gain applied during live tracking, and the illumination-map pipeline
(max-channel estimate, structure-aware refinement, recovery) kept as the
quality reference, including the inverted haze-model variant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import cv2
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .imgproc import BoundingBox, mean_luminance


@dataclass
class EnhanceConfig:
    k: float = 1.0  # exposure control
    t_low: float = 48.0  # luminance gate, 0-255 scale
    iterations: int = 1
    beta: float = 0.15  # refinement smoothness weight
    epsilon: float = 0.001
    sigma: float = 2.0  # Gaussian std of the weight-field kernel
    alpha: float = 0.95  # atmospheric light of the inverted model
    solver_tol: float = 1e-6
    solver_maxiter: int = 1000

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")
        if not 0.0 <= self.t_low <= 255.0:
            raise ValueError("t_low must lie in [0, 255]")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def should_enhance(img: np.ndarray, bb: BoundingBox | None, cfg: EnhanceConfig) -> bool:
    """Gate on the box-local mean luminance, strict less-than."""
    return mean_luminance(img, bb) < cfg.t_low


def fast_enhance(img: np.ndarray, bb: BoundingBox | None, cfg: EnhanceConfig) -> np.ndarray:
    """Exposure-compensation gain toward mid-gray, clamped to [1, 8] and
    saturated at white.  The box mean is recomputed each iteration so
    repeated passes converge instead of compounding."""
    out = img.astype(np.float32, copy=True)
    for _ in range(cfg.iterations):
        mu = mean_luminance(out, bb) / 255.0
        gain = np.clip(cfg.k * (128.0 / 255.0) / max(mu, cfg.epsilon), 1.0, 8.0)
        out = np.minimum(out * gain, 1.0)
    return out


def initial_illumination(img: np.ndarray) -> np.ndarray:
    """Per-pixel max over color channels."""
    return img.max(axis=2) if img.ndim == 3 else img.copy()


def _gauss_kernel(sigma: float, size: int = 5) -> np.ndarray:
    half = size // 2
    g1 = np.exp(-(np.arange(-half, half + 1) ** 2) / (2.0 * sigma**2))
    g = np.outer(g1, g1)
    return g / g.sum()


def _forward_diff_h(t: np.ndarray) -> np.ndarray:
    d = np.zeros_like(t)
    d[:, :-1] = t[:, 1:] - t[:, :-1]
    return d


def _forward_diff_v(t: np.ndarray) -> np.ndarray:
    d = np.zeros_like(t)
    d[:-1, :] = t[1:, :] - t[:-1, :]
    return d


def _local_gauss_mean(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Gaussian-weighted mean over the kernel window, renormalized where the
    window is clipped at the image border."""
    num = cv2.filter2D(x, -1, g, borderType=cv2.BORDER_CONSTANT)
    den = cv2.filter2D(np.ones_like(x), -1, g, borderType=cv2.BORDER_CONSTANT)
    return num / den


def build_weights(that: np.ndarray, cfg: EnhanceConfig):
    """Structure-aware weight fields: large where the local Gaussian-averaged
    gradient of the initial map is small, so smoothing concentrates on
    texture rather than on genuine illumination edges."""
    g = _gauss_kernel(cfg.sigma)
    that64 = that.astype(np.float64, copy=False)
    wh = 1.0 / (np.abs(_local_gauss_mean(_forward_diff_h(that64), g)) + cfg.epsilon)
    wv = 1.0 / (np.abs(_local_gauss_mean(_forward_diff_v(that64), g)) + cfg.epsilon)
    return wh, wv


def _diff_operators(h: int, w: int):
    """Sparse forward-difference operators on the flattened row-major grid,
    zero rows on the last column/row (replicated boundary)."""
    n = h * w
    idx = np.arange(n).reshape(h, w)
    rows_h = idx[:, :-1].ravel()
    dh = sp.coo_matrix(
        (
            np.concatenate([-np.ones(rows_h.size), np.ones(rows_h.size)]),
            (np.concatenate([rows_h, rows_h]), np.concatenate([rows_h, rows_h + 1])),
        ),
        shape=(n, n),
    ).tocsr()
    rows_v = idx[:-1, :].ravel()
    dv = sp.coo_matrix(
        (
            np.concatenate([-np.ones(rows_v.size), np.ones(rows_v.size)]),
            (np.concatenate([rows_v, rows_v]), np.concatenate([rows_v, rows_v + w])),
        ),
        shape=(n, n),
    ).tocsr()
    return dh, dv


def refinement_objective(t: np.ndarray, that: np.ndarray, cfg: EnhanceConfig) -> float:
    """The quadratic being minimized: data fidelity plus weighted smoothness
    of the forward gradients."""
    wh, wv = build_weights(that, cfg)
    lam_h = wh / (np.abs(_forward_diff_h(that.astype(np.float64))) + cfg.epsilon)
    lam_v = wv / (np.abs(_forward_diff_v(that.astype(np.float64))) + cfg.epsilon)
    data = float(np.sum((that - t) ** 2))
    smooth = float(np.sum(lam_h * _forward_diff_h(t) ** 2 + lam_v * _forward_diff_v(t) ** 2))
    return data + cfg.beta * smooth


def refine_illumination(that: np.ndarray, cfg: EnhanceConfig, callback=None) -> np.ndarray:
    """Solve (I + beta (Dh' Lh Dh + Dv' Lv Dv)) t = t_hat by conjugate
    gradients; the system is symmetric positive definite by construction.
    ``callback`` receives each CG iterate (for diagnostics)."""
    h, w = that.shape
    that64 = that.astype(np.float64)
    if cfg.beta == 0.0:
        return that64.copy()
    wh, wv = build_weights(that64, cfg)
    lam_h = (wh / (np.abs(_forward_diff_h(that64)) + cfg.epsilon)).ravel()
    lam_v = (wv / (np.abs(_forward_diff_v(that64)) + cfg.epsilon)).ravel()
    dh, dv = _diff_operators(h, w)
    a = sp.eye(h * w, format="csr") + cfg.beta * (
        dh.T @ sp.diags(lam_h) @ dh + dv.T @ sp.diags(lam_v) @ dv
    )
    b = that64.ravel()
    t, info = spla.cg(
        a, b, x0=b.copy(), rtol=cfg.solver_tol, maxiter=cfg.solver_maxiter, callback=callback
    )
    if info > 0:
        warnings.warn(
            f"illumination refinement stopped after {cfg.solver_maxiter} iterations "
            "without reaching tolerance",
            stacklevel=2,
        )
    return np.clip(t.reshape(h, w), cfg.epsilon, 1.0)


def recover(img: np.ndarray, t: np.ndarray, cfg: EnhanceConfig) -> np.ndarray:
    """Divide out the illumination field, per channel."""
    den = (t + cfg.epsilon)[:, :, None] if img.ndim == 3 else t + cfg.epsilon
    return np.clip(img / den, 0.0, 1.0).astype(np.float32)


def lime_enhance(img: np.ndarray, cfg: EnhanceConfig) -> np.ndarray:
    """Full reference path: initial map, refinement, recovery."""
    that = initial_illumination(img)
    t = refine_illumination(that, cfg)
    return recover(img, t, cfg)


def recover_inverted(img: np.ndarray, cfg: EnhanceConfig) -> np.ndarray:
    """Haze-model alternative: treat the inverted image as hazy with
    atmospheric light alpha, giving transmission
    1 - 1/alpha + max_c L^c / alpha and the matching closed-form recovery."""
    if cfg.alpha <= 0 or cfg.alpha > 1:
        raise ValueError("alpha must lie in (0, 1]")
    maxc = img.max(axis=2) if img.ndim == 3 else img
    inv_a = 1.0 / cfg.alpha
    t_tilde = 1.0 - inv_a + maxc * inv_a
    den = t_tilde + cfg.epsilon
    den3 = den[:, :, None] if img.ndim == 3 else den
    r = (img - 1.0 + cfg.alpha) / den3 + (1.0 - cfg.alpha)
    return np.clip(r, 0.0, 1.0).astype(np.float32)
