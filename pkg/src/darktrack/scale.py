"""One-dimensional scale filter over a patch pyramid.

Seventeen patches at geometric size steps around the current estimate are
reduced to HOG columns; a 1-D correlation filter over the scale axis scores
them and the score vector is upsampled trigonometrically to 33 samples for
sub-step scale resolution.  Rows are kept in circular order (row i holds the
signed exponent decode of i) so a scale change of a^k shifts the pyramid by
k rows and the response argmax reads off k directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import features
from .dcf import compress, compute_projection
from .imgproc import BoundingBox, extract_patch
from .spectral import dft1, gaussian_label_1d, idft1, signed_index, spectral_response_1d

SCALE_TEMPLATE = (32, 32)  # pixels; HOG cell 4 -> 8x8 cells
SCALE_MIN_PATCH = 8  # pixels, smallest pyramid level side
SCALE_BOUNDS = (0.2, 5.0)  # clamp on current_scale relative to the initial size


@dataclass
class ScaleModel:
    num: np.ndarray  # (N, d) complex
    den: np.ndarray  # (N,) real
    mu: np.ndarray  # (N, D_s) uncompressed template
    proj: np.ndarray  # (d, D_s)
    label_dft: np.ndarray  # (N,) complex
    window: np.ndarray  # (N,) Hann over the exponent axis, circular order
    lam: float
    eta: float
    n_scales: int
    n_interp: int
    step: float
    current_scale: float = 1.0
    d: int = field(default=0)


def scale_exponents(n_scales: int) -> np.ndarray:
    """Signed exponent for each pyramid row: 0, 1, ..., 8, -8, ..., -1."""
    return np.array([signed_index(i, n_scales) for i in range(n_scales)])


def _scale_window(n_scales: int) -> np.ndarray:
    hann = np.hanning(n_scales)
    exps = scale_exponents(n_scales)
    return hann[exps + (n_scales - 1) // 2]


def build_scale_pyramid(img: np.ndarray, bb: BoundingBox, model: ScaleModel) -> np.ndarray:
    """HOG columns for patches of size step^n * (w, h), windowed over the
    scale axis: (N, D_s)."""
    exps = scale_exponents(model.n_scales)
    cols = []
    for e in exps:
        f = model.step**e
        sw = max(SCALE_MIN_PATCH, int(round(f * bb.w)))
        sh = max(SCALE_MIN_PATCH, int(round(f * bb.h)))
        patch = extract_patch(img, BoundingBox.from_center(bb.cx, bb.cy, sw, sh), 1.0, SCALE_TEMPLATE)
        cols.append(features.hog(patch).ravel())
    return np.stack(cols, axis=0) * model.window[:, None]


def train_scale(
    img: np.ndarray,
    bb: BoundingBox,
    lam: float,
    eta: float,
    n_scales: int = 17,
    n_interp: int = 33,
    step: float = 1.02,
    sigma_factor: float = 1.0 / 16.0,
) -> ScaleModel:
    label = gaussian_label_1d(n_scales, sigma_factor * n_scales)
    model = ScaleModel(
        num=np.zeros(0),
        den=np.zeros(0),
        mu=np.zeros(0),
        proj=np.zeros(0),
        label_dft=np.fft.fft(label),
        window=_scale_window(n_scales),
        lam=lam,
        eta=eta,
        n_scales=n_scales,
        n_interp=n_interp,
        step=step,
    )
    pyramid = build_scale_pyramid(img, bb, model)
    model.mu = pyramid.copy()
    model.d = min(n_scales, pyramid.shape[1])
    model.proj = compute_projection(pyramid, model.d)
    xc = dft1(compress(pyramid, model.proj))
    model.num = np.conj(model.label_dft)[:, None] * xc
    model.den = np.sum(xc.real**2 + xc.imag**2, axis=1)
    return model


def interpolate_scores(scores: np.ndarray, n_interp: int):
    """Trigonometric upsampling of the N circular scores onto a half-step
    exponent grid covering the same range with n_interp points.  Returns
    (exponents, values); the original samples reappear exactly."""
    n = scores.size
    if n_interp != 2 * n - 1:
        raise ValueError(f"interpolation target must be {2 * n - 1} for {n} scales")
    spec = np.fft.fft(scores)
    padded = np.zeros(2 * n, dtype=complex)
    half = (n + 1) // 2
    padded[:half] = spec[:half]
    padded[-(n - half):] = spec[half:]
    dense = np.fft.ifft(padded).real * 2.0
    # positions k/2 for k in [0, 2n); drop the lone half-step between the
    # extreme exponents so the range stays [-(n-1)/2, (n-1)/2]
    ks = np.concatenate([np.arange(0, n), np.arange(n + 1, 2 * n)])
    exps = np.where(ks <= n - 1, ks / 2.0, ks / 2.0 - n)
    return exps, dense[ks]


def estimate_scale(model: ScaleModel, pyramid: np.ndarray):
    """Score the pyramid, upsample, and fold the winning exponent into the
    current scale.  Returns (multiplier, peak score)."""
    if model.num.size == 0:
        raise ValueError("scale model is untrained")
    zc = dft1(compress(pyramid, model.proj))
    scores = spectral_response_1d(model.num, model.den, zc, model.lam)
    exps, vals = interpolate_scores(scores, model.n_interp)
    best = int(np.argmax(vals))
    multiplier = float(model.step ** exps[best])
    lo, hi = SCALE_BOUNDS
    model.current_scale = float(np.clip(model.current_scale * multiplier, lo, hi))
    return multiplier, float(vals[best])


def blend_scale_template(model: ScaleModel, pyramid: np.ndarray) -> None:
    model.mu *= 1.0 - model.eta
    model.mu += model.eta * pyramid


def refresh_scale(model: ScaleModel, pyramid: np.ndarray) -> None:
    """Interval update mirroring the translation filter: new projection from
    the template, numerator from the projected template, denominator blended
    with the newest sample's power."""
    model.proj = compute_projection(model.mu, model.d)
    mc = dft1(compress(model.mu, model.proj))
    model.num = np.conj(model.label_dft)[:, None] * mc
    zc = dft1(compress(pyramid, model.proj))
    model.den *= 1.0 - model.eta
    model.den += model.eta * np.sum(zc.real**2 + zc.imag**2, axis=1)


def update_scale(model: ScaleModel, pyramid: np.ndarray) -> ScaleModel:
    """Template blend plus filter refresh in one step."""
    blend_scale_template(model, pyramid)
    refresh_scale(model, pyramid)
    return model
