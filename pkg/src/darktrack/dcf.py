"""Ridge-regression correlation filter in the Fourier domain: closed-form
training, exponential running updates, PCA channel compression with an
orthonormal projection refreshed from the running template, and detection
with subpixel peak refinement.

The model stores its numerator/denominator in whatever channel space the
training samples were given in; the tracker keeps them compressed and
retains the uncompressed template solely to refresh the projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import dft, signed_index, spectral_response


@dataclass
class LinearFilterModel:
    num: np.ndarray  # (m, n, d) complex numerator
    den: np.ndarray  # (m, n) real denominator field
    mu: np.ndarray  # (m, n, D) uncompressed running template
    label_dft: np.ndarray  # (m, n) complex spectrum of the regression target
    lam: float
    eta: float

    @property
    def grid(self):
        return self.den.shape

    def clone(self) -> "LinearFilterModel":
        return LinearFilterModel(
            self.num.copy(), self.den.copy(), self.mu.copy(), self.label_dft, self.lam, self.eta
        )


def _power_spectrum(X: np.ndarray) -> np.ndarray:
    return np.sum(X.real**2 + X.imag**2, axis=2)


def train_initial(x: np.ndarray, label_dft: np.ndarray, lam: float, eta: float = 0.025) -> LinearFilterModel:
    """Closed-form filter from a single sample: numerator conj(Y) X per
    channel, denominator the total power spectrum."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    X = dft(x)
    num = np.conj(label_dft)[:, :, None] * X
    return LinearFilterModel(num=num, den=_power_spectrum(X), mu=x.copy(), label_dft=label_dft, lam=lam, eta=eta)


def update_model(model: LinearFilterModel, x: np.ndarray) -> LinearFilterModel:
    """Exponential blend of numerator, denominator and template toward the
    new sample.  Mutates and returns the model."""
    if x.shape != model.mu.shape or x.shape[2] != model.num.shape[2]:
        raise ValueError(f"sample shape {x.shape} does not match model template {model.mu.shape}")
    eta = model.eta
    X = dft(x)
    model.num *= 1.0 - eta
    model.num += eta * np.conj(model.label_dft)[:, :, None] * X
    model.den *= 1.0 - eta
    model.den += eta * _power_spectrum(X)
    model.mu *= 1.0 - eta
    model.mu += eta * x
    return model


def compute_projection(mu: np.ndarray, d: int) -> np.ndarray:
    """Top-d principal directions of the template channels (pixels as
    observations, no centering), rows re-orthonormalized by QR: (d, D)."""
    depth = mu.shape[-1]
    if not 1 <= d <= depth:
        raise ValueError(f"d must lie in [1, {depth}], got {d}")
    flat = mu.reshape(-1, depth)
    _, _, vt = np.linalg.svd(flat, full_matrices=False)
    if vt.shape[0] < d:
        raise ValueError(f"template rank {vt.shape[0]} cannot support {d} projection rows")
    q, _ = np.linalg.qr(vt[:d].T)
    return np.ascontiguousarray(q.T)


def compress(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Project channels: (..., D) -> (..., d)."""
    if x.shape[-1] != p.shape[1]:
        raise ValueError(f"feature depth {x.shape[-1]} does not match projection {p.shape}")
    return x @ p.T


def train_compressed(x: np.ndarray, label_dft: np.ndarray, lam: float, eta: float, d: int):
    """Initial compressed model: projection from the first sample, filter
    learned in the projected space, raw template retained."""
    p = compute_projection(x, d)
    model = train_initial(compress(x, p), label_dft, lam, eta)
    model.mu = x.copy()
    return model, p


def blend_template(model: LinearFilterModel, x: np.ndarray) -> None:
    """Per-frame template average; the filter itself is refreshed separately."""
    model.mu *= 1.0 - model.eta
    model.mu += model.eta * x


def refresh_projection(model: LinearFilterModel, x: np.ndarray, d: int) -> np.ndarray:
    """Interval update of the compressed filter: recompute the projection
    from the running template, rebuild the numerator from the projected
    template (which carries the exponential average), and blend the
    denominator with the projected power spectrum of the newest sample."""
    p = compute_projection(model.mu, d)
    model.num = np.conj(model.label_dft)[:, :, None] * dft(compress(model.mu, p))
    model.den *= 1.0 - model.eta
    model.den += model.eta * _power_spectrum(dft(compress(x, p)))
    return p


def rebuild(model: LinearFilterModel, p: np.ndarray) -> None:
    """Re-derive numerator and denominator directly from the template under
    a given projection (used when an externally shared projection moves)."""
    Xc = dft(compress(model.mu, p))
    model.num = np.conj(model.label_dft)[:, :, None] * Xc
    model.den = _power_spectrum(Xc)


def _parabolic_offset(lo: float, mid: float, hi: float) -> float:
    den = lo - 2.0 * mid + hi
    if abs(den) < 1e-12:
        return 0.0
    return float(np.clip(0.5 * (lo - hi) / den, -0.5, 0.5))


def detect(model: LinearFilterModel, p: np.ndarray | None, z: np.ndarray):
    """Correlate a test sample against the filter.

    z is given uncompressed; it is projected with p unless p is None (model
    trained on raw channels).  Returns the response map, the subpixel peak
    displacement (dy, dx) in cells with circular sign decoding, and the
    response value at the discrete argmax.
    """
    zc = compress(z, p) if p is not None else z
    if zc.shape[-1] != model.num.shape[2]:
        raise ValueError(f"sample depth {zc.shape[-1]} does not match filter {model.num.shape[2]}")
    response = spectral_response(model.num, model.den, dft(zc), model.lam)
    m, n = response.shape
    i, j = np.unravel_index(int(np.argmax(response)), response.shape)
    r_max = float(response[i, j])
    dy = signed_index(i, m) + _parabolic_offset(
        response[(i - 1) % m, j], response[i, j], response[(i + 1) % m, j]
    )
    dx = signed_index(j, n) + _parabolic_offset(
        response[i, (j - 1) % n], response[i, j], response[i, (j + 1) % n]
    )
    return response, (dy, dx), r_max
