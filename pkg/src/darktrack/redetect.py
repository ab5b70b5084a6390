"""Re-detection by an online linear SVM over quantized color histograms.

The hyperplane is trained with closed-form passive-aggressive steps on one
positive box and a ring of hard negatives, and is swept across the whole
frame when tracking confidence collapses.  The sweep scores
histogram-normalized box sums through an integral image, so a full-frame
scan is a handful of array operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import HIST_BINS, HIST_LEVELS, quantized_color_histogram
from .imgproc import BoundingBox

FEATURE_DIM = HIST_BINS + 1  # histogram bins + folded bias

# Negative sampling ring: 8 compass directions at half and full box offsets.
_COMPASS = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
_OFFSET_STEPS = (0.5, 1.0)
MAX_NEGATIVE_OVERLAP = 0.3


@dataclass
class SvmModel:
    h: np.ndarray  # (513,) weights, last entry is the bias
    tau: float = 1.0

    @classmethod
    def zeros(cls, tau: float = 1.0) -> "SvmModel":
        return cls(h=np.zeros(FEATURE_DIM), tau=tau)


def box_overlap(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.w * a.h + b.w * b.h - inter)


def _clipped_region(img: np.ndarray, bb: BoundingBox) -> np.ndarray | None:
    h, w = img.shape[:2]
    x0 = max(0, int(np.floor(bb.x)))
    y0 = max(0, int(np.floor(bb.y)))
    x1 = min(w, int(np.ceil(bb.x + bb.w)))
    y1 = min(h, int(np.ceil(bb.y + bb.h)))
    if x1 <= x0 or y1 <= y0:
        return None
    return img[y0:y1, x0:x1]


def histogram_feature(img: np.ndarray, bb: BoundingBox) -> np.ndarray | None:
    """Histogram of the in-image part of the box with the bias slot appended,
    or None when the box misses the image entirely."""
    region = _clipped_region(img, bb)
    if region is None:
        return None
    v = np.empty(FEATURE_DIM)
    v[:HIST_BINS] = quantized_color_histogram(region)
    v[HIST_BINS] = 1.0
    return v


def sample_batch(img: np.ndarray, bb: BoundingBox) -> list:
    """One positive at the box plus ring negatives whose overlap with the
    box stays at or below the cap; returns (feature, label) pairs."""
    batch = []
    pos = histogram_feature(img, bb)
    if pos is None:
        raise ValueError("positive box lies outside the image")
    batch.append((pos, 1))
    for step in _OFFSET_STEPS:
        for ux, uy in _COMPASS:
            neg = BoundingBox(bb.x + ux * step * bb.w, bb.y + uy * step * bb.h, bb.w, bb.h)
            if box_overlap(neg, bb) > MAX_NEGATIVE_OVERLAP:
                continue
            v = histogram_feature(img, neg)
            if v is not None:
                batch.append((v, -1))
    return batch


def hinge_loss(h: np.ndarray, v: np.ndarray, c: int) -> float:
    return max(0.0, 1.0 - c * float(h @ v))


def pa_update(h: np.ndarray, v: np.ndarray, c: int, tau: float) -> np.ndarray:
    """Passive-aggressive step: move along the hinge gradient just far
    enough, tempered by the proximity term 1/(2 tau)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    loss = hinge_loss(h, v, c)
    if loss == 0.0:
        return h
    grad = -c * v
    step = loss / (float(grad @ grad) + 1.0 / (2.0 * tau))
    return h - step * grad


def train_batch(model: SvmModel, batch: list, epochs: int = 1) -> SvmModel:
    for _ in range(epochs):
        for v, c in batch:
            model.h = pa_update(model.h, v, c, model.tau)
    return model


def _quantized_index_image(img: np.ndarray) -> np.ndarray:
    arr = img if img.ndim == 3 else img[:, :, None]
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    q = np.minimum((arr * HIST_LEVELS).astype(np.intp), HIST_LEVELS - 1)
    return (q[:, :, 0] * HIST_LEVELS + q[:, :, 1]) * HIST_LEVELS + q[:, :, 2]


def scan(img: np.ndarray, model: SvmModel, size) -> tuple:
    """Slide a size-(w, h) window over the frame at a tenth-of-box stride
    and return the best-scoring box with its raw score.

    The histogram score of a window is the box mean of the per-pixel weight
    lookup plus the bias, computed for all windows at once via an integral
    image.  Ties resolve to the smallest row, then column.
    """
    w, h = int(round(size[0])), int(round(size[1]))
    img_h, img_w = img.shape[:2]
    if w > img_w or h > img_h:
        center = BoundingBox.from_center(img_w / 2.0, img_h / 2.0, w, h)
        v = histogram_feature(img, center)
        score = float(model.h @ v) if v is not None else 0.0
        return center, score

    lut = model.h[:HIST_BINS]
    weight_img = lut[_quantized_index_image(img)]
    integral = np.zeros((img_h + 1, img_w + 1))
    np.cumsum(np.cumsum(weight_img, axis=0), axis=1, out=integral[1:, 1:])

    sx = max(1, w // 10)
    sy = max(1, h // 10)
    xs = np.arange(0, img_w - w + 1, sx)
    ys = np.arange(0, img_h - h + 1, sy)
    sums = (
        integral[np.ix_(ys + h, xs + w)]
        - integral[np.ix_(ys, xs + w)]
        - integral[np.ix_(ys + h, xs)]
        + integral[np.ix_(ys, xs)]
    )
    scores = sums / (w * h) + model.h[HIST_BINS]
    iy, ix = np.unravel_index(int(np.argmax(scores)), scores.shape)
    best = BoundingBox(float(xs[ix]), float(ys[iy]), w, h)
    return best, float(scores[iy, ix])
