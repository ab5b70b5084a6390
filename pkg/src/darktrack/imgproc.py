"""Image loading, patch extraction, luminance statistics and windowing.

Images are numpy arrays of shape (H, W, C) with C in {1, 3}, dtype float32
and values in [0, 1].  8-bit files are divided by 255 at the I/O boundary;
color channels are RGB.  Bounding boxes use 0-based pixel coordinates with
(x, y) the top-left corner.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

# ITU-R BT.601 luma weights.
LUMA_R, LUMA_G, LUMA_B = 0.299, 0.587, 0.114

IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png", ".bmp", ".tif", ".tiff")


@dataclass
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    @property
    def cx(self) -> float:
        return self.x + self.w / 2.0

    @property
    def cy(self) -> float:
        return self.y + self.h / 2.0

    def as_tuple(self):
        return (self.x, self.y, self.w, self.h)

    @classmethod
    def from_center(cls, cx, cy, w, h) -> "BoundingBox":
        return cls(cx - w / 2.0, cy - h / 2.0, w, h)


@dataclass
class SequenceHandle:
    frame_paths: list
    ground_truth: list | None

    def __len__(self) -> int:
        return len(self.frame_paths)


def to_float(img8: np.ndarray) -> np.ndarray:
    """Convert an 8-bit array to the internal float32 [0,1] representation."""
    img = img8.astype(np.float32) / 255.0
    if img.ndim == 2:
        img = img[:, :, None]
    return img


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Convert the internal representation back to 8-bit."""
    out = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    if out.ndim == 3 and out.shape[2] == 1:
        out = out[:, :, 0]
    return out


def load_image(path) -> np.ndarray:
    """Read an image file into (H, W, C) float32 RGB (or single-channel)."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FileNotFoundError(f"cannot read image: {path}")
    if raw.ndim == 3 and raw.shape[2] == 4:
        raw = cv2.cvtColor(raw, cv2.COLOR_BGRA2BGR)
    if raw.ndim == 3:
        raw = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    return to_float(raw)


def save_image(path, img: np.ndarray) -> None:
    out = to_uint8(img)
    if out.ndim == 3:
        out = cv2.cvtColor(out, cv2.COLOR_RGB2BGR)
    if not cv2.imwrite(str(path), out):
        raise OSError(f"cannot write image: {path}")


def _numeric_key(path: Path):
    digits = re.findall(r"\d+", path.stem)
    return (int(digits[-1]) if digits else -1, path.name)


def parse_groundtruth_line(line: str) -> BoundingBox:
    parts = [p for p in re.split(r"[,\t ]+", line.strip()) if p]
    if len(parts) < 4:
        raise ValueError(f"malformed ground-truth line: {line!r}")
    x, y, w, h = (float(p) for p in parts[:4])
    return BoundingBox(x, y, w, h)


def load_sequence(directory, gt_one_based: bool = True) -> SequenceHandle:
    """Load an OTB-layout sequence: ``<dir>/img/*`` plus optional
    ``groundtruth_rect.txt`` with one ``x,y,w,h`` line per frame.

    With ``gt_one_based`` the ground-truth corner coordinates are shifted by
    -1 to the internal 0-based convention.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"no such sequence directory: {directory}")
    img_dir = directory / "img"
    if not img_dir.is_dir():
        raise FileNotFoundError(f"missing img/ subdirectory in {directory}")
    frames = sorted(
        (p for p in img_dir.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS),
        key=_numeric_key,
    )
    if not frames:
        raise ValueError(f"zero frames in {img_dir}")

    gt = None
    gt_file = directory / "groundtruth_rect.txt"
    if gt_file.is_file():
        gt = []
        for line in gt_file.read_text().splitlines():
            if not line.strip():
                continue
            box = parse_groundtruth_line(line)
            if gt_one_based:
                box = BoundingBox(box.x - 1.0, box.y - 1.0, box.w, box.h)
            gt.append(box)
        if len(gt) != len(frames):
            warnings.warn(
                f"{directory.name}: {len(frames)} frames but {len(gt)} "
                "ground-truth lines; truncating to the shorter",
                stacklevel=2,
            )
            n = min(len(gt), len(frames))
            frames, gt = frames[:n], gt[:n]
    return SequenceHandle(frame_paths=frames, ground_truth=gt)


def resize(img: np.ndarray, out_size) -> np.ndarray:
    """Bilinear resize to ``out_size`` = (width, height)."""
    w, h = int(out_size[0]), int(out_size[1])
    if img.shape[1] == w and img.shape[0] == h:
        return img
    squeeze = img.ndim == 3 and img.shape[2] == 1
    src = img[:, :, 0] if squeeze else img
    out = cv2.resize(src, (w, h), interpolation=cv2.INTER_LINEAR)
    return out[:, :, None] if squeeze else out


def extract_patch(img: np.ndarray, bb: BoundingBox, padding: float, out_size) -> np.ndarray:
    """Crop ``padding * (w, h)`` around the box center, replicating border
    pixels outside the image, then resize bilinearly to ``out_size`` (w, h).
    """
    h_img, w_img = img.shape[:2]
    crop_w = max(1, int(round(padding * bb.w)))
    crop_h = max(1, int(round(padding * bb.h)))
    x0 = int(round(bb.cx - crop_w / 2.0))
    y0 = int(round(bb.cy - crop_h / 2.0))
    cols = np.clip(np.arange(x0, x0 + crop_w), 0, w_img - 1)
    rows = np.clip(np.arange(y0, y0 + crop_h), 0, h_img - 1)
    patch = img[np.ix_(rows, cols)]
    return resize(patch, out_size)


def luminance(img: np.ndarray) -> np.ndarray:
    """Per-pixel luma on the 0-255 scale."""
    if img.shape[2] == 1:
        return 255.0 * img[:, :, 0]
    return 255.0 * (LUMA_R * img[:, :, 0] + LUMA_G * img[:, :, 1] + LUMA_B * img[:, :, 2])


def mean_luminance(img: np.ndarray, bb: BoundingBox | None = None) -> float:
    """Mean luma over ``bb`` (clipped to the image), or the whole image.

    Falls back to the whole image when the clipped box is empty.
    """
    lum = luminance(img)
    if bb is not None:
        h_img, w_img = lum.shape
        x0 = max(0, int(np.floor(bb.x)))
        y0 = max(0, int(np.floor(bb.y)))
        x1 = min(w_img, int(np.ceil(bb.x + bb.w)))
        y1 = min(h_img, int(np.ceil(bb.y + bb.h)))
        if x1 > x0 and y1 > y0:
            lum = lum[y0:y1, x0:x1]
    return float(lum.mean())


def cosine_window(m: int, n: int) -> np.ndarray:
    """Outer product of 1-D Hann windows, shape (m, n), values in [0, 1]."""
    if m < 2 or n < 2:
        raise ValueError("cosine window needs at least a 2x2 grid")
    return np.outer(np.hanning(m), np.hanning(n)).astype(np.float32)
