"""Hand-crafted appearance features: 31-channel HOG, probabilistic Color
Names, their windowed fusion for correlation filters, and the quantized
color histogram consumed by the re-detection SVM.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

HOG_ORIENTATIONS = 18  # signed bins; unsigned bins are pairwise sums (9)
HOG_CHANNELS = 31  # 18 signed + 9 unsigned + 4 texture energies
HOG_TRUNCATION = 0.2
# Weight of the texture channels: 1/sqrt(18), so a fully saturated cell
# contributes comparably across channel groups.
HOG_TEXTURE_WEIGHT = 0.2357
CN_CHANNELS = 10
CN_LEVELS = 32  # lookup table resolution per RGB axis
HIST_LEVELS = 8  # per-channel quantization of the SVM color histogram
HIST_BINS = HIST_LEVELS**3

_cn_table_cache: dict = {}


def load_color_table(path=None) -> np.ndarray:
    """The (32768, 10) RGB-to-color-name probability table.  Loaded once and
    cached; rows are indexed by (q_r*32 + q_g)*32 + q_b with q = floor(32v)
    clipped to 31."""
    key = str(path) if path is not None else "default"
    table = _cn_table_cache.get(key)
    if table is not None:
        return table
    try:
        if path is not None:
            table = np.load(path)
        else:
            ref = resources.files("darktrack").joinpath("data/cn_lookup.npy")
            with resources.as_file(ref) as p:
                table = np.load(p)
    except (OSError, FileNotFoundError) as exc:
        raise RuntimeError(f"color-name lookup table not available: {exc}") from exc
    if table.shape != (CN_LEVELS**3, CN_CHANNELS):
        raise RuntimeError(
            f"color-name table has shape {table.shape}, expected {(CN_LEVELS**3, CN_CHANNELS)}"
        )
    table = np.ascontiguousarray(table, dtype=np.float32)
    _cn_table_cache[key] = table
    return table


def _gradients(img: np.ndarray):
    """Central-difference gradients with replicated edges, per channel."""
    gx = np.empty_like(img)
    gx[:, 1:-1] = img[:, 2:] - img[:, :-2]
    gx[:, 0] = img[:, 1] - img[:, 0]
    gx[:, -1] = img[:, -1] - img[:, -2]
    gy = np.empty_like(img)
    gy[1:-1, :] = img[2:, :] - img[:-2, :]
    gy[0, :] = img[1, :] - img[0, :]
    gy[-1, :] = img[-1, :] - img[-2, :]
    return gx, gy


def _cell_interp(n_pixels: int, cell: int):
    """Bilinear weights from pixel rows/cols onto the cell grid, clamped at
    the grid boundary so every vote lands inside."""
    n_cells = n_pixels // cell
    c = (np.arange(n_pixels) + 0.5) / cell - 0.5
    i0 = np.floor(c).astype(np.intp)
    w1 = c - i0
    i1 = np.clip(i0 + 1, 0, n_cells - 1)
    i0 = np.clip(i0, 0, n_cells - 1)
    return i0, i1, 1.0 - w1, w1


def hog(patch: np.ndarray, cell: int = 4) -> np.ndarray:
    """31-channel HOG on the cell grid (h/cell, w/cell, 31).

    Per pixel the color channel with the strongest gradient votes its
    magnitude into the nearest of 18 signed orientation bins, spread
    bilinearly over the four surrounding cells.  Cell histograms are
    normalized against the four overlapping 2x2 blocks, truncated at 0.2;
    outputs are the averaged signed bins, unsigned (opposite-pair) sums and
    the four per-block gradient energies.
    """
    h, w = patch.shape[:2]
    if h % cell or w % cell:
        raise ValueError(f"patch {h}x{w} not divisible by cell {cell}")
    img = patch if patch.ndim == 3 else patch[:, :, None]
    img = img.astype(np.float64, copy=False)

    gx, gy = _gradients(img)
    mag2 = gx * gx + gy * gy
    pick = np.argmax(mag2, axis=2)
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    gxs = gx[rows, cols, pick]
    gys = gy[rows, cols, pick]
    mag = np.sqrt(mag2[rows, cols, pick])
    theta = np.arctan2(gys, gxs)
    bins = np.rint(theta * (HOG_ORIENTATIONS / (2.0 * np.pi))).astype(np.intp) % HOG_ORIENTATIONS

    hc, wc = h // cell, w // cell
    r0, r1, wr0, wr1 = _cell_interp(h, cell)
    c0, c1, wc0, wc1 = _cell_interp(w, cell)
    hist = np.zeros((hc, wc, HOG_ORIENTATIONS))
    for ri, rw in ((r0, wr0), (r1, wr1)):
        for ci, cw in ((c0, wc0), (c1, wc1)):
            np.add.at(
                hist,
                (ri[:, None] * np.ones_like(cols), np.ones_like(rows) * ci[None, :], bins),
                mag * rw[:, None] * cw[None, :],
            )

    unsigned = hist[:, :, :9] + hist[:, :, 9:]
    energy = np.sum(unsigned**2, axis=2)
    ep = np.pad(energy, 1, mode="edge")
    blocks = np.stack(
        [
            ep[:-2, :-2] + ep[:-2, 1:-1] + ep[1:-1, :-2] + ep[1:-1, 1:-1],
            ep[:-2, 1:-1] + ep[:-2, 2:] + ep[1:-1, 1:-1] + ep[1:-1, 2:],
            ep[1:-1, :-2] + ep[1:-1, 1:-1] + ep[2:, :-2] + ep[2:, 1:-1],
            ep[1:-1, 1:-1] + ep[1:-1, 2:] + ep[2:, 1:-1] + ep[2:, 2:],
        ],
        axis=2,
    )
    norm = 1.0 / np.sqrt(blocks + 1e-10)

    out = np.empty((hc, wc, HOG_CHANNELS), dtype=np.float32)
    t_signed = np.minimum(hist[:, :, :, None] * norm[:, :, None, :], HOG_TRUNCATION)
    t_unsigned = np.minimum(unsigned[:, :, :, None] * norm[:, :, None, :], HOG_TRUNCATION)
    out[:, :, :18] = 0.5 * t_signed.sum(axis=3)
    out[:, :, 18:27] = 0.5 * t_unsigned.sum(axis=3)
    out[:, :, 27:] = HOG_TEXTURE_WEIGHT * t_signed.sum(axis=2)
    return out


def color_names(patch: np.ndarray, cell: int = 4, table: np.ndarray | None = None) -> np.ndarray:
    """Per-pixel 10-channel color-name probabilities, average-pooled to the
    HOG cell grid: (h/cell, w/cell, 10).  Grayscale patches replicate the
    single channel before lookup."""
    h, w = patch.shape[:2]
    if h % cell or w % cell:
        raise ValueError(f"patch {h}x{w} not divisible by cell {cell}")
    if table is None:
        table = load_color_table()
    img = patch if patch.ndim == 3 else patch[:, :, None]
    if img.shape[2] == 1:
        img = np.repeat(img, 3, axis=2)
    q = np.minimum((img * CN_LEVELS).astype(np.intp), CN_LEVELS - 1)
    idx = (q[:, :, 0] * CN_LEVELS + q[:, :, 1]) * CN_LEVELS + q[:, :, 2]
    cn = table[idx]
    hc, wc = h // cell, w // cell
    return cn.reshape(hc, cell, wc, cell, CN_CHANNELS).mean(axis=(1, 3))


def fuse(hog_map: np.ndarray, cn_map: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Concatenate HOG and CN channels and taper with the cosine window."""
    if hog_map.shape[:2] != cn_map.shape[:2]:
        raise ValueError(f"grid mismatch: {hog_map.shape[:2]} vs {cn_map.shape[:2]}")
    fused = np.concatenate([hog_map, cn_map], axis=2)
    if window.shape[:2] != fused.shape[:2]:
        raise ValueError(f"window grid mismatch: {window.shape[:2]} vs {fused.shape[:2]}")
    win = window if window.ndim == 3 else window[:, :, None]
    return (fused * win).astype(np.float32)


def quantized_color_histogram(patch: np.ndarray) -> np.ndarray:
    """Joint 8x8x8 RGB histogram, L1-normalized to a 512-vector."""
    img = patch if patch.ndim == 3 else patch[:, :, None]
    if img.shape[2] == 1:
        img = np.repeat(img, 3, axis=2)
    q = np.minimum((img * HIST_LEVELS).astype(np.intp), HIST_LEVELS - 1)
    idx = (q[:, :, 0] * HIST_LEVELS + q[:, :, 1]) * HIST_LEVELS + q[:, :, 2]
    counts = np.bincount(idx.ravel(), minlength=HIST_BINS).astype(np.float64)
    total = counts.sum()
    if total > 0:
        counts /= total
    return counts
