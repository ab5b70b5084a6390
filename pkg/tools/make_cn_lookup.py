"""Regenerate the color-name lookup table shipped in src/darktrack/data/.

The table maps each of the 32*32*32 quantized RGB bins to a probability
distribution over 10 linguistic color names (alphabetical channel order,
see darktrack.features.COLOR_NAMES).  Probabilities are a softmax over the
squared distance from the bin center to the nearest anchor of each name,
so every row is a simplex by construction.

Run from the repository root:

    python tools/make_cn_lookup.py
"""

import pathlib

import numpy as np

# Anchor points in [0,1]^3 RGB for each color name. Several anchors per
# name cover the lightness range the name spans in everyday usage.
ANCHORS = {
    "black": [(0.0, 0.0, 0.0), (0.10, 0.10, 0.10), (0.08, 0.06, 0.12)],
    "blue": [(0.0, 0.0, 1.0), (0.10, 0.30, 0.80), (0.25, 0.45, 0.95), (0.0, 0.05, 0.55)],
    "gray": [(0.50, 0.50, 0.50), (0.35, 0.35, 0.35), (0.65, 0.65, 0.65)],
    "green": [(0.0, 0.80, 0.0), (0.10, 0.50, 0.15), (0.35, 0.70, 0.30), (0.0, 0.40, 0.05)],
    "orange": [(1.0, 0.55, 0.0), (0.95, 0.65, 0.20), (0.80, 0.45, 0.05), (0.65, 0.35, 0.05)],
    "pink": [(1.0, 0.70, 0.80), (0.95, 0.55, 0.70), (0.90, 0.75, 0.80)],
    "purple": [(0.55, 0.10, 0.70), (0.50, 0.0, 0.50), (0.70, 0.40, 0.85), (0.35, 0.10, 0.45)],
    "red": [(1.0, 0.0, 0.0), (0.80, 0.10, 0.10), (0.60, 0.05, 0.10)],
    "white": [(1.0, 1.0, 1.0), (0.88, 0.88, 0.88)],
    "yellow": [(1.0, 1.0, 0.0), (0.85, 0.85, 0.20), (0.95, 0.90, 0.40)],
}

SOFTNESS = 0.15  # kernel width of the soft assignment


def build_table():
    names = sorted(ANCHORS)
    levels = (np.arange(32) + 0.5) / 32.0
    r, g, b = np.meshgrid(levels, levels, levels, indexing="ij")
    centers = np.stack([r.ravel(), g.ravel(), b.ravel()], axis=1)  # (32768, 3)

    logits = np.empty((centers.shape[0], len(names)))
    for i, name in enumerate(names):
        anchors = np.asarray(ANCHORS[name])
        d2 = ((centers[:, None, :] - anchors[None, :, :]) ** 2).sum(axis=2)
        logits[:, i] = -d2.min(axis=1) / (2.0 * SOFTNESS**2)

    logits -= logits.max(axis=1, keepdims=True)
    probs = np.exp(logits)
    probs /= probs.sum(axis=1, keepdims=True)
    return names, probs.astype(np.float32)


def main():
    names, table = build_table()
    out = pathlib.Path(__file__).resolve().parents[1] / "src" / "darktrack" / "data"
    out.mkdir(parents=True, exist_ok=True)
    np.save(out / "cn_lookup.npy", table)
    print("wrote", out / "cn_lookup.npy", table.shape, "channels:", ", ".join(names))


if __name__ == "__main__":
    main()
