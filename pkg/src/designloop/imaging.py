"""Modality evaluators: mask extraction, shape/color descriptors, palettes.

All functions are pure; images are float RGB in [0, 1] with a near-white
background and masks are boolean foreground maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .catalog import Catalog

SHAPE_DIM = 256
SHAPE_GRID = 16
COLOR_DIM = 4
MODALITIES = ("shape", "color")

# Mask pipeline defaults. The acceptance contract is IoU against ground-truth
# masks, not these values.
CANNY_SIGMA = 1.4
CANNY_LOW = 0.1
CANNY_HIGH = 0.3
EDGE_BLUR_SIGMA = 1.0
BARRIER_LEVEL = 0.05
WHITE_LEVEL = 0.94
MAX_REFINE_STEPS = 6

_CROSS = ndimage.generate_binary_structure(2, 1)  # 4-connectivity


class NoForegroundError(ValueError):
    """Raised when an image segments to an empty foreground."""


@dataclass(frozen=True)
class ModalityEmbedding:
    modality: str
    vector: np.ndarray

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.vector)):
            raise ValueError("embedding entries must be finite")


@dataclass(frozen=True)
class ColorPalette:
    entries: list[tuple[tuple[float, float, float], float]]  # (rgb, weight)
    k: int


# ---------------------------------------------------------------------------
# Color primitives


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Vectorized RGB -> HSV on arrays shaped (..., 3); h, s, v in [0, 1]."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        hc = np.where(
            c > 0,
            np.select(
                [v == r, v == g],
                [(g - b) / c, (b - r) / c + 2.0],
                (r - g) / c + 4.0,
            ),
            0.0,
        )
    h = (hc / 6.0) % 1.0
    return np.stack([h, s, v], axis=-1)


def color_descriptor(image: np.ndarray, mask: np.ndarray) -> ModalityEmbedding:
    """4-D color theme descriptor over foreground pixels.

    Each pixel maps to (s cos h, s sin h, s, v); the hue angle is placed on
    the unit circle and weighted by saturation, which makes gray pixels
    contribute (0, 0, 0, v) without a special case. The descriptor is the
    mean pixel vector.
    """
    pix = image[_require_mask(mask)]
    hsv = rgb_to_hsv(pix)
    ang = hsv[:, 0] * 2.0 * np.pi
    s, v = hsv[:, 1], hsv[:, 2]
    vec = np.stack([s * np.cos(ang), s * np.sin(ang), s, v], axis=1)
    return ModalityEmbedding("color", vec.mean(axis=0))


def channel_dominance(image: np.ndarray, mask: np.ndarray, channel: str) -> float:
    """Mean over foreground of (channel - max of the other two), in [-1, 1]."""
    idx = {"red": 0, "blue": 2}.get(channel)
    if idx is None:
        raise ValueError(f"channel must be 'red' or 'blue', got {channel!r}")
    pix = image[_require_mask(mask)]
    others = np.delete(pix, idx, axis=1).max(axis=1)
    return float((pix[:, idx] - others).mean())


def extract_palette(image: np.ndarray, mask: np.ndarray, k: int, seed: int = 0) -> ColorPalette:
    """Dominant colors by seeded k-means over foreground RGB values.

    k-means++ initialization, Lloyd iterations until centroids move < 1e-6
    or 100 rounds; weights are cluster pixel counts over the total.
    """
    pix = image[_require_mask(mask)].astype(np.float64)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(pix):
        raise ValueError(f"k={k} exceeds foreground pixel count {len(pix)}")
    centers, assign, _ = _lloyd(pix, k, np.random.default_rng(seed))
    counts = np.bincount(assign, minlength=k)
    entries = [
        (tuple(float(c) for c in centers[j]), counts[j] / len(pix)) for j in range(k)
    ]
    return ColorPalette(entries=entries, k=k)


def _lloyd(
    pix: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 100
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Seeded k-means++ plus Lloyd iterations.

    Returns (centers, assignments, per-iteration inertia); the inertia
    sequence is non-increasing, which the tests assert.
    """
    centers = _kmeans_pp_init(pix, k, rng)
    inertia_trace: list[float] = []
    assign = np.zeros(len(pix), dtype=np.intp)
    for _ in range(max_iter):
        d2 = ((pix[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        inertia_trace.append(float(d2[np.arange(len(pix)), assign].sum()))
        new_centers = centers.copy()
        for j in range(k):
            sel = assign == j
            if sel.any():
                new_centers[j] = pix[sel].mean(axis=0)
            else:
                # Re-seed an empty cluster at the point farthest from its center.
                far = d2[np.arange(len(pix)), assign].argmax()
                new_centers[j] = pix[far]
        move = np.abs(new_centers - centers).max()
        centers = new_centers
        if move < 1e-6:
            break
    d2 = ((pix[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    inertia_trace.append(float(d2[np.arange(len(pix)), assign].sum()))
    return centers, assign, inertia_trace


def _kmeans_pp_init(pix: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [pix[rng.integers(len(pix))]]
    for _ in range(1, k):
        d2 = np.min(
            ((pix[:, None, :] - np.asarray(centers)[None, :, :]) ** 2).sum(axis=2), axis=1
        )
        total = d2.sum()
        if total <= 0:
            centers.append(pix[rng.integers(len(pix))])
            continue
        centers.append(pix[rng.choice(len(pix), p=d2 / total)])
    return np.asarray(centers, dtype=np.float64)


# ---------------------------------------------------------------------------
# Shape primitives


def aspect_ratio(mask: np.ndarray) -> float:
    """Foreground bounding-box width divided by height."""
    r0, r1, c0, c1 = _bbox(_require_mask(mask))
    return (c1 - c0 + 1) / (r1 - r0 + 1)


def shape_descriptor(mask: np.ndarray) -> ModalityEmbedding:
    """256-D silhouette descriptor: bbox crop resampled to a 16x16 coverage
    grid (cell value = covered fraction of its source area), row-major."""
    mask = _require_mask(mask)
    r0, r1, c0, c1 = _bbox(mask)
    crop = mask[r0 : r1 + 1, c0 : c1 + 1].astype(np.float64)
    rows = _overlap_weights(crop.shape[0])
    cols = _overlap_weights(crop.shape[1])
    grid = rows @ crop @ cols.T
    return ModalityEmbedding("shape", grid.reshape(-1))


def _overlap_weights(n: int) -> np.ndarray:
    """(SHAPE_GRID, n) matrix of pixel-to-cell overlap fractions (rows sum 1)."""
    w = np.zeros((SHAPE_GRID, n))
    cell = n / SHAPE_GRID
    for i in range(SHAPE_GRID):
        lo, hi = i * cell, (i + 1) * cell
        j0, j1 = int(np.floor(lo)), int(np.ceil(hi))
        for j in range(j0, min(j1, n)):
            w[i, j] = max(0.0, min(hi, j + 1) - max(lo, j))
    return w / cell


def _bbox(mask: np.ndarray) -> tuple[int, int, int, int]:
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return rows[0], rows[-1], cols[0], cols[-1]


def _require_mask(mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise NoForegroundError("empty foreground mask")
    return mask


# ---------------------------------------------------------------------------
# Mask pipeline


def compute_mask(
    image: np.ndarray,
    canny_sigma: float = CANNY_SIGMA,
    low: float = CANNY_LOW,
    high: float = CANNY_HIGH,
    blur_sigma: float = EDGE_BLUR_SIGMA,
    barrier_level: float = BARRIER_LEVEL,
    white_level: float = WHITE_LEVEL,
) -> np.ndarray:
    """Segment the foreground of a product image on a near-white background.

    Canny edges are blurred into a soft barrier, the background is flood
    filled from all four corners across barrier-free near-white pixels, and
    the fill then saturates the leftover background under the blurred edge
    skirt (bounded steps, so enclosed pockets survive). The mask is the
    complement of the filled region.
    """
    image = np.asarray(image, dtype=np.float64)
    gray = image @ np.array([0.299, 0.587, 0.114])
    edges = _canny(gray, canny_sigma, low, high)
    barrier = ndimage.gaussian_filter(edges.astype(np.float64), blur_sigma) > barrier_level
    white = image.min(axis=2) > white_level

    seeds = np.zeros_like(white)
    h, w = white.shape
    seeds[[0, 0, h - 1, h - 1], [0, w - 1, 0, w - 1]] = True
    fillable = white & ~barrier
    labels, _ = ndimage.label(fillable, structure=_CROSS)
    corner_labels = np.unique(labels[seeds & fillable])
    filled = np.isin(labels, corner_labels[corner_labels > 0])

    # Absorb background pixels trapped under the blurred-edge skirt; the step
    # bound keeps genuinely enclosed background pockets out of the fill.
    for _ in range(MAX_REFINE_STEPS):
        grown = ndimage.binary_dilation(filled, structure=_CROSS) & white
        if (grown == filled).all():
            break
        filled = grown

    mask = ~filled
    if not mask.any():
        raise NoForegroundError("no foreground found (image is background-filled)")
    return mask


def _canny(gray: np.ndarray, sigma: float, low: float, high: float) -> np.ndarray:
    """Canny edges with hysteresis thresholds on the max-normalized gradient."""
    smooth = ndimage.gaussian_filter(gray, sigma)
    gx = ndimage.sobel(smooth, axis=1)
    gy = ndimage.sobel(smooth, axis=0)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak <= 0:
        return np.zeros_like(gray, dtype=bool)
    mag /= peak

    # Non-maximum suppression over 4 quantized directions.
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    padded = np.pad(mag, 1, mode="constant")

    def shifted(dr: int, dc: int) -> np.ndarray:
        return padded[1 + dr : 1 + dr + mag.shape[0], 1 + dc : 1 + dc + mag.shape[1]]

    horiz = (angle < 22.5) | (angle >= 157.5)
    diag1 = (angle >= 22.5) & (angle < 67.5)
    vert = (angle >= 67.5) & (angle < 112.5)
    diag2 = (angle >= 112.5) & (angle < 157.5)
    n1 = np.select(
        [horiz, diag1, vert, diag2],
        [shifted(0, 1), shifted(1, 1), shifted(1, 0), shifted(1, -1)],
    )
    n2 = np.select(
        [horiz, diag1, vert, diag2],
        [shifted(0, -1), shifted(-1, -1), shifted(-1, 0), shifted(-1, 1)],
    )
    thin = (mag >= n1) & (mag >= n2) & (mag > 0)

    strong = thin & (mag >= high)
    weak = thin & (mag >= low)
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    keep = np.unique(labels[strong])
    return np.isin(labels, keep[keep > 0])


# ---------------------------------------------------------------------------
# Catalog-wide embeddings


class EmbeddingStore:
    """Precomputed per-design modality vectors for one catalog.

    Uses the catalog's exact ground-truth masks (the pipeline in
    compute_mask reproduces them; see tests).
    """

    def __init__(self, ids: list[str], matrices: dict[str, np.ndarray]):
        self.ids = list(ids)
        self.index = {d: i for i, d in enumerate(self.ids)}
        self._matrices = matrices

    @classmethod
    def build(cls, catalog: Catalog) -> "EmbeddingStore":
        shape_rows = np.empty((len(catalog), SHAPE_DIM))
        color_rows = np.empty((len(catalog), COLOR_DIM))
        for i, design in enumerate(catalog.designs):
            shape_rows[i] = shape_descriptor(design.mask).vector
            color_rows[i] = color_descriptor(design.image, design.mask).vector
        return cls(catalog.ids, {"shape": shape_rows, "color": color_rows})

    @property
    def modalities(self) -> tuple[str, ...]:
        return tuple(self._matrices)

    def matrix(self, modality: str) -> np.ndarray:
        return self._matrices[modality]

    def vectors(self, ids: list[str], modality: str) -> np.ndarray:
        rows = [self.index[d] for d in ids]
        return self._matrices[modality][rows]

    def vector(self, design_id: str, modality: str) -> np.ndarray:
        return self._matrices[modality][self.index[design_id]]

    def per_design(self, design_id: str) -> dict[str, np.ndarray]:
        return {m: self.vector(design_id, m) for m in self._matrices}
