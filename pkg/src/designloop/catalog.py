"""Procedural bottle catalog: parametric rendering, sampling, and disk round-trip.

Designs are flat-shaded bottle silhouettes on a pure white background. The
rasterizer uses an integer pixel-center coverage test with no anti-aliasing,
so the foreground mask is the exact set of painted pixels and renders are
bit-identical across platforms.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
from PIL import Image

BODY_SHAPES = ("rectangle", "ellipse", "trapezoid", "rounded-rect", "circle-body")

# Canvas border kept clear of paint so corner-seeded flood fills always start
# on open background.
CANVAS_MARGIN = 3

MANIFEST_NAME = "manifest.json"
MANIFEST_SCHEMA = 1


class CatalogError(ValueError):
    """Invalid catalog configuration or corrupt persisted catalog."""


@dataclass(frozen=True)
class DesignParams:
    """Generation parameters; rendering is a pure function of these."""

    body_shape: str
    width_frac: float
    height_frac: float
    body_color: tuple[float, float, float]
    cap_color: tuple[float, float, float]
    cap_height_frac: float
    texture_seed: int

    def validate(self) -> None:
        if self.body_shape not in BODY_SHAPES:
            raise CatalogError(f"unknown body_shape {self.body_shape!r}")
        if not (0.0 < self.width_frac <= 1.0 and 0.0 < self.height_frac <= 1.0):
            raise CatalogError("width_frac/height_frac must lie in (0, 1]")
        if not (0.05 <= self.cap_height_frac <= 0.3):
            raise CatalogError("cap_height_frac must lie in [0.05, 0.3]")
        for chan in (*self.body_color, *self.cap_color):
            if not (0.0 <= chan <= 1.0):
                raise CatalogError("color channels must lie in [0, 1]")
        if not (0 <= self.texture_seed < 2**64):
            raise CatalogError("texture_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Design:
    """One catalog entry: 8-bit RGB raster plus exact foreground mask."""

    id: str
    params: DesignParams
    image_u8: np.ndarray  # (H, W, 3) uint8
    mask: np.ndarray  # (H, W) bool, the painted pixels

    @property
    def image(self) -> np.ndarray:
        """Raster as float RGB in [0, 1] (values on the 8-bit lattice)."""
        return self.image_u8.astype(np.float64) / 255.0


@dataclass
class Catalog:
    designs: list[Design]
    image_size: tuple[int, int]  # (H, W)
    generation_seed: int
    source_dir: Path | None = None

    def __post_init__(self) -> None:
        self._by_id = {d.id: d for d in self.designs}
        if len(self._by_id) != len(self.designs):
            raise CatalogError("duplicate design id in catalog")

    def __len__(self) -> int:
        return len(self.designs)

    def __getitem__(self, design_id: str) -> Design:
        return self._by_id[design_id]

    def __contains__(self, design_id: str) -> bool:
        return design_id in self._by_id

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.designs]

    def fingerprint(self) -> str:
        """Stable digest of ids, parameters, and geometry (images are a pure
        function of these, so they are not hashed)."""
        payload = json.dumps(
            {
                "image_size": list(self.image_size),
                "generation_seed": self.generation_seed,
                "designs": [{"id": d.id, "params": asdict(d.params)} for d in self.designs],
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Rendering


def _bottle_pixel_dims(params: DesignParams, image_size: tuple[int, int]) -> tuple[int, int]:
    h, w = image_size
    pw = max(1, round(params.width_frac * (w - 2 * CANVAS_MARGIN)))
    ph = max(1, round(params.height_frac * (h - 2 * CANVAS_MARGIN)))
    return pw, ph


def render_design(params: DesignParams, image_size: tuple[int, int] = (128, 128)):
    """Rasterize one bottle. Returns (image float RGB in [0,1], bool mask).

    The mask is exactly the painted pixel set; image values sit on the 8-bit
    lattice so a PNG round-trip is lossless.
    """
    params.validate()
    h, w = image_size
    if h < 64 or w < 64:
        raise CatalogError("image_size must be at least 64x64")

    pw, ph = _bottle_pixel_dims(params, image_size)
    x0 = (w - pw) // 2
    y0 = (h - ph) // 2

    shape = params.body_shape
    cap_h = max(1, round(params.cap_height_frac * ph))

    # Decoration stream: structural jitter first, surface texture later, in
    # a fixed draw order so renders stay reproducible. The jitter gives
    # same-proportioned bottles visibly different silhouettes.
    rng = np.random.default_rng(np.uint64(params.texture_seed))
    shoulder_mult = rng.uniform(0.45, 0.70)  # trapezoid top width
    radius_mult = rng.uniform(0.15, 0.35)  # rounded-rect corner radius
    base_mult = rng.uniform(0.04, 0.10)  # circle-body plinth height
    super_p = rng.uniform(1.75, 2.75)  # superellipse exponent for curved bodies
    neck_off_frac = rng.uniform(-0.09, 0.09)  # cap+neck horizontal offset
    bevel_mult = rng.uniform(0.0, 0.22)  # top-corner bevel cut
    waist_depth = rng.uniform(0.0, 0.11)  # side indent above the foot
    foot_mult = rng.uniform(0.05, 0.12)  # full-width foot height

    # Real bottle proportions track aspect ratio: slender bottles carry long
    # necks and relatively wide caps, squat ones sit cap-on-body. The log
    # mapping keeps the silhouette responsive where bottles are thinnest,
    # and each body family wears its own proportions, so no single global
    # cue reads the aspect off every design.
    aspect = pw / ph
    # Gains stay below 0.40 / ln(1.65/0.16)^2 so the clip never flattens the
    # neck cue inside the catalog's aspect range; the squared log spends most
    # of its resolution on the slender end, where bottles differ least.
    neck_gain, cap_factor, neck_factor = {
        "rectangle": (0.040, 0.55, 0.70),
        "ellipse": (0.073, 0.68, 0.55),
        "trapezoid": (0.052, 0.45, 0.80),
        "rounded-rect": (0.067, 0.62, 0.45),
        "circle-body": (0.057, 0.60, 0.60),
    }[shape]
    slender = max(np.log(1.65) - np.log(aspect), 0.0)  # 0 for very fat bottles
    neck_len = round(np.clip(neck_gain * slender**2, 0.0, 0.40) * ph)
    body_h = ph - cap_h - neck_len
    if body_h < 3:
        neck_len = max(0, ph - cap_h - 3)
        body_h = ph - cap_h - neck_len
    if body_h < 2:
        cap_h = max(1, ph - 2)
        neck_len = 0
        body_h = ph - cap_h
    cap_w = int(np.clip(round(cap_factor * cap_h), 2, max(2, round(0.92 * pw))))
    neck_w = max(2, round(neck_factor * cap_w))

    # Pixel-center coordinates relative to the bottle bounding box.
    ys = np.arange(h, dtype=np.float64)[:, None] + 0.5 - y0
    xs = np.arange(w, dtype=np.float64)[None, :] + 0.5 - x0

    neck_off = np.clip(neck_off_frac * pw, -(pw - cap_w) / 2.0, (pw - cap_w) / 2.0)
    cap_x0 = (pw - cap_w) / 2.0 + neck_off
    cap_mask = (ys >= 0) & (ys < cap_h) & (xs >= cap_x0) & (xs < cap_x0 + cap_w)

    by = ys - cap_h - neck_len  # 0 at body top
    in_box = (by >= 0) & (by < body_h) & (xs >= 0) & (xs < pw)
    cx = pw / 2.0

    def superellipse(center_x, center_y, half_w, half_h):
        ex = np.abs((xs - center_x) / half_w)
        ey = np.abs((by - center_y) / half_h)
        return in_box & (ex**super_p + ey**super_p <= 1.0)

    if shape == "rectangle":
        body_mask = in_box
    elif shape == "ellipse":
        body_mask = superellipse(cx, body_h / 2.0, pw / 2.0, body_h / 2.0)
    elif shape == "trapezoid":
        top_w = max(neck_w, round(shoulder_mult * pw))
        half = (top_w + (pw - top_w) * np.clip(by / max(body_h - 1, 1), 0.0, 1.0)) / 2.0
        body_mask = in_box & (np.abs(xs - cx) <= half)
    elif shape == "rounded-rect":
        r = max(1.0, radius_mult * min(pw, body_h))
        dx = np.maximum(np.maximum(r - xs, xs - (pw - r)), 0.0)
        dy = np.maximum(np.maximum(r - by, by - (body_h - r)), 0.0)
        body_mask = in_box & (dx * dx + dy * dy <= r * r)
    elif shape == "circle-body":
        base_h = max(2, round(base_mult * body_h))
        d = min(pw, body_h - base_h)
        ccy = body_h - base_h - d / 2.0
        circle = superellipse(cx, ccy, d / 2.0, d / 2.0)
        base = in_box & (by >= body_h - base_h)
        body_mask = circle | base
    else:  # pragma: no cover - validate() rejects earlier
        raise CatalogError(f"unknown body_shape {shape!r}")

    # Edge decoration for straight-sided bodies: beveled shoulders plus a
    # waist pinch over a full-width foot. The foot and untouched mid rows
    # keep the bounding box at the exact bottle dimensions.
    if shape in ("rectangle", "trapezoid", "rounded-rect"):
        bevel = round(bevel_mult * 0.5 * min(pw, body_h))
        if bevel > 0:
            cut = (by < bevel) & ((xs < bevel - by) | (xs > pw - bevel + by))
            body_mask = body_mask & ~cut
        foot_h = max(2, round(foot_mult * body_h))
        waist_h = round(0.18 * body_h)
        depth = round(waist_depth * 0.5 * pw)
        if depth > 0 and waist_h > 0:
            rows = (by >= body_h - foot_h - waist_h) & (by < body_h - foot_h)
            pinch = rows & ((xs < depth) | (xs > pw - depth))
            body_mask = body_mask & ~pinch

    # Neck bridges cap and body; curved bodies need it to reach their widest
    # rows so the silhouette stays connected.
    if shape == "ellipse":
        connector = 0.55 * body_h
    elif shape == "circle-body":
        connector = 0.9 * body_h
    else:
        connector = 0.0
    neck_x0 = np.clip((pw - neck_w) / 2.0 + neck_off, 0.0, pw - neck_w)
    neck = (
        (by >= -neck_len)
        & (by < connector)
        & (by < body_h)
        & (xs >= neck_x0)
        & (xs < neck_x0 + neck_w)
    )
    if neck_len > 0 or shape in ("ellipse", "circle-body"):
        body_mask = body_mask | neck

    mask = cap_mask | body_mask

    img = np.ones((h, w, 3), dtype=np.float64)
    body_rgb = _away_from_white(np.array(params.body_color, dtype=np.float64))
    cap_rgb = _away_from_white(np.array(params.cap_color, dtype=np.float64))
    img[body_mask] = body_rgb
    img[cap_mask] = cap_rgb

    # Decoration: a specular highlight stripe plus a gentle vertical fade,
    # blended toward white so pure channels (e.g. R=1) are preserved.
    stripe_pos = x0 + pw * rng.uniform(0.2, 0.8)
    stripe_amp = rng.uniform(0.1, 0.4)
    stripe_w = max(1.5, 0.12 * pw)
    xs_abs = np.arange(w, dtype=np.float64)[None, :] + 0.5
    t = stripe_amp * np.exp(-(((xs_abs - stripe_pos) / stripe_w) ** 2))
    t = t + 0.08 * np.clip(1.0 - by / max(body_h, 1), 0.0, 1.0)
    t = np.clip(t, 0.0, 0.5)
    t = np.where(mask, t, 0.0)[:, :, None]
    img = img + (1.0 - img) * t

    img_u8 = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    return img_u8.astype(np.float64) / 255.0, mask


def _away_from_white(rgb: np.ndarray) -> np.ndarray:
    """Darken colors whose darkest channel approaches the white background."""
    m = rgb.min()
    if m > 0.82:
        rgb = rgb * (0.82 / m)
    return rgb


# ---------------------------------------------------------------------------
# Sampling


def sample_params(size: int, seed: int, image_size: tuple[int, int] = (128, 128)) -> list[DesignParams]:
    """Draw design parameters for a catalog.

    Aspect ratios are log-uniform over [0.16, 1.65] and snapped to the pixel
    lattice so the rendered mask aspect equals width_frac/height_frac exactly.
    """
    if size < 1:
        raise CatalogError("catalog size must be >= 1")
    h, w = image_size
    if h < 64 or w < 64:
        raise CatalogError("image_size must be at least 64x64")
    base_w = w - 2 * CANVAS_MARGIN
    base_h = h - 2 * CANVAS_MARGIN

    rng = np.random.default_rng(seed)
    out: list[DesignParams] = []
    for _ in range(size):
        aspect = float(np.exp(rng.uniform(np.log(0.16), np.log(1.65))))
        hf_hi = min(0.95, 0.95 / aspect)
        hf = float(rng.uniform(0.45, hf_hi))
        ph = max(8, round(hf * base_h))
        pw = int(np.clip(round(aspect * hf * base_w), 8, round(0.95 * base_w)))
        params = DesignParams(
            body_shape=BODY_SHAPES[rng.integers(len(BODY_SHAPES))],
            width_frac=pw / base_w,
            height_frac=ph / base_h,
            body_color=_sample_color(rng, grayish_p=0.15),
            cap_color=_sample_color(rng, grayish_p=0.35),
            cap_height_frac=float(rng.uniform(0.05, 0.3)),
            texture_seed=int(rng.integers(0, 2**63)),
        )
        out.append(params)
    return out


def _sample_color(rng: np.random.Generator, grayish_p: float) -> tuple[float, float, float]:
    hue = rng.uniform(0.0, 1.0)
    if rng.uniform() < grayish_p:
        sat = rng.uniform(0.0, 0.15)
    else:
        sat = rng.uniform(0.25, 1.0)
    val = rng.uniform(0.35, 0.95)
    # Inline HSV -> RGB (sector formula).
    i = int(hue * 6.0) % 6
    f = hue * 6.0 - int(hue * 6.0)
    p, q, t = val * (1 - sat), val * (1 - sat * f), val * (1 - sat * (1 - f))
    r, g, b = [
        (val, t, p), (q, val, p), (p, val, t),
        (p, q, val), (t, p, val), (val, p, q),
    ][i]
    return (float(r), float(g), float(b))


def generate_catalog(size: int, image_size: tuple[int, int] = (128, 128), seed: int = 0) -> Catalog:
    """Render a full catalog; deterministic in (size, image_size, seed)."""
    params_list = sample_params(size, seed, image_size)
    designs = []
    for i, params in enumerate(params_list):
        image, mask = render_design(params, image_size)
        designs.append(
            Design(
                id=f"d{i:06d}",
                params=params,
                image_u8=np.round(image * 255.0).astype(np.uint8),
                mask=mask,
            )
        )
    return Catalog(designs=designs, image_size=image_size, generation_seed=seed)


# ---------------------------------------------------------------------------
# Persistence


def save_catalog(catalog: Catalog, path: str | Path) -> Path:
    """Write manifest.json plus images/*.png (image and mask per design)."""
    root = Path(path)
    (root / "images").mkdir(parents=True, exist_ok=True)
    entries = []
    for d in catalog.designs:
        img_name = f"images/{d.id}.png"
        mask_name = f"images/{d.id}_mask.png"
        Image.fromarray(d.image_u8).save(root / img_name)
        Image.fromarray(d.mask.astype(np.uint8) * 255).save(root / mask_name)
        entries.append(
            {"id": d.id, "params": asdict(d.params), "image": img_name, "mask": mask_name}
        )
    manifest = {
        "schema_version": MANIFEST_SCHEMA,
        "image_size": list(catalog.image_size),
        "generation_seed": catalog.generation_seed,
        "designs": entries,
    }
    (root / MANIFEST_NAME).write_text(json.dumps(manifest, indent=1))
    return root


def load_catalog(path: str | Path) -> Catalog:
    root = Path(path)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise IOError(f"missing catalog manifest: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise CatalogError(f"corrupt manifest {manifest_path}: {exc}") from exc

    image_size = tuple(manifest["image_size"])
    designs = []
    seen: set[str] = set()
    for entry in manifest["designs"]:
        did = entry["id"]
        if did in seen:
            raise CatalogError(f"duplicate design id in manifest: {did!r}")
        seen.add(did)
        img_path = root / entry["image"]
        mask_path = root / entry["mask"]
        for p in (img_path, mask_path):
            if not p.is_file():
                raise IOError(f"catalog entry {did!r} references missing file: {p}")
        raw = entry["params"]
        params = DesignParams(
            body_shape=raw["body_shape"],
            width_frac=raw["width_frac"],
            height_frac=raw["height_frac"],
            body_color=tuple(raw["body_color"]),
            cap_color=tuple(raw["cap_color"]),
            cap_height_frac=raw["cap_height_frac"],
            texture_seed=raw["texture_seed"],
        )
        image_u8 = np.asarray(Image.open(img_path).convert("RGB"), dtype=np.uint8)
        mask = np.asarray(Image.open(mask_path).convert("L")) > 127
        designs.append(Design(id=did, params=params, image_u8=image_u8, mask=mask))
    return Catalog(
        designs=designs,
        image_size=image_size,  # type: ignore[arg-type]
        generation_seed=manifest["generation_seed"],
        source_dir=root,
    )
