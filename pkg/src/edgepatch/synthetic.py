"""Deterministic synthetic sign-board corpus with exact instance masks.

Ten archetypes combine four board shapes (circle, triangle, octagon, diamond)
with a colored rim and a simple glyph. Archetype pairs share shape, face, and
glyph and differ only in rim color, so the class-discriminative signal of a
pair lives on the board's edge band. Every image gets a randomized background,
pose jitter, photometric jitter, blur, and sensor noise; the mask is the exact
board support.

Layout written by :func:`generate_corpus` matches the ingestion contract:
``root/classes.csv``, ``root/<split>/images/<class>/<name>.png`` plus the
same-named mask under ``masks/``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage


@dataclass(frozen=True)
class Archetype:
    name: str
    shape: str  # circle | triangle | octagon | diamond
    rim: tuple
    face: tuple
    glyph: str  # bar | cross | dot
    glyph_color: tuple


_RED = (0.78, 0.10, 0.12)
_BLUE = (0.10, 0.25, 0.80)
_GREEN = (0.05, 0.55, 0.22)
_YELLOW = (0.95, 0.80, 0.10)
_WHITE = (0.96, 0.96, 0.94)
_CREAM = (0.98, 0.93, 0.80)
_BLACK = (0.05, 0.05, 0.05)

ARCHETYPES = (
    Archetype("circle_red_bar", "circle", _RED, _WHITE, "bar", _BLACK),
    Archetype("circle_blue_bar", "circle", _BLUE, _WHITE, "bar", _BLACK),
    Archetype("circle_red_cross", "circle", _RED, _WHITE, "cross", _BLACK),
    Archetype("circle_blue_cross", "circle", _BLUE, _WHITE, "cross", _BLACK),
    Archetype("triangle_red_bar", "triangle", _RED, _CREAM, "bar", _BLACK),
    Archetype("triangle_blue_bar", "triangle", _BLUE, _CREAM, "bar", _BLACK),
    Archetype("octagon_red_bar", "octagon", _RED, _WHITE, "bar", _BLACK),
    Archetype("octagon_green_bar", "octagon", _GREEN, _WHITE, "bar", _BLACK),
    Archetype("diamond_yellow_dot", "diamond", _YELLOW, _WHITE, "dot", _BLACK),
    Archetype("diamond_green_dot", "diamond", _GREEN, _WHITE, "dot", _BLACK),
)


def _polygon_sdf(xx, yy, n_sides, circumradius, rotation):
    """Signed distance to a regular polygon (negative inside)."""
    inradius = circumradius * math.cos(math.pi / n_sides)
    d = np.full(xx.shape, -np.inf)
    for k in range(n_sides):
        ang = rotation + 2.0 * math.pi * k / n_sides
        proj = xx * math.cos(ang) + yy * math.sin(ang)
        d = np.maximum(d, proj)
    return d - inradius


def _shape_sdf(shape, xx, yy, radius, rotation):
    if shape == "circle":
        return np.sqrt(xx * xx + yy * yy) - radius
    if shape == "triangle":
        return _polygon_sdf(xx, yy, 3, radius, rotation + math.pi / 2 + math.pi / 3)
    if shape == "octagon":
        return _polygon_sdf(xx, yy, 8, radius, rotation + math.pi / 8)
    if shape == "diamond":
        return _polygon_sdf(xx, yy, 4, radius, rotation + math.pi / 4)
    raise ValueError(f"unknown shape {shape}")


def _box_sdf(xx, yy, half_w, half_h):
    return np.maximum(np.abs(xx) - half_w, np.abs(yy) - half_h)


def _glyph_sdf(glyph, xx, yy, radius):
    if glyph == "bar":
        return _box_sdf(xx, yy, 0.52 * radius, 0.15 * radius)
    if glyph == "cross":
        return np.minimum(
            _box_sdf(xx, yy, 0.52 * radius, 0.14 * radius),
            _box_sdf(xx, yy, 0.14 * radius, 0.52 * radius),
        )
    if glyph == "dot":
        return np.sqrt(xx * xx + yy * yy) - 0.30 * radius
    raise ValueError(f"unknown glyph {glyph}")


def _coverage(sdf):
    # ~1px anti-aliased edge
    return np.clip(0.5 - sdf, 0.0, 1.0)


def _background(rng, resolution):
    c1 = rng.uniform(0.15, 0.75, size=3)
    c2 = rng.uniform(0.15, 0.75, size=3)
    t = np.linspace(0.0, 1.0, resolution)
    axis = rng.integers(0, 3)
    if axis == 0:
        ramp = np.tile(t[:, None], (1, resolution))
    elif axis == 1:
        ramp = np.tile(t[None, :], (resolution, 1))
    else:
        ramp = (t[:, None] + t[None, :]) / 2.0
    bg = c1[:, None, None] * (1 - ramp) + c2[:, None, None] * ramp
    texture = ndimage.gaussian_filter(rng.standard_normal((resolution, resolution)), 6.0)
    bg = bg + 0.25 * texture[None]
    return np.clip(bg, 0.0, 1.0)


def make_record(class_id: int, rng: np.random.Generator, resolution: int = 128):
    """Render one sample; returns (image 3xRxR float64 in [0,1], mask 1xRxR uint8)."""
    spec = ARCHETYPES[class_id]
    img = _background(rng, resolution)

    cy = resolution / 2.0 + rng.uniform(-5.0, 5.0)
    cx = resolution / 2.0 + rng.uniform(-5.0, 5.0)
    radius = rng.uniform(0.30, 0.39) * resolution
    rotation = math.radians(rng.uniform(-8.0, 8.0))
    rim_frac = rng.uniform(0.16, 0.22)

    ys, xs = np.mgrid[0:resolution, 0:resolution].astype(np.float64)
    xx, yy = xs - cx, ys - cy
    # glyph coordinates rotate with the board
    xr = xx * math.cos(-rotation) - yy * math.sin(-rotation)
    yr = xx * math.sin(-rotation) + yy * math.cos(-rotation)

    def jitter(color):
        return np.clip(np.asarray(color) + rng.uniform(-0.05, 0.05, size=3), 0.0, 1.0)

    d_board = _shape_sdf(spec.shape, xx, yy, radius, rotation)
    d_face = d_board + rim_frac * radius
    d_glyph = _glyph_sdf(spec.glyph, xr, yr, radius * (1 - rim_frac))

    for color, sdf in (
        (jitter(spec.rim), d_board),
        (jitter(spec.face), d_face),
        (jitter(spec.glyph_color), d_glyph),
    ):
        cov = _coverage(sdf)[None]
        img = img * (1 - cov) + color[:, None, None] * cov

    img = img * rng.uniform(0.85, 1.15)
    sigma = rng.uniform(0.0, 0.8)
    if sigma > 0.05:
        img = ndimage.gaussian_filter(img, (0.0, sigma, sigma))
    img = img + rng.normal(0.0, 0.008, size=img.shape)
    img = np.clip(img, 0.0, 1.0)

    mask = (d_board <= 0.0).astype(np.uint8)[None]
    return img, mask


def class_table(n_classes: int = 10):
    if not (2 <= n_classes <= len(ARCHETYPES)):
        raise ValueError(f"n_classes must be in [2, {len(ARCHETYPES)}]")
    return [(i, ARCHETYPES[i].name) for i in range(n_classes)]


def generate_corpus(
    root,
    n_classes: int = 10,
    train_per_class: int = 120,
    val_per_class: int = 30,
    seed: int = 0,
    resolution: int = 128,
) -> None:
    """Write a full corpus (train + val splits) under ``root``."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "classes.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class_id", "name"])
        writer.writerows(class_table(n_classes))

    splits = (("train", train_per_class), ("val", val_per_class))
    for split_idx, (split, count) in enumerate(splits):
        for class_id in range(n_classes):
            img_dir = root / split / "images" / str(class_id)
            mask_dir = root / split / "masks" / str(class_id)
            img_dir.mkdir(parents=True, exist_ok=True)
            mask_dir.mkdir(parents=True, exist_ok=True)
            for idx in range(count):
                rng = np.random.default_rng((seed, split_idx, class_id, idx))
                img, mask = make_record(class_id, rng, resolution)
                name = f"{split}_{class_id:02d}_{idx:04d}.png"
                img_u8 = np.round(img * 255.0).astype(np.uint8).transpose(1, 2, 0)
                Image.fromarray(img_u8).save(img_dir / name)
                Image.fromarray(mask[0] * 255).save(mask_dir / name)
