"""Synthetic labeled corpora shaped like the 10x100 benchmark datasets.

Nine classes pair three shapes with three foreground palettes chosen to have
equal BT.601 luma, so the grayscale image cannot reveal the palette and the
hue histogram cannot reveal the shape (shape areas are sampled from one
shared distribution). The tenth class is unique in both hue and shape and
plays the role of the near-trivially-retrievable class. Background pixels
are exactly black so the intensity moments see only the shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .imaging import RgbImage

WIDTH = 384
HEIGHT = 256

# Near-equal-luma palettes (Y within ~2.5% of each other) with hues 0, 120
# and 240, each keeping V clear of the 0.5 value-bin boundary under the
# brightness jitter below. The unique class gets magenta at its own luma.
RED = (250, 46, 46)
GREEN = (45, 160, 45)
BLUE = (88, 88, 255)
MAGENTA = (235, 60, 235)


@dataclass(frozen=True)
class ShapeClass:
    name: str
    shape: str  # disk | bar | triangle | star
    color: tuple[int, int, int]


COREL_LIKE_CLASSES: tuple[ShapeClass, ...] = (
    ShapeClass("disk-red", "disk", RED),
    ShapeClass("disk-green", "disk", GREEN),
    ShapeClass("disk-blue", "disk", BLUE),
    ShapeClass("bar-red", "bar", RED),
    ShapeClass("bar-green", "bar", GREEN),
    ShapeClass("bar-blue", "bar", BLUE),
    ShapeClass("triangle-red", "triangle", RED),
    ShapeClass("triangle-green", "triangle", GREEN),
    ShapeClass("triangle-blue", "triangle", BLUE),
    ShapeClass("star-magenta", "star", MAGENTA),
)

EASIEST_CLASS = "star-magenta"

_BAR_ASPECT = 4.0
_TRIANGLE_LEG_RATIO = 1.5


def _convex_mask(u: np.ndarray, v: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Points inside a convex polygon given counterclockwise vertices."""
    inside = np.ones(u.shape, dtype=bool)
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        inside &= (x1 - x0) * (v - y0) - (y1 - y0) * (u - x0) >= 0
    return inside


def _equilateral(circumradius: float, phase: float) -> np.ndarray:
    angles = phase + np.array([0.0, 2.0, 4.0]) * np.pi / 3.0
    return circumradius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def _shape_mask(
    shape: str, u: np.ndarray, v: np.ndarray, area: float, theta: float
) -> tuple[np.ndarray, float]:
    """Boolean mask and the shape's maximum extent from its centroid."""
    ur = np.cos(theta) * u + np.sin(theta) * v
    vr = -np.sin(theta) * u + np.cos(theta) * v
    if shape == "disk":
        r = np.sqrt(area / np.pi)
        return u**2 + v**2 <= r**2, r
    if shape == "bar":
        # Rectangle with 4:1 aspect; strongly anisotropic second moments.
        short = np.sqrt(area / _BAR_ASPECT)
        long = _BAR_ASPECT * short
        inside = (np.abs(ur) <= long / 2.0) & (np.abs(vr) <= short / 2.0)
        return inside, float(np.hypot(long / 2.0, short / 2.0))
    if shape == "triangle":
        # Right triangle with legs a and 1.5a; centroid at the origin.
        a = np.sqrt(2.0 * area / _TRIANGLE_LEG_RATIO)
        b = _TRIANGLE_LEG_RATIO * a
        corner = np.array([-b / 3.0, -a / 3.0])
        verts = np.array(
            [corner, corner + [b, 0.0], corner + [0.0, a]]
        )
        extent = float(np.max(np.hypot(verts[:, 0], verts[:, 1])))
        return _convex_mask(ur, vr, verts), extent
    if shape == "star":
        # Hexagram: two opposed equilateral triangles.
        r = np.sqrt(area / 2.0)
        up = _convex_mask(ur, vr, _equilateral(r, np.pi / 2.0))
        down = _convex_mask(ur, vr, _equilateral(r, -np.pi / 2.0))
        return up | down, r
    raise ValueError(f"unknown shape {shape!r}")


def render_class_image(
    shape_class: ShapeClass,
    rng: np.random.Generator,
    width: int = WIDTH,
    height: int = HEIGHT,
) -> RgbImage:
    """One randomized corpus image: a jittered shape on a black canvas."""
    area_frac = rng.uniform(0.025, 0.045)
    area = area_frac * width * height
    theta = rng.uniform(0.0, 2.0 * np.pi)
    brightness = rng.uniform(0.92, 1.08)

    xs = np.arange(width, dtype=np.float64)
    ys = np.arange(height, dtype=np.float64)
    # Extent probe at the origin fixes the legal center range before placement.
    _, extent = _shape_mask(shape_class.shape, np.zeros((1, 1)), np.zeros((1, 1)), area, theta)
    margin = extent + 4.0
    cx = rng.uniform(margin, width - margin)
    cy = rng.uniform(margin, height - margin)

    u = xs[None, :] - cx
    v = ys[:, None] - cy
    mask, _ = _shape_mask(shape_class.shape, u, v, area, theta)

    canvas = np.zeros((height, width, 3), dtype=np.float64)
    color = np.array(shape_class.color, dtype=np.float64) * brightness
    noise = rng.normal(0.0, 4.0, size=(int(mask.sum()), 3))
    canvas[mask] = color + noise
    return RgbImage(np.clip(np.rint(canvas), 0, 255).astype(np.uint8))


def generate_images(
    per_class: int,
    seed: int = 0,
    classes: tuple[ShapeClass, ...] = COREL_LIKE_CLASSES,
    width: int = WIDTH,
    height: int = HEIGHT,
) -> list[tuple[str, RgbImage]]:
    """In-memory corpus: per_class images for every class, deterministic in seed."""
    rng = np.random.default_rng(seed)
    out = []
    for shape_class in classes:
        for _ in range(per_class):
            out.append((shape_class.name, render_class_image(shape_class, rng, width, height)))
    return out


def generate_corpus_files(
    dest: str | Path,
    per_class: int,
    seed: int = 0,
    classes: tuple[ShapeClass, ...] = COREL_LIKE_CLASSES,
    width: int = WIDTH,
    height: int = HEIGHT,
) -> list[Path]:
    """Write a folders-layout corpus: dest/<class>/<nnn>.png."""
    dest = Path(dest)
    rng = np.random.default_rng(seed)
    written = []
    for shape_class in classes:
        class_dir = dest / shape_class.name
        class_dir.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            img = render_class_image(shape_class, rng, width, height)
            path = class_dir / f"{i:03d}.png"
            Image.fromarray(np.asarray(img.pixels)).save(path, format="PNG")
            written.append(path)
    return written
