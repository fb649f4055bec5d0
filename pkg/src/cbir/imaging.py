"""Image decoding, canonical resizing and pixel-space conversions.

Everything downstream (histograms, moments) consumes the planar images
produced here, so the conversions pin down exact conventions: hexcone HSV
with hue in [0, 360), full-range BT.601 YCbCr scaled to [0, 1], and BT.601
luma for grayscale.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

CANONICAL_WIDTH = 384
CANONICAL_HEIGHT = 256

HSV = "HSV"
YCBCR = "YCBCR"
GRAY = "GRAY"

_SUPPORTED_FORMATS = ("PNG", "JPEG")


class DecodeError(Exception):
    """Byte stream is not a decodable PNG or JPEG image."""


@dataclass(frozen=True)
class RgbImage:
    """8-bit three-channel raster; pixels shaped (height, width, 3), uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"pixels must be (height, width, 3), got {px.shape}")
        if px.dtype != np.uint8:
            raise ValueError(f"pixels must be uint8, got {px.dtype}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        px.setflags(write=False)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class PlanarImage:
    """Real-valued planes tagged with their color space.

    HSV planes are (height, width, 3) with H in [0, 360), S and V in [0, 1].
    YCBCR planes are (height, width, 3) with all values in [0, 1].
    GRAY is a single (height, width) plane in [0, 1].
    """

    planes: np.ndarray
    space: str

    def __post_init__(self):
        if self.space not in (HSV, YCBCR, GRAY):
            raise ValueError(f"unknown color space {self.space!r}")
        expected_ndim = 2 if self.space == GRAY else 3
        if self.planes.ndim != expected_ndim:
            raise ValueError(
                f"{self.space} planes must have {expected_ndim} dims, "
                f"got shape {self.planes.shape}"
            )
        if self.space != GRAY and self.planes.shape[2] != 3:
            raise ValueError(f"{self.space} needs 3 planes, got {self.planes.shape}")
        self.planes.setflags(write=False)

    @property
    def width(self) -> int:
        return self.planes.shape[1]

    @property
    def height(self) -> int:
        return self.planes.shape[0]


def _sniff_format(data: bytes) -> str:
    if data.startswith(b"\x89PNG\r\n\x1a\n"):
        return "PNG"
    if data.startswith(b"\xff\xd8\xff"):
        return "JPEG"
    return "unknown"


def decode_image(data: bytes) -> RgbImage:
    """Decode a PNG or JPEG byte stream to 8-bit RGB.

    Grayscale sources are replicated across the three channels; alpha is
    discarded. Raises DecodeError on corrupt or unsupported input, naming
    the detected format.
    """
    try:
        img = Image.open(io.BytesIO(data))
    except UnidentifiedImageError as exc:
        raise DecodeError("cannot decode image: format not recognized") from exc
    except OSError as exc:
        raise DecodeError(f"corrupt {_sniff_format(data)} stream: {exc}") from exc
    fmt = img.format or _sniff_format(data)
    if fmt not in _SUPPORTED_FORMATS:
        raise DecodeError(f"unsupported image format {fmt}")
    try:
        rgb = img.convert("RGB")
        rgb.load()
    except Exception as exc:
        raise DecodeError(f"corrupt {fmt} stream: {exc}") from exc
    return RgbImage(np.asarray(rgb, dtype=np.uint8))


def encode_png(img: RgbImage) -> bytes:
    """Lossless PNG encoding, the inverse of decode_image for test fixtures."""
    buf = io.BytesIO()
    Image.fromarray(np.asarray(img.pixels)).save(buf, format="PNG")
    return buf.getvalue()


def bilinear_resize(img: RgbImage, width: int, height: int) -> RgbImage:
    """Resize with center-aligned bilinear interpolation.

    A same-size request returns the input object unchanged, so the identity
    case is bit-identical by construction.
    """
    if width < 1 or height < 1:
        raise ValueError("target size must be at least 1x1")
    if img.width == width and img.height == height:
        return img
    src = img.pixels.astype(np.float64)
    in_h, in_w = src.shape[:2]

    xs = np.clip((np.arange(width) + 0.5) * (in_w / width) - 0.5, 0.0, in_w - 1.0)
    ys = np.clip((np.arange(height) + 0.5) * (in_h / height) - 0.5, 0.0, in_h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, in_w - 1)
    y1 = np.minimum(y0 + 1, in_h - 1)
    fx = (xs - x0)[None, :, None]
    fy = (ys - y0)[:, None, None]

    top = src[y0[:, None], x0[None, :]] * (1.0 - fx) + src[y0[:, None], x1[None, :]] * fx
    bottom = src[y1[:, None], x0[None, :]] * (1.0 - fx) + src[y1[:, None], x1[None, :]] * fx
    out = top * (1.0 - fy) + bottom * fy
    return RgbImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))


def resize_canonical(img: RgbImage) -> RgbImage:
    """Resize to the fixed 384x256 working resolution."""
    return bilinear_resize(img, CANONICAL_WIDTH, CANONICAL_HEIGHT)


def rgb_to_hsv(img: RgbImage) -> PlanarImage:
    """Hexcone HSV conversion; achromatic pixels get H = 0, S = 0."""
    rgb = img.pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    safe_c = np.where(c > 0, c, 1.0)
    safe_v = np.where(v > 0, v, 1.0)

    h = np.select(
        [c == 0, v == r, v == g],
        [0.0, np.mod((g - b) / safe_c, 6.0), (b - r) / safe_c + 2.0],
        default=(r - g) / safe_c + 4.0,
    )
    h = h * 60.0
    # np.mod can round up to the modulus itself; fold the wrap point back to 0
    h = np.where(h >= 360.0, h - 360.0, h)
    s = np.where(v > 0, c / safe_v, 0.0)
    return PlanarImage(np.stack([h, s, v], axis=-1), HSV)


def rgb_to_ycbcr(img: RgbImage) -> PlanarImage:
    """Full-range BT.601 YCbCr on the 0-255 scale, then normalized to [0, 1]."""
    rgb = img.pixels.astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    planes = np.clip(np.stack([y, cb, cr], axis=-1), 0.0, 255.0) / 255.0
    return PlanarImage(planes, YCBCR)


def rgb_to_gray(img: RgbImage) -> PlanarImage:
    """BT.601 luma scaled to [0, 1]."""
    rgb = img.pixels.astype(np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return PlanarImage(np.clip(y / 255.0, 0.0, 1.0), GRAY)
