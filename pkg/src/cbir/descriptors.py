"""Low-level visual features and their fusion into a 141-value descriptor.

The descriptor concatenates three segments with a fixed layout:

    [0, 128)    normalized HSV histogram, 32 hue x 2 saturation x 2 value bins
    [128, 134)  YCbCr mean/standard-deviation pairs: E_Y, s_Y, E_Cb, s_Cb, E_Cr, s_Cr
    [134, 141)  the seven moment invariants of the grayscale intensity image

Skewness is part of the color-moment statistics and the weighted moment
distance, but is deliberately not fused into the descriptor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import (
    GRAY,
    HSV,
    YCBCR,
    PlanarImage,
    RgbImage,
    resize_canonical,
    rgb_to_gray,
    rgb_to_hsv,
    rgb_to_ycbcr,
)

HUE_BINS = 32
SAT_BINS = 2
VAL_BINS = 2
HIST_SIZE = HUE_BINS * SAT_BINS * VAL_BINS  # 128
MOMENT_SIZE = 6
HU_SIZE = 7
DESCRIPTOR_SIZE = HIST_SIZE + MOMENT_SIZE + HU_SIZE  # 141

HIST_SLICE = slice(0, HIST_SIZE)
MOMENT_SLICE = slice(HIST_SIZE, HIST_SIZE + MOMENT_SIZE)
HU_SLICE = slice(HIST_SIZE + MOMENT_SIZE, DESCRIPTOR_SIZE)

CHANNEL_NAMES = ("Y", "Cb", "Cr")


class NegativeWeight(Exception):
    """A moment-distance weight was negative."""


class ZeroMass(Exception):
    """Grayscale image has zero total intensity, so no centroid exists."""


def _require_space(img: PlanarImage, space: str) -> None:
    if img.space != space:
        raise ValueError(f"expected {space} planes, got {img.space}")


@dataclass(frozen=True)
class ColorMoments:
    """Per-channel mean, standard deviation and skewness, ordered Y, Cb, Cr."""

    mean: np.ndarray
    std: np.ndarray
    skew: np.ndarray

    def fused_segment(self) -> np.ndarray:
        """Mean/std pairs in descriptor order: E_Y, s_Y, E_Cb, s_Cb, E_Cr, s_Cr."""
        return np.stack([self.mean, self.std], axis=1).ravel()


@dataclass(frozen=True)
class Descriptor:
    """Fused 141-value feature vector with the fixed segment layout."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (DESCRIPTOR_SIZE,):
            raise ValueError(f"descriptor must have {DESCRIPTOR_SIZE} values, got {vals.shape}")
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)

    @property
    def histogram(self) -> np.ndarray:
        return self.values[HIST_SLICE]

    @property
    def moments(self) -> np.ndarray:
        return self.values[MOMENT_SLICE]

    @property
    def hu(self) -> np.ndarray:
        return self.values[HU_SLICE]


def hsv_histogram(img: PlanarImage) -> np.ndarray:
    """Normalized 128-bin HSV histogram.

    Bin indices: hue floor(H / 360 * 32) clamped to [0, 31], saturation and
    value each split at 0.5. Flat index is h * 4 + s * 2 + v; counts are
    divided by the pixel count so the bins sum to 1.
    """
    _require_space(img, HSV)
    h = img.planes[..., 0]
    s = img.planes[..., 1]
    v = img.planes[..., 2]
    h_bin = np.clip((h / 360.0 * HUE_BINS).astype(np.intp), 0, HUE_BINS - 1)
    s_bin = np.minimum((s * SAT_BINS).astype(np.intp), SAT_BINS - 1)
    v_bin = np.minimum((v * VAL_BINS).astype(np.intp), VAL_BINS - 1)
    flat = (h_bin * (SAT_BINS * VAL_BINS) + s_bin * VAL_BINS + v_bin).ravel()
    counts = np.bincount(flat, minlength=HIST_SIZE).astype(np.float64)
    return counts / flat.size


def color_moments(img: PlanarImage) -> ColorMoments:
    """First three statistical moments of each YCbCr channel.

    Standard deviation uses the population form; skewness is the signed cube
    root of the third central moment, so asymmetry direction is preserved.
    """
    _require_space(img, YCBCR)
    planes = img.planes.reshape(-1, 3)
    mean = planes.mean(axis=0)
    diff = planes - mean
    squared = diff * diff
    std = np.sqrt(squared.mean(axis=0))
    skew = np.cbrt((squared * diff).mean(axis=0))
    return ColorMoments(mean=mean, std=std, skew=skew)


def moment_distance(
    a: ColorMoments, b: ColorMoments, weights: np.ndarray | None = None
) -> float:
    """Weighted absolute difference of the three moments over the channels.

    `weights` is a 3x3 array (rows: Y, Cb, Cr; columns: mean, std, skew);
    the default weights everything equally at 1.
    """
    if weights is None:
        w = np.ones((3, 3))
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(3, 3)
        if (w < 0).any():
            raise NegativeWeight("moment distance weights must be nonnegative")
    diffs = np.stack(
        [
            np.abs(a.mean - b.mean),
            np.abs(a.std - b.std),
            np.abs(a.skew - b.skew),
        ],
        axis=1,
    )
    return float((w * diffs).sum())


def _coordinate_powers(coords: np.ndarray) -> np.ndarray:
    """Stack coords**0 .. coords**3, shaped (4, len(coords))."""
    return np.stack([coords**e for e in range(4)])


def raw_moments(img: PlanarImage) -> np.ndarray:
    """Raw geometric moments m[x, y] for x, y <= 3.

    Coordinates follow the pixel grid: p is the column index, q the row
    index, both starting at 0 in the top-left corner.
    """
    _require_space(img, GRAY)
    plane = img.planes
    h, w = plane.shape
    p_pow = _coordinate_powers(np.arange(w, dtype=np.float64))
    q_pow = _coordinate_powers(np.arange(h, dtype=np.float64))
    # m[x, y] = sum_p sum_q p^x q^y I(q, p)
    return p_pow @ plane.T @ q_pow.T


def central_moments(img: PlanarImage) -> tuple[np.ndarray, tuple[float, float]]:
    """Central moments mu[x, y] about the intensity centroid, plus (pc, qc)."""
    _require_space(img, GRAY)
    plane = img.planes
    h, w = plane.shape
    m = raw_moments(img)
    if m[0, 0] == 0.0:
        raise ZeroMass("image has zero total intensity")
    pc = m[1, 0] / m[0, 0]
    qc = m[0, 1] / m[0, 0]
    p_pow = _coordinate_powers(np.arange(w, dtype=np.float64) - pc)
    q_pow = _coordinate_powers(np.arange(h, dtype=np.float64) - qc)
    mu = p_pow @ plane.T @ q_pow.T
    return mu, (pc, qc)


def central_moments_normalized(img: PlanarImage) -> np.ndarray:
    """Scale-normalized central moments N[x, y] = mu[x, y] / mu[0,0]^((x+y+2)/2)."""
    mu, _ = central_moments(img)
    x = np.arange(4)[:, None]
    y = np.arange(4)[None, :]
    exponent = (x + y + 2) / 2.0
    return mu / mu[0, 0] ** exponent


def hu_invariants(img: PlanarImage) -> np.ndarray:
    """The seven moment invariants of the grayscale intensity image.

    Invariant to translation, in-plane rotation and scale. An all-black
    image has no centroid and maps to the all-zero vector.
    """
    try:
        n = central_moments_normalized(img)
    except ZeroMass:
        return np.zeros(HU_SIZE)
    return hu_from_normalized(n)


def hu_from_normalized(n: np.ndarray) -> np.ndarray:
    """Compose the seven invariants from normalized central moments."""
    n20, n02, n11 = n[2, 0], n[0, 2], n[1, 1]
    n30, n03, n21, n12 = n[3, 0], n[0, 3], n[2, 1], n[1, 2]
    w1 = n20 + n02
    w2 = (n20 - n02) ** 2 + 4.0 * n11**2
    w3 = (n30 - 3.0 * n12) ** 2 + (3.0 * n21 - n03) ** 2
    w4 = (n30 + n12) ** 2 + (n21 + n03) ** 2
    w5 = (n30 - 3.0 * n12) * (n30 + n12) * (
        (n30 + n12) ** 2 - 3.0 * (n21 + n03) ** 2
    ) + (3.0 * n21 - n03) * (n21 + n03) * (3.0 * (n30 + n12) ** 2 - (n21 + n03) ** 2)
    w6 = (n20 - n02) * ((n30 + n12) ** 2 - (n21 + n03) ** 2) + 4.0 * n11 * (
        n30 + n12
    ) * (n21 + n03)
    w7 = (3.0 * n21 - n03) * (n30 + n12) * (
        (n30 + n12) ** 2 - 3.0 * (n21 + n03) ** 2
    ) - (n30 - 3.0 * n12) * (n21 + n03) * (3.0 * (n30 + n12) ** 2 - (n21 + n03) ** 2)
    return np.array([w1, w2, w3, w4, w5, w6, w7])


def extract_descriptor(img: RgbImage) -> Descriptor:
    """Full extraction pipeline: resize, then compute and fuse the three segments."""
    canonical = resize_canonical(img)
    hist = hsv_histogram(rgb_to_hsv(canonical))
    moments = color_moments(rgb_to_ycbcr(canonical))
    hu = hu_invariants(rgb_to_gray(canonical))
    return Descriptor(np.concatenate([hist, moments.fused_segment(), hu]))
