"""Gaussian likelihood encoding of a relevant-contour region.

The region of interest around a directed line segment is encoded as a
separable product of two 1D Gaussians: one over the orthogonal distance to
the segment's infinite line, one over the axial overshoot beyond the
nearest endpoint (zero inside the segment's span). The peak is 1, there is
no density constant, and values are truncated to exactly 0 where either
distance exceeds ``truncation * sigma``. A point therefore passes the
``t``-sigma threshold iff d_perp**2 + d_par**2 <= (t * sigma)**2, which
gives a capsule-shaped acceptance region around the segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .mask import ContourSet


@dataclass(frozen=True, eq=False)
class RoiSegment:
    """Directed 2D line segment in continuous pixel coordinates."""

    start: np.ndarray
    end: np.ndarray
    label: str = ""

    def __post_init__(self):
        start = np.asarray(self.start, dtype=np.float64).reshape(2)
        end = np.asarray(self.end, dtype=np.float64).reshape(2)
        if not np.linalg.norm(end - start) > 0:
            raise InvalidInputError("ROI segment must have nonzero length")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    @property
    def direction(self) -> np.ndarray:
        return (self.end - self.start) / self.length


@dataclass(frozen=True)
class RoiParams:
    """Standard deviation, truncation and masking threshold in sigma units."""

    sigma: float = 6.0
    truncation: float = 3.0
    mask_threshold: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidInputError(f"sigma must be positive, got {self.sigma}")
        if not self.mask_threshold > 0:
            raise InvalidInputError(f"mask_threshold must be positive, got {self.mask_threshold}")
        if self.truncation < self.mask_threshold:
            raise InvalidInputError("truncation must be >= mask_threshold")

    @property
    def retain_level(self) -> float:
        """Likelihood value at ``mask_threshold`` sigma from the peak."""
        return math.exp(-0.5 * self.mask_threshold**2)


@dataclass(frozen=True, eq=False)
class LikelihoodMap:
    """Raster of likelihood values in [0, 1], row-major like BinaryMask."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError(f"likelihood map must be a non-empty 2D grid, got {arr.shape}")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise InvalidInputError("likelihood values must lie in [0, 1]")
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def segment_likelihood(segment: RoiSegment, params: RoiParams, points) -> np.ndarray:
    """Evaluate the likelihood field at continuous points, shape (N, 2).

    Pure function of continuous geometry; rigid motions applied to segment
    and points together leave the values unchanged.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    u = segment.direction
    rel = pts - segment.start
    t = rel @ u
    d_perp = np.abs(rel[:, 0] * u[1] - rel[:, 1] * u[0])
    d_par = np.maximum(0.0, np.maximum(-t, t - segment.length))
    values = np.exp(-(d_perp**2 + d_par**2) / (2.0 * params.sigma**2))
    support = params.truncation * params.sigma
    values[(d_perp > support) | (d_par > support)] = 0.0
    return values


def rasterize_roi(segment: RoiSegment, params: RoiParams, width: int, height: int) -> LikelihoodMap:
    """Sample the likelihood field at every pixel centre of a width x height grid."""
    if width < 1 or height < 1:
        raise InvalidInputError(f"raster dimensions must be >= 1, got {width}x{height}")
    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    values = segment_likelihood(segment, params, np.column_stack([gx.ravel(), gy.ravel()]))
    return LikelihoodMap(values.reshape(height, width))


def normalize_peak(roi: LikelihoodMap) -> LikelihoodMap:
    """Rescale an ingested map so its maximum is 1 (no-op when empty).

    Applied to maps loaded from files (e.g. network predictions) so that
    thresholding is robust to prediction amplitude. Analytically rasterized
    maps are already peak-calibrated and must not be rescaled.
    """
    peak = roi.values.max()
    if peak <= 0.0 or peak == 1.0:
        return roi
    return LikelihoodMap(roi.values / peak)


def mask_contour(contour: ContourSet, roi: LikelihoodMap, params: RoiParams) -> ContourSet:
    """Keep contour points whose likelihood reaches the masking threshold.

    The retained set is ordered as the input; it may be empty (the caller
    decides whether that is fatal).
    """
    if len(contour) == 0:
        return contour
    pts = contour.points
    if pts[:, 0].max() >= roi.width or pts[:, 1].max() >= roi.height:
        raise InvalidInputError("ROI dimensions do not cover the contour's mask")
    values = roi.values[pts[:, 1], pts[:, 0]]
    return ContourSet(pts[values >= params.retain_level])
