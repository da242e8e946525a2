"""Major-axis regression, bounded segments and the two-line construction.

A fitted line is stored as centroid plus unit direction with the sign
canonicalized (first nonzero component positive) so that line equality is
well-defined. Major-axis regression minimizes the sum of squared
orthogonal distances and is therefore invariant to the unknown image
rotation, unlike ordinary least squares.

The shaft axis is built from two such lines: the first bounded segment is
subdivided at distances d1/d2 from its ends, the two intermediary points
are projected orthogonally onto the opposing line, and the axis runs
through the midpoints m1/m2 of the two connections. Projections may fall
outside the opposing bounded segment; differing orientation and length of
the two segments is allowed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateAxisError,
    DegenerateFitError,
    DegenerateSegmentError,
    InsufficientSupportError,
    InvalidInputError,
    InvalidSubdivisionError,
)
from .mask import ContourSet

_RELATIVE_EIGEN_TOL = 1e-9
_DEGENERATE_SPAN_TOL = 1e-12
_DEGENERATE_AXIS_TOL = 1e-9


def canonical_direction(vector) -> np.ndarray:
    """Normalize to unit length and fix the sign (first nonzero component > 0)."""
    d = np.asarray(vector, dtype=np.float64).reshape(2)
    norm = np.linalg.norm(d)
    if not norm > 0:
        raise InvalidInputError("direction vector must be nonzero")
    d = d / norm
    if d[0] < 0.0 or (d[0] == 0.0 and d[1] < 0.0):
        d = -d
    return d


@dataclass(frozen=True, eq=False)
class FittedLine:
    """Infinite 2D line through ``centroid`` with unit ``direction``."""

    centroid: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        centroid = np.asarray(self.centroid, dtype=np.float64).reshape(2)
        object.__setattr__(self, "centroid", centroid)
        object.__setattr__(self, "direction", canonical_direction(self.direction))

    @classmethod
    def through_points(cls, p, q) -> "FittedLine":
        p = np.asarray(p, dtype=np.float64)
        q = np.asarray(q, dtype=np.float64)
        return cls(0.5 * (p + q), q - p)

    def point_at(self, t: float) -> np.ndarray:
        return self.centroid + t * self.direction

    def angle_deg(self) -> float:
        """Orientation in [0, 180) degrees; 0 = +x, increasing towards +y."""
        return math.degrees(math.atan2(self.direction[1], self.direction[0])) % 180.0


@dataclass(frozen=True, eq=False)
class BoundedSegment:
    """A fitted line together with its extent over the supporting points."""

    line: FittedLine
    p_start: np.ndarray
    p_end: np.ndarray

    def __post_init__(self):
        p_start = np.asarray(self.p_start, dtype=np.float64).reshape(2)
        p_end = np.asarray(self.p_end, dtype=np.float64).reshape(2)
        if not np.linalg.norm(p_end - p_start) > 0:
            raise DegenerateSegmentError("segment endpoints coincide")
        object.__setattr__(self, "p_start", p_start)
        object.__setattr__(self, "p_end", p_end)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.p_end - self.p_start))

    @property
    def unit(self) -> np.ndarray:
        """Unit vector from p_start to p_end (may be -line.direction)."""
        return (self.p_end - self.p_start) / self.length


@dataclass(frozen=True, eq=False)
class AxisResult:
    """Constructed shaft axis with midpoints and both auxiliary segments.

    ``anterior`` is the first (subdivided) segment and ``posterior`` the
    projection target, in construction order; d1/d2 are the subdivision
    distances actually used, in pixels.
    """

    m1: np.ndarray
    m2: np.ndarray
    axis: FittedLine
    anterior: BoundedSegment
    posterior: BoundedSegment
    d1: float
    d2: float


def _as_points(points) -> np.ndarray:
    if isinstance(points, ContourSet):
        return points.centers()
    return np.asarray(points, dtype=np.float64).reshape(-1, 2)


def fit_major_axis(points) -> FittedLine:
    """Fit a line by major-axis regression (orthogonal least squares).

    The direction is the eigenvector of the 2x2 point covariance for its
    largest eigenvalue, computed in closed form; the line passes through
    the centroid and minimizes the summed squared orthogonal distances.

    Raises InsufficientSupportError for fewer than two distinct points and
    DegenerateFitError when the covariance is isotropic (no major axis).
    """
    pts = _as_points(points)
    if pts.shape[0] < 2 or np.unique(pts, axis=0).shape[0] < 2:
        raise InsufficientSupportError(f"need >= 2 distinct points, got {pts.shape[0]}")
    centroid = pts.mean(axis=0)
    rel = pts - centroid
    sxx = float(np.mean(rel[:, 0] ** 2))
    syy = float(np.mean(rel[:, 1] ** 2))
    sxy = float(np.mean(rel[:, 0] * rel[:, 1]))
    half_gap = math.hypot(0.5 * (sxx - syy), sxy)
    lam1 = 0.5 * (sxx + syy) + half_gap
    if 2.0 * half_gap <= _RELATIVE_EIGEN_TOL * lam1:
        raise DegenerateFitError("isotropic point covariance, major axis undefined")
    # two algebraically equivalent eigenvector forms; keep the better conditioned
    v1 = np.array([lam1 - syy, sxy])
    v2 = np.array([sxy, lam1 - sxx])
    v = v1 if v1 @ v1 >= v2 @ v2 else v2
    return FittedLine(centroid, v)


def project_onto_line(point, line: FittedLine) -> np.ndarray:
    """Orthogonal projection of a point onto the infinite line."""
    p = np.asarray(point, dtype=np.float64).reshape(2)
    return line.centroid + ((p - line.centroid) @ line.direction) * line.direction


def point_to_line_distance(point, line: FittedLine) -> float:
    """Unsigned orthogonal distance from a point to the infinite line."""
    p = np.asarray(point, dtype=np.float64).reshape(2)
    rel = p - line.centroid
    return abs(float(rel[0] * line.direction[1] - rel[1] * line.direction[0]))


def angle_between(a: FittedLine, b: FittedLine) -> float:
    """Acute undirected angle between two lines in degrees, in [0, 90]."""
    dot = float(a.direction @ b.direction)
    cross = float(a.direction[0] * b.direction[1] - a.direction[1] * b.direction[0])
    return math.degrees(math.atan2(abs(cross), abs(dot)))


def bound_segment(line: FittedLine, support) -> BoundedSegment:
    """Clip the line to the extent of the support points' projections."""
    pts = _as_points(support)
    if pts.shape[0] == 0:
        raise InsufficientSupportError("empty support")
    ts = (pts - line.centroid) @ line.direction
    t_min, t_max = float(ts.min()), float(ts.max())
    if t_max - t_min <= _DEGENERATE_SPAN_TOL:
        raise DegenerateSegmentError("all support points project onto a single location")
    return BoundedSegment(line, line.point_at(t_min), line.point_at(t_max))


def subdivide(segment: BoundedSegment, d1: float, d2: float):
    """Points at distance d1 from p_start and d2 from p_end, along the segment."""
    if d1 < 0 or d2 < 0 or d1 + d2 >= segment.length:
        raise InvalidSubdivisionError(
            f"need d1, d2 >= 0 and d1 + d2 < length, got d1={d1}, d2={d2}, "
            f"length={segment.length}"
        )
    u = segment.unit
    return segment.p_start + d1 * u, segment.p_end - d2 * u


def construct_axis(seg_a: BoundedSegment, seg_b: BoundedSegment, d1: float, d2: float) -> AxisResult:
    """Two-line construction of the in-between axis.

    seg_a is subdivided at (d1, d2); the intermediary points are projected
    onto seg_b's infinite line and the axis passes through the two
    connection midpoints. For parallel auxiliary lines this is exactly the
    midline regardless of d1/d2; intersecting lines are handled the same
    way (the midpoints trace the locus between the lines).
    """
    p_a, p_b = subdivide(seg_a, d1, d2)
    q_a = project_onto_line(p_a, seg_b.line)
    q_b = project_onto_line(p_b, seg_b.line)
    m1 = 0.5 * (p_a + q_a)
    m2 = 0.5 * (p_b + q_b)
    if np.linalg.norm(m2 - m1) <= _DEGENERATE_AXIS_TOL:
        raise DegenerateAxisError("constructed midpoints coincide")
    axis = FittedLine(0.5 * (m1 + m2), m2 - m1)
    return AxisResult(m1, m2, axis, seg_a, seg_b, float(d1), float(d2))
