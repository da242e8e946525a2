"""Deterministic overlay rendering of a detection onto a raster.

Draws the contour, the masked ROI support points, both auxiliary segments
with their endpoints, the intermediary/projected points, the midpoints and
the axis clipped to the image. Rendering is plain Pillow drawing, so
identical inputs produce bit-identical PNG files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .errors import InvalidInputError
from .geometry import project_onto_line, subdivide
from .mask import BinaryMask
from .pipeline import DetectionOutcome

WARN_AXIS_OUTSIDE = "axis_outside_image"


@dataclass(frozen=True)
class OverlayStyle:
    contour_color: tuple = (70, 130, 180)
    support_colors: tuple = ((255, 165, 0), (50, 205, 50))
    aux_color: tuple = (255, 215, 0)
    aux_endpoint_color: tuple = (255, 255, 255)
    intermediate_color: tuple = (255, 105, 180)
    midpoint_color: tuple = (255, 0, 0)
    axis_color: tuple = (220, 20, 60)
    point_radius: int = 1
    marker_radius: int = 2
    aux_width: int = 1
    axis_width: int = 2

    def __post_init__(self):
        if self.point_radius < 0 or self.marker_radius < 0:
            raise InvalidInputError("point radii must be >= 0")
        if self.aux_width < 1 or self.axis_width < 1:
            raise InvalidInputError("line widths must be >= 1")


DEFAULT_STYLE = OverlayStyle()


def _as_rgb(base) -> Image.Image:
    if isinstance(base, BinaryMask):
        arr = np.where(base.pixels, 96, 0).astype(np.uint8)
        return Image.fromarray(np.stack([arr] * 3, axis=-1), mode="RGB")
    arr = np.asarray(base)
    if arr.ndim == 2:
        arr = np.stack([arr.astype(np.uint8)] * 3, axis=-1)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInputError(f"expected a mask, grayscale or RGB raster, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError("overlay base image is empty")
    return Image.fromarray(arr.astype(np.uint8), mode="RGB")


def clip_line_to_image(line, width: int, height: int):
    """Endpoints of the infinite line inside [0,w] x [0,h], or None."""
    t_lo, t_hi = -np.inf, np.inf
    for pos, d, hi in ((line.centroid[0], line.direction[0], width),
                       (line.centroid[1], line.direction[1], height)):
        if abs(d) <= 1e-12:
            if not 0 <= pos <= hi:
                return None
            continue
        a, b = (0 - pos) / d, (hi - pos) / d
        t_lo, t_hi = max(t_lo, min(a, b)), min(t_hi, max(a, b))
    if t_lo >= t_hi:
        return None
    return line.point_at(t_lo), line.point_at(t_hi)


def _dot(draw, p, radius, color):
    x, y = float(p[0]), float(p[1])
    draw.ellipse([x - radius, y - radius, x + radius, y + radius], fill=color)


def render_overlay(base, outcome: DetectionOutcome, style: OverlayStyle = DEFAULT_STYLE):
    """Render the detection onto a copy of ``base``.

    Returns (PIL RGB image, warnings); the axis layer is skipped with a
    warning when the axis misses the image entirely.
    """
    img = _as_rgb(base)
    draw = ImageDraw.Draw(img)
    warnings = []

    for x, y in outcome.contour.points:
        _dot(draw, (x + 0.5, y + 0.5), style.point_radius, style.contour_color)
    for color, support in zip(style.support_colors, outcome.supports.values()):
        for x, y in support.points:
            _dot(draw, (x + 0.5, y + 0.5), style.point_radius, color)

    result = outcome.axis_result
    for seg in (result.anterior, result.posterior):
        draw.line([tuple(seg.p_start), tuple(seg.p_end)], fill=style.aux_color, width=style.aux_width)
        _dot(draw, seg.p_start, style.marker_radius, style.aux_endpoint_color)
        _dot(draw, seg.p_end, style.marker_radius, style.aux_endpoint_color)

    p_a, p_b = subdivide(result.anterior, result.d1, result.d2)
    for p in (p_a, p_b, project_onto_line(p_a, result.posterior.line),
              project_onto_line(p_b, result.posterior.line)):
        _dot(draw, p, style.marker_radius, style.intermediate_color)

    clipped = clip_line_to_image(result.axis, img.width, img.height)
    if clipped is None:
        warnings.append(WARN_AXIS_OUTSIDE)
    else:
        draw.line([tuple(clipped[0]), tuple(clipped[1])], fill=style.axis_color, width=style.axis_width)
    _dot(draw, result.m1, style.marker_radius, style.midpoint_color)
    _dot(draw, result.m2, style.marker_radius, style.midpoint_color)
    return img, warnings
