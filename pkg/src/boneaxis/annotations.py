"""Annotation records (labelme-style JSON) and polygon rasterization.

An annotation holds the image size, an optional pixel spacing and a flat
list of labelled shapes. Label convention for a bone ``<name>``: polygon
``<name>`` outlines the bone, lines ``<name>_ant`` / ``<name>_post`` mark
the relevant contour regions, line ``<name>_axis`` may carry a reference
axis. Spacing comes from the explicit ``spacing_mm_per_px`` field or from
a calibration-sphere annotation of known true diameter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import AnnotationError, InvalidInputError
from .mask import BinaryMask

KIND_POLYGON = "polygon"
KIND_LINE = "line"
KIND_POINTS = "points"
_KINDS = (KIND_POLYGON, KIND_LINE, KIND_POINTS)
_KIND_ALIASES = {"point": KIND_POINTS}


@dataclass(frozen=True, eq=False)
class Shape:
    label: str
    kind: str
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.float64).reshape(-1, 2))

    def __eq__(self, other):
        return (
            isinstance(other, Shape)
            and self.label == other.label
            and self.kind == other.kind
            and np.array_equal(self.points, other.points)
        )


@dataclass(frozen=True, eq=False)
class AnnotationRecord:
    image_width: int
    image_height: int
    spacing: float | None
    shapes: tuple

    def find(self, label: str) -> Shape | None:
        for shape in self.shapes:
            if shape.label == label:
                return shape
        return None

    def labels(self) -> list:
        return [s.label for s in self.shapes]

    def __eq__(self, other):
        return (
            isinstance(other, AnnotationRecord)
            and self.image_width == other.image_width
            and self.image_height == other.image_height
            and self.spacing == other.spacing
            and tuple(self.shapes) == tuple(other.shapes)
        )


def _get_int(doc, keys, path):
    for key in keys:
        if key in doc:
            value = doc[key]
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise AnnotationError(f"expected a positive integer, got {value!r}", f"$.{key}")
            return value
    raise AnnotationError(f"missing required field (one of {', '.join(keys)})", f"$.{keys[0]}")


def parse_annotation(text: str) -> AnnotationRecord:
    """Parse and validate an annotation JSON document.

    Accepts the canonical keys (``image_width``/``image_height``, shape
    ``kind``) plus the labelme spellings (``imageWidth``/``imageHeight``,
    ``shape_type``, kind ``point``). Raises AnnotationError whose message
    starts with the JSON path of the offending field.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise AnnotationError("document must be a JSON object")

    width = _get_int(doc, ("image_width", "imageWidth"), "$")
    height = _get_int(doc, ("image_height", "imageHeight"), "$")

    spacing = doc.get("spacing_mm_per_px")
    if spacing is not None:
        if not isinstance(spacing, (int, float)) or isinstance(spacing, bool) or not spacing > 0:
            raise AnnotationError(f"spacing must be a positive number, got {spacing!r}",
                                  "$.spacing_mm_per_px")
        spacing = float(spacing)

    raw_shapes = doc.get("shapes")
    if not isinstance(raw_shapes, list):
        raise AnnotationError("expected a list of shapes", "$.shapes")

    shapes = []
    seen = set()
    for i, raw in enumerate(raw_shapes):
        path = f"$.shapes[{i}]"
        if not isinstance(raw, dict):
            raise AnnotationError("shape must be an object", path)
        label = raw.get("label")
        if not isinstance(label, str) or not label:
            raise AnnotationError(f"label must be a non-empty string, got {label!r}", f"{path}.label")
        if label in seen:
            raise AnnotationError(f"duplicate label {label!r}", f"{path}.label")
        seen.add(label)
        kind = raw.get("kind", raw.get("shape_type"))
        kind = _KIND_ALIASES.get(kind, kind)
        if kind not in _KINDS:
            raise AnnotationError(f"unknown kind {kind!r} (expected one of {_KINDS})", f"{path}.kind")
        points = raw.get("points")
        if not isinstance(points, list) or not all(
            isinstance(p, list) and len(p) == 2 and
            all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p)
            for p in points
        ):
            raise AnnotationError("points must be a list of [x, y] pairs", f"{path}.points")
        if kind == KIND_LINE and len(points) != 2:
            raise AnnotationError(f"line must have exactly 2 points, got {len(points)}", f"{path}.points")
        if kind == KIND_POLYGON and len(points) < 3:
            raise AnnotationError(f"polygon must have >= 3 points, got {len(points)}", f"{path}.points")
        if kind == KIND_POINTS and len(points) < 1:
            raise AnnotationError("points shape must have >= 1 point", f"{path}.points")
        shapes.append(Shape(label, kind, points))

    return AnnotationRecord(width, height, spacing, tuple(shapes))


def serialize_annotation(record: AnnotationRecord) -> str:
    """Canonical JSON text; parse(serialize(record)) == record."""
    doc = {
        "image_width": record.image_width,
        "image_height": record.image_height,
        "shapes": [
            {"label": s.label, "kind": s.kind, "points": [[float(x), float(y)] for x, y in s.points]}
            for s in record.shapes
        ],
    }
    if record.spacing is not None:
        doc["spacing_mm_per_px"] = record.spacing
    return json.dumps(doc, indent=2, sort_keys=True)


def rasterize_polygon(points, width: int, height: int, spacing: float = 1.0) -> BinaryMask:
    """Even-odd scanline fill; a pixel is set iff its centre is inside.

    Tie rule for centres exactly on a crossing: the left crossing of a span
    is exclusive, the right one inclusive (deterministic and irrelevant for
    generic vertex positions).
    """
    poly = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if poly.shape[0] < 3:
        raise InvalidInputError("polygon needs at least 3 vertices")
    if width < 1 or height < 1:
        raise InvalidInputError(f"raster dimensions must be >= 1, got {width}x{height}")
    x1, y1 = poly[:, 0], poly[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    fg = np.zeros((height, width), dtype=bool)
    for row in range(height):
        yc = row + 0.5
        crossing = ((y1 <= yc) & (y2 > yc)) | ((y2 <= yc) & (y1 > yc))
        if not crossing.any():
            continue
        xs = x1[crossing] + (yc - y1[crossing]) * (x2[crossing] - x1[crossing]) / (y2[crossing] - y1[crossing])
        xs.sort()
        for lo, hi in zip(xs[0::2], xs[1::2]):
            first = int(math.floor(lo - 0.5)) + 1   # smallest x with x + 0.5 > lo
            last = int(math.floor(hi - 0.5))        # largest x with x + 0.5 <= hi
            if last >= 0 and first < width:
                fg[row, max(first, 0):min(last, width - 1) + 1] = True
    return BinaryMask(fg, spacing)


def mask_from_polygon(record: AnnotationRecord, label: str) -> BinaryMask:
    shape = record.find(label)
    if shape is None or shape.kind != KIND_POLYGON:
        raise AnnotationError(f"no polygon labelled {label!r}", "$.shapes")
    return rasterize_polygon(shape.points, record.image_width, record.image_height,
                             record.spacing if record.spacing is not None else 1.0)


def spacing_from_calibration(record: AnnotationRecord, label: str = "calibration",
                             true_diameter_mm: float = 3.0) -> float:
    """mm/px from a calibration-sphere diameter annotated as a line shape."""
    shape = record.find(label)
    if shape is None:
        raise AnnotationError(f"no calibration shape labelled {label!r}", "$.shapes")
    if shape.kind != KIND_LINE:
        raise AnnotationError(f"calibration shape must be a line, got {shape.kind!r}", "$.shapes")
    diameter_px = float(np.linalg.norm(shape.points[1] - shape.points[0]))
    if not diameter_px > 0:
        raise AnnotationError("calibration line has zero length", "$.shapes")
    if not true_diameter_mm > 0:
        raise InvalidInputError(f"true diameter must be positive, got {true_diameter_mm}")
    return true_diameter_mm / diameter_px
