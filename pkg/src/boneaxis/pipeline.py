"""Detection pipeline and dataset-level batch evaluation.

detect_axis composes the full path: contour extraction, ROI likelihood
masking, major-axis fits, bounded segments and the two-line construction.
Failures are explicit and staged; there is no silent fallback to the
unmasked contour. detect_batch walks a dataset directory (one
sub-directory per case with ``mask_<structure>.png``, ``annotation.json``,
optional ``roi_<label>.png`` likelihood maps and optional ``truth.json``),
detects every structure and evaluates against ground truth when present;
per-case failures become error records and the batch continues.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotations import KIND_LINE, KIND_POLYGON, AnnotationRecord, mask_from_polygon, parse_annotation
from .errors import BoneAxisError, InsufficientSupportError, InvalidInputError
from .geometry import (
    AxisResult,
    FittedLine,
    bound_segment,
    construct_axis,
    fit_major_axis,
    point_to_line_distance,
)
from .mask import BinaryMask, ContourSet, extract_contour
from .metrics import AxisReport, SegmentationReport, angulation_error, displacement_error, segmentation_report
from .raster import read_likelihood, read_mask
from .roi import LikelihoodMap, RoiParams, RoiSegment, mask_contour, rasterize_roi

FIRST_ROI = "first_roi"
SECOND_ROI = "second_roi"
MODE_FRACTION = "fraction"
MODE_PIXELS = "px"

#: auxiliary lines closer than this (px) trigger the near-zero-width warning
_MIN_AXIS_WIDTH = 2.0

AXIS_KEYS = ("anterior", "posterior", "shaft")


@dataclass(frozen=True)
class DetectionConfig:
    """Tunable knobs of the detection path.

    d1/d2 are fractions of the subdivided segment's length in ``fraction``
    mode (each in (0, 0.5)) or absolute pixel distances in ``px`` mode.
    """

    roi_params: RoiParams = RoiParams()
    d1: float = 0.15
    d2: float = 0.15
    distance_mode: str = MODE_FRACTION
    min_support_points: int = 10
    subdivide_side: str = FIRST_ROI

    def __post_init__(self):
        if self.distance_mode not in (MODE_FRACTION, MODE_PIXELS):
            raise InvalidInputError(f"distance_mode must be '{MODE_FRACTION}' or '{MODE_PIXELS}'")
        if self.subdivide_side not in (FIRST_ROI, SECOND_ROI):
            raise InvalidInputError(f"subdivide_side must be '{FIRST_ROI}' or '{SECOND_ROI}'")
        if self.min_support_points < 2:
            raise InvalidInputError(f"min_support_points must be >= 2, got {self.min_support_points}")
        for name, value in (("d1", self.d1), ("d2", self.d2)):
            if self.distance_mode == MODE_FRACTION:
                if not 0 < value < 0.5:
                    raise InvalidInputError(f"{name} must be in (0, 0.5) in fraction mode, got {value}")
            elif value < 0:
                raise InvalidInputError(f"{name} must be >= 0 in px mode, got {value}")


@dataclass(frozen=True, eq=False)
class DetectionOutcome:
    """Successful detection with per-stage diagnostics."""

    axis_result: AxisResult
    support_counts: dict
    warnings: list
    contour: ContourSet
    supports: dict
    segments: dict


def _staged(stage, fn, *args):
    try:
        return fn(*args)
    except BoneAxisError as exc:
        if exc.stage is None:
            exc.stage = stage
        raise


def _nonempty_contour(mask: BinaryMask) -> ContourSet:
    contour = extract_contour(mask)
    if len(contour) == 0:
        raise InsufficientSupportError("mask has no foreground, contour is empty")
    return contour


def _as_likelihood(roi, params: RoiParams, mask: BinaryMask) -> LikelihoodMap:
    if isinstance(roi, RoiSegment):
        return rasterize_roi(roi, params, mask.width, mask.height)
    if isinstance(roi, LikelihoodMap):
        if roi.values.shape != mask.pixels.shape:
            raise InvalidInputError(
                f"likelihood map shape {roi.values.shape} does not match mask {mask.pixels.shape}")
        return roi
    raise InvalidInputError(f"ROI must be a RoiSegment or LikelihoodMap, got {type(roi).__name__}")


def detect_axis(mask: BinaryMask, roi_a, roi_b, config: DetectionConfig = DetectionConfig(),
                labels=None) -> DetectionOutcome:
    """Run the detection path on one mask with two ROI inputs.

    ROIs may be RoiSegments (rasterized on the fly) or LikelihoodMaps
    (e.g. network predictions loaded from file; those are peak-normalized
    at load time). Deterministic; raises staged errors on failure.
    """
    if labels is None:
        labels = (
            roi_a.label if isinstance(roi_a, RoiSegment) and roi_a.label else "first",
            roi_b.label if isinstance(roi_b, RoiSegment) and roi_b.label else "second",
        )
    label_a, label_b = labels
    if label_a == label_b:
        label_b = label_b + "#2"

    contour = _staged("extract_contour", _nonempty_contour, mask)

    supports, segments = {}, {}
    for label, roi in ((label_a, roi_a), (label_b, roi_b)):
        roi_map = _staged(f"rasterize_roi[{label}]", _as_likelihood, roi, config.roi_params, mask)
        masked = _staged(f"mask_contour[{label}]", mask_contour, contour, roi_map, config.roi_params)
        needed = max(2, config.min_support_points)
        if len(masked) < needed:
            exc = InsufficientSupportError(
                f"ROI '{label}' retains {len(masked)} contour points, need >= {needed}")
            exc.stage = f"mask_contour[{label}]"
            raise exc
        line = _staged(f"fit_major_axis[{label}]", fit_major_axis, masked)
        segments[label] = _staged(f"bound_segment[{label}]", bound_segment, line, masked)
        supports[label] = masked

    if config.subdivide_side == FIRST_ROI:
        sub, opp = segments[label_a], segments[label_b]
    else:
        sub, opp = segments[label_b], segments[label_a]
    if config.distance_mode == MODE_FRACTION:
        d1_px, d2_px = config.d1 * sub.length, config.d2 * sub.length
    else:
        d1_px, d2_px = config.d1, config.d2

    axis_result = _staged("construct_axis", construct_axis, sub, opp, d1_px, d2_px)

    warnings = []
    sep = max(2.0 * point_to_line_distance(axis_result.m1, opp.line),
              2.0 * point_to_line_distance(axis_result.m2, opp.line))
    if sep < _MIN_AXIS_WIDTH:
        warnings.append("near_zero_axis_width")

    return DetectionOutcome(
        axis_result=axis_result,
        support_counts={label_a: len(supports[label_a]), label_b: len(supports[label_b])},
        warnings=warnings,
        contour=contour,
        supports=supports,
        segments=segments,
    )


# ---------------------------------------------------------------------------
# dataset layout
# ---------------------------------------------------------------------------

def line_to_dict(line: FittedLine) -> dict:
    return {
        "point": [float(line.centroid[0]), float(line.centroid[1])],
        "direction": [float(line.direction[0]), float(line.direction[1])],
    }


def line_from_dict(doc: dict) -> FittedLine:
    try:
        return FittedLine(np.asarray(doc["point"], dtype=float),
                          np.asarray(doc["direction"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed line record: {doc!r}") from exc


def discover_cases(dataset_dir) -> list:
    """Case sub-directories in deterministic name order."""
    dataset_dir = Path(dataset_dir)
    if not dataset_dir.is_dir():
        raise InvalidInputError(f"{dataset_dir}: not a directory")
    cases = []
    for entry in sorted(dataset_dir.iterdir()):
        if entry.is_dir() and (
            (entry / "annotation.json").exists()
            or any(entry.glob("mask_*.png"))
            or any(entry.glob("mask_*.pgm"))
        ):
            cases.append(entry)
    return cases


def structures_in_case(case_dir) -> list:
    names = set()
    for pattern in ("mask_*.png", "mask_*.pgm"):
        for path in Path(case_dir).glob(pattern):
            names.add(path.stem[len("mask_"):])
    return sorted(names)


def _read_truth(case_dir) -> dict:
    path = Path(case_dir) / "truth.json"
    if not path.exists():
        return {}
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise InvalidInputError(f"{path}: expected an object keyed by structure")
    truth = {}
    # the document stores the shaft line under "axis"
    key_map = {"anterior": "anterior", "posterior": "posterior", "axis": "shaft"}
    for structure, entry in doc.items():
        lines = {}
        for doc_key, internal in key_map.items():
            if doc_key in entry:
                lines[internal] = line_from_dict(entry[doc_key])
        truth[structure] = {"lines": lines, "spacing": entry.get("spacing_mm_per_px")}
    return truth


@dataclass(frozen=True, eq=False)
class CaseData:
    """Everything loadable for one (case, structure) pair."""

    mask: BinaryMask
    roi_a: object
    roi_b: object
    labels: tuple
    spacing: float
    truth_lines: dict = field(default_factory=dict)
    truth_mask: BinaryMask | None = None


def load_case_structure(case_dir, structure: str, spacing_override: float | None = None) -> CaseData:
    case_dir = Path(case_dir)
    record = None
    annotation_path = case_dir / "annotation.json"
    if annotation_path.exists():
        record = parse_annotation(annotation_path.read_text())

    truth = _read_truth(case_dir).get(structure, {"lines": {}, "spacing": None})

    spacing = spacing_override
    if spacing is None and record is not None:
        spacing = record.spacing
    if spacing is None:
        spacing = truth["spacing"]
    if spacing is None:
        spacing = 1.0

    mask_path = None
    for ext in (".png", ".pgm"):
        candidate = case_dir / f"mask_{structure}{ext}"
        if candidate.exists():
            mask_path = candidate
            break
    if mask_path is None:
        raise InvalidInputError(f"{case_dir}: no mask file for structure '{structure}'")
    mask = read_mask(mask_path, spacing)

    label_a, label_b = f"{structure}_ant", f"{structure}_post"
    rois = []
    for label in (label_a, label_b):
        roi_file = None
        for ext in (".png", ".pgm"):
            candidate = case_dir / f"roi_{label}{ext}"
            if candidate.exists():
                roi_file = candidate
                break
        if roi_file is not None:
            rois.append(read_likelihood(roi_file))
            continue
        shape = record.find(label) if record is not None else None
        if shape is None or shape.kind != KIND_LINE:
            raise InvalidInputError(
                f"{case_dir}: structure '{structure}' has neither a roi_{label} map "
                f"nor a '{label}' line annotation")
        rois.append(RoiSegment(shape.points[0], shape.points[1], label))

    truth_mask = None
    for ext in (".png", ".pgm"):
        candidate = case_dir / f"truth_mask_{structure}{ext}"
        if candidate.exists():
            truth_mask = read_mask(candidate, spacing)
            break
    if truth_mask is None and record is not None:
        shape = record.find(structure)
        if shape is not None and shape.kind == KIND_POLYGON:
            truth_mask = mask_from_polygon(record, structure)

    return CaseData(
        mask=mask,
        roi_a=rois[0],
        roi_b=rois[1],
        labels=(label_a, label_b),
        spacing=float(spacing),
        truth_lines=truth["lines"],
        truth_mask=truth_mask,
    )


@dataclass(eq=False)
class CaseResult:
    """One (case, structure) detection with optional evaluation."""

    case: str
    structure: str
    outcome: DetectionOutcome | None = None
    error: str | None = None
    stage: str | None = None
    seg: SegmentationReport | None = None
    axes: dict = field(default_factory=dict)
    spacing: float = 1.0

    @property
    def ok(self) -> bool:
        return self.error is None


def _evaluate_axes(outcome: DetectionOutcome, labels, truth_lines: dict, spacing: float) -> dict:
    """Angulation and displacement per axis against ground-truth lines.

    Displacement uses each axis' control points: the bounded-segment
    endpoints for the auxiliary lines, m1/m2 for the shaft axis.
    """
    label_a, label_b = labels
    seg_a, seg_b = outcome.segments[label_a], outcome.segments[label_b]
    predicted = {
        "anterior": (seg_a.line, [seg_a.p_start, seg_a.p_end]),
        "posterior": (seg_b.line, [seg_b.p_start, seg_b.p_end]),
        "shaft": (outcome.axis_result.axis, [outcome.axis_result.m1, outcome.axis_result.m2]),
    }
    reports = {}
    for key in AXIS_KEYS:
        if key not in truth_lines:
            continue
        line, points = predicted[key]
        reports[key] = AxisReport(
            angulation_deg=angulation_error(line, truth_lines[key]),
            displacement_mm=displacement_error(points, truth_lines[key], spacing),
        )
    return reports


def evaluate_case_structure(case_dir, structure: str, config: DetectionConfig = DetectionConfig(),
                            spacing_override: float | None = None) -> CaseResult:
    case_dir = Path(case_dir)
    result = CaseResult(case=case_dir.name, structure=structure)
    try:
        data = load_case_structure(case_dir, structure, spacing_override)
        result.spacing = data.spacing
        outcome = detect_axis(data.mask, data.roi_a, data.roi_b, config, labels=data.labels)
        result.outcome = outcome
        if data.truth_lines:
            result.axes = _evaluate_axes(outcome, data.labels, data.truth_lines, data.spacing)
        if data.truth_mask is not None:
            result.seg = segmentation_report(data.mask, data.truth_mask)
    except (BoneAxisError, OSError) as exc:
        result.error = str(exc)
        result.stage = getattr(exc, "stage", None) or "load"
    return result


def detect_batch(dataset_dir, config: DetectionConfig = DetectionConfig(),
                 spacing_override: float | None = None) -> list:
    """Detect and evaluate every (case, structure) pair of a dataset.

    Results come back keyed and sorted by (case, structure); failures are
    error records, never silently dropped. An empty directory yields an
    empty list.
    """
    results = []
    for case_dir in discover_cases(dataset_dir):
        structures = structures_in_case(case_dir)
        if not structures:
            results.append(CaseResult(case=case_dir.name, structure="",
                                      error="no mask files found", stage="load"))
            continue
        for structure in structures:
            results.append(evaluate_case_structure(case_dir, structure, config, spacing_override))
    return results
