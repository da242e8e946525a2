"""Command-line interface.

Commands: ``detect`` (one case), ``evaluate`` (dataset with reports and
figures), ``phantom`` (synthetic dataset generation), ``encode-roi``
(export a likelihood map for an annotated segment). Exit codes: 0 on
success, 1 when per-item failures occurred, 2 for invalid invocations.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import BoneAxisError
from .annotations import parse_annotation
from .overlay import render_overlay
from .phantom import PhantomSpec, generate, sample_specs, write_case
from .pipeline import (
    DetectionConfig,
    detect_batch,
    evaluate_case_structure,
    load_case_structure,
    structures_in_case,
)
from .raster import write_likelihood
from .report import detection_json, write_report
from .roi import RoiParams, RoiSegment, rasterize_roi


def _add_detection_flags(parser):
    parser.add_argument("--d1", type=float, default=0.15,
                        help="first subdivision distance (fraction of segment length, or px)")
    parser.add_argument("--d2", type=float, default=0.15,
                        help="second subdivision distance (fraction of segment length, or px)")
    parser.add_argument("--distance-mode", choices=("fraction", "px"), default="fraction")
    parser.add_argument("--sigma", type=float, default=6.0, help="ROI Gaussian std in px")
    parser.add_argument("--truncation", type=float, default=3.0, help="ROI truncation in sigma units")
    parser.add_argument("--threshold", type=float, default=1.0, help="contour mask threshold in sigma units")
    parser.add_argument("--min-support", type=int, default=10,
                        help="minimum retained contour points per ROI")
    parser.add_argument("--subdivide-side", choices=("first_roi", "second_roi"), default="first_roi")
    parser.add_argument("--spacing", type=float, default=None,
                        help="mm per px; overrides the annotation value")


def _config_from_args(args) -> DetectionConfig:
    return DetectionConfig(
        roi_params=RoiParams(sigma=args.sigma, truncation=args.truncation,
                             mask_threshold=args.threshold),
        d1=args.d1,
        d2=args.d2,
        distance_mode=args.distance_mode,
        min_support_points=args.min_support,
        subdivide_side=args.subdivide_side,
    )


def _cmd_detect(args) -> int:
    case_dir = Path(args.case_dir)
    if not case_dir.is_dir():
        print(f"error: {case_dir}: not a directory", file=sys.stderr)
        return 2
    structure = args.structure
    if structure is None:
        structures = structures_in_case(case_dir)
        if len(structures) != 1:
            print(f"error: {case_dir} holds structures {structures}; pick one with --structure",
                  file=sys.stderr)
            return 2
        structure = structures[0]

    config = _config_from_args(args)
    result = evaluate_case_structure(case_dir, structure, config, spacing_override=args.spacing)

    if args.json is not None:
        Path(args.json).write_text(detection_json(result))

    if not result.ok:
        print(f"{result.case}/{structure}: FAILED at {result.stage}: {result.error}", file=sys.stderr)
        return 1

    axis = result.outcome.axis_result.axis
    print(f"{result.case}/{structure}: axis angle {axis.angle_deg():.3f} deg, "
          f"m1=({result.outcome.axis_result.m1[0]:.2f}, {result.outcome.axis_result.m1[1]:.2f}), "
          f"m2=({result.outcome.axis_result.m2[0]:.2f}, {result.outcome.axis_result.m2[1]:.2f})")
    for warning in result.outcome.warnings:
        print(f"warning: {warning}", file=sys.stderr)

    if args.out is not None:
        data = load_case_structure(case_dir, structure, args.spacing)
        image, warnings = render_overlay(data.mask, result.outcome)
        image.save(args.out, format="PNG")
        for warning in warnings:
            print(f"warning: {warning}", file=sys.stderr)
    return 0


def _cmd_evaluate(args) -> int:
    dataset_dir = Path(args.dataset_dir)
    if not dataset_dir.is_dir():
        print(f"error: {dataset_dir}: not a directory", file=sys.stderr)
        return 2
    config = _config_from_args(args)
    results = detect_batch(dataset_dir, config, spacing_override=args.spacing)
    out_dir = Path(args.out_dir) if args.out_dir else dataset_dir / "report"
    written = write_report(results, out_dir, fmt=args.report, seed=args.seed,
                           figures=not args.no_figures)
    if not results:
        print("warning: no cases found; empty report written", file=sys.stderr)
    failed = [r for r in results if not r.ok]
    print(f"evaluated {len(results)} detections, {len(failed)} failed")
    for result in failed:
        print(f"  {result.case}/{result.structure}: {result.stage}: {result.error}", file=sys.stderr)
    for path in written:
        print(f"wrote {path}")
    return 1 if failed else 0


def _cmd_phantom(args) -> int:
    out_dir = Path(args.out_dir)
    base = PhantomSpec(
        image_size=args.image_size,
        shaft_width=args.shaft_width,
        end_blob_radius=args.blob_radius,
        spacing=args.spacing,
    )
    specs = sample_specs(
        args.count,
        args.seed,
        rotation_range=tuple(args.rotation_range),
        truncation_range=tuple(args.truncation_range),
        convergence_range=tuple(args.convergence_range),
        contour_noise_amp=args.noise,
        base=base,
    )
    failures = 0
    for index, spec in enumerate(specs):
        case_dir = out_dir / f"case_{index:04d}"
        try:
            write_case(generate(spec), case_dir, structure=args.structure)
        except BoneAxisError as exc:
            failures += 1
            print(f"error: case_{index:04d}: {exc}", file=sys.stderr)
    print(f"wrote {args.count - failures} phantom cases to {out_dir}")
    return 1 if failures else 0


def _cmd_encode_roi(args) -> int:
    record = parse_annotation(Path(args.annotation).read_text())
    shape = record.find(args.label)
    if shape is None:
        print(f"error: no shape labelled {args.label!r}", file=sys.stderr)
        return 2
    if shape.kind != "line":
        print(f"error: shape {args.label!r} is a {shape.kind}, need a line", file=sys.stderr)
        return 2
    params = RoiParams(sigma=args.sigma, truncation=args.truncation)
    segment = RoiSegment(shape.points[0], shape.points[1], args.label)
    roi = rasterize_roi(segment, params, record.image_width, record.image_height)
    write_likelihood(roi, args.out)
    print(f"wrote {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boneaxis",
        description="Detect the anatomical shaft axis of long bones from binary "
                    "segmentation masks and ROI line segments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="detect the axis for one case directory")
    p_detect.add_argument("case_dir")
    p_detect.add_argument("--structure", default=None, help="structure name (default: the only one)")
    p_detect.add_argument("--out", default=None, help="write an overlay PNG")
    p_detect.add_argument("--json", default=None, help="write the detection as JSON")
    _add_detection_flags(p_detect)
    p_detect.set_defaults(func=_cmd_detect)

    p_eval = sub.add_parser("evaluate", help="detect and evaluate a dataset directory")
    p_eval.add_argument("dataset_dir")
    p_eval.add_argument("--report", choices=("csv", "json"), default="csv")
    p_eval.add_argument("--out-dir", default=None, help="report directory (default: <dataset>/report)")
    p_eval.add_argument("--seed", type=int, default=0, help="bootstrap seed for the CI95 columns")
    p_eval.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    _add_detection_flags(p_eval)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_phantom = sub.add_parser("phantom", help="generate a synthetic phantom dataset")
    p_phantom.add_argument("out_dir")
    p_phantom.add_argument("--count", type=int, default=10)
    p_phantom.add_argument("--seed", type=int, default=0)
    p_phantom.add_argument("--structure", default="phantom")
    p_phantom.add_argument("--image-size", type=int, default=256)
    p_phantom.add_argument("--shaft-width", type=float, default=48.0)
    p_phantom.add_argument("--blob-radius", type=float, default=30.0)
    p_phantom.add_argument("--noise", type=float, default=0.0, help="edge jitter amplitude in px")
    p_phantom.add_argument("--spacing", type=float, default=1.0)
    p_phantom.add_argument("--rotation-range", type=float, nargs=2, default=(0.0, 180.0),
                           metavar=("LO", "HI"))
    p_phantom.add_argument("--truncation-range", type=float, nargs=2, default=(0.0, 0.4),
                           metavar=("LO", "HI"))
    p_phantom.add_argument("--convergence-range", type=float, nargs=2, default=(0.0, 5.0),
                           metavar=("LO", "HI"))
    p_phantom.set_defaults(func=_cmd_phantom)

    p_roi = sub.add_parser("encode-roi", help="rasterize an annotated ROI segment to an image")
    p_roi.add_argument("annotation")
    p_roi.add_argument("--label", required=True)
    p_roi.add_argument("--out", required=True)
    p_roi.add_argument("--sigma", type=float, default=6.0)
    p_roi.add_argument("--truncation", type=float, default=3.0)
    p_roi.set_defaults(func=_cmd_encode_roi)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BoneAxisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
