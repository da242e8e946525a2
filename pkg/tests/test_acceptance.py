"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines; every
tolerance is pinned here.
"""

import json
import math
import time

import numpy as np
import pytest

import boneaxis as ba
from boneaxis.cli import main as cli_main
from boneaxis.errors import (
    InsufficientSupportError,
    InvalidSubdivisionError,
)
from helpers import (
    angle_diff_deg,
    asd_hd_bruteforce,
    grid_fit_angle,
    random_blob_mask,
    rotate_mask_nn,
    rotate_point,
)

SUITE_SEED = 20240317


def check(criterion, condition, detail):
    print(f"[{'PASS' if condition else 'FAIL'}] {criterion}: {detail}")
    assert condition, f"{criterion}: {detail}"


def run_suite(noise_amp):
    specs = ba.sample_specs(200, seed=SUITE_SEED, rotation_range=(0.0, 180.0),
                            truncation_range=(0.0, 0.4), convergence_range=(0.0, 5.0),
                            contour_noise_amp=noise_amp)
    start = time.perf_counter()
    records = []
    for spec in specs:
        truth = ba.generate(spec)
        outcome = ba.detect_axis(truth.mask, truth.roi_anterior, truth.roi_posterior)
        records.append((truth, outcome))
    return records, time.perf_counter() - start


@pytest.fixture(scope="module")
def noiseless_suite():
    return run_suite(0.0)


@pytest.fixture(scope="module")
def noisy_suite():
    return run_suite(1.0)


def test_criterion_1_phantom_end_to_end_accuracy(noiseless_suite, noisy_suite):
    records, seconds = noiseless_suite
    errors = np.array([ba.angle_between(outcome.axis_result.axis, truth.axis)
                       for truth, outcome in records])
    noisy_records, noisy_seconds = noisy_suite
    noisy_errors = np.array([ba.angle_between(outcome.axis_result.axis, truth.axis)
                             for truth, outcome in noisy_records])
    total = seconds + noisy_seconds
    ok = (np.median(errors) <= 0.1 and errors.max() <= 0.5
          and np.median(noisy_errors) <= 0.5 and total <= 60.0)
    check("criterion 1 (phantom end-to-end accuracy)", ok,
          f"noiseless median={np.median(errors):.4f} deg (<=0.1), "
          f"max={errors.max():.4f} deg (<=0.5), "
          f"noisy median={np.median(noisy_errors):.4f} deg (<=0.5), "
          f"runtime={total:.1f} s (<=60)")


def test_criterion_2_displacement_property(noiseless_suite):
    records, _ = noiseless_suite
    displacements = np.array([
        ba.displacement_error([outcome.axis_result.m1, outcome.axis_result.m2],
                              truth.axis, spacing=1.0)
        for truth, outcome in records
    ])
    median = float(np.median(displacements))
    check("criterion 2 (midpoint displacement)", median <= 0.5,
          f"median m1/m2 displacement={median:.4f} px (<=0.5 at spacing 1.0)")


def test_criterion_3_regression_oracle():
    rng = np.random.default_rng(424242)
    worst = 0.0
    for _ in range(100):
        angle = rng.uniform(0.0, 180.0)
        u = np.array([math.cos(math.radians(angle)), math.sin(math.radians(angle))])
        count = int(rng.integers(20, 120))
        t = rng.uniform(-60.0, 60.0, size=count)
        points = (rng.uniform(-10, 10, size=2) + t[:, None] * u
                  + rng.normal(0.0, rng.uniform(0.05, 1.0), size=(count, 2)))
        fitted = ba.fit_major_axis(points).angle_deg()
        oracle = grid_fit_angle(points, coarse=0.05, fine=0.001)
        worst = max(worst, angle_diff_deg(fitted, oracle))
    check("criterion 3 (major-axis regression vs grid oracle)", worst <= 0.01,
          f"worst |fit - 0.001deg-grid| = {worst:.6f} deg (<=0.01) over 100 clouds")


def test_criterion_4_roi_formula_checks():
    params = ba.RoiParams(sigma=6.0, truncation=3.0, mask_threshold=1.0)
    segment = ba.RoiSegment((10.5, 20.5), (50.5, 20.5))
    roi = ba.rasterize_roi(segment, params, 64, 64)
    interior = roi.values[20, 30]
    at_sigma = roi.values[26, 30]
    beyond = ba.segment_likelihood(ba.RoiSegment((10.5, 20.0), (50.5, 20.0)), params,
                                   [(30.0, 38.5)])[0]
    column = roi.values[:, 30]
    width = int(np.count_nonzero(column))
    ok = (interior == 1.0
          and abs(at_sigma - math.exp(-0.5)) <= 1e-9
          and beyond == 0.0
          and width == 37)
    check("criterion 4 (ROI formula)", ok,
          f"interior={interior}, value(sigma)={at_sigma:.10f} (exp(-1/2)={math.exp(-0.5):.10f}), "
          f"value(18.5px)={beyond}, orthogonal support={width} px (=37)")


def test_criterion_5_metric_oracles():
    rng = np.random.default_rng(555)
    exact = True
    ordered = True
    for _ in range(50):
        size = int(rng.integers(24, 65))
        a, b = random_blob_mask(rng, size), random_blob_mask(rng, size)
        expected_asd, expected_hd = asd_hd_bruteforce(a.pixels, b.pixels, 1.0)
        overlap = int((a.pixels & b.pixels).sum())
        expected_dice = 2.0 * overlap / (a.foreground_count() + b.foreground_count())
        asd, hd = ba.average_surface_distance(a, b), ba.hausdorff(a, b)
        exact = exact and asd == expected_asd and hd == expected_hd and ba.dice(a, b) == expected_dice
        ordered = ordered and hd >= asd
    identity_mask = random_blob_mask(rng, 48)
    report = ba.segmentation_report(identity_mask, identity_mask)
    identity = (report.dice, report.asd_mm, report.hd_mm) == (1.0, 0.0, 0.0)
    check("criterion 5 (metric oracles)", exact and ordered and identity,
          f"50 random <=64x64 pairs: brute-force match exact={exact}, "
          f"HD>=ASD={ordered}, identity=(1,0,0)={identity}")


def test_criterion_6_two_line_invariants():
    rng = np.random.default_rng(66)
    worst_gap = 0.0
    for _ in range(1000):
        angle = rng.uniform(0.0, 180.0)
        u = np.array([math.cos(math.radians(angle)), math.sin(math.radians(angle))])
        n = np.array([-u[1], u[0]])
        origin = rng.uniform(-50.0, 50.0, size=2)
        width = rng.uniform(0.1, 60.0)
        la, lb = rng.uniform(5.0, 80.0), rng.uniform(5.0, 80.0)
        shift = rng.uniform(-30.0, 30.0)
        seg_a = ba.BoundedSegment(ba.FittedLine.through_points(origin, origin + la * u),
                                  origin, origin + la * u)
        b0 = origin + width * n + shift * u
        seg_b = ba.BoundedSegment(ba.FittedLine.through_points(b0, b0 + lb * u),
                                  b0, b0 + lb * u)
        d1 = float(rng.uniform(0.0, 0.45)) * la
        d2 = float(rng.uniform(0.0, 0.45)) * la
        result = ba.construct_axis(seg_a, seg_b, d1, d2)
        for m in (result.m1, result.m2):
            gap = abs(ba.point_to_line_distance(m, seg_a.line)
                      - ba.point_to_line_distance(m, seg_b.line))
            worst_gap = max(worst_gap, gap)

    # parallel case: exact midline regardless of the subdivision distances
    seg_a = ba.BoundedSegment(ba.FittedLine.through_points((0, 0), (30, 0)),
                              np.array([0.0, 0.0]), np.array([30.0, 0.0]))
    seg_b = ba.BoundedSegment(ba.FittedLine.through_points((-4, 12), (26, 12)),
                              np.array([-4.0, 12.0]), np.array([26.0, 12.0]))
    midline_exact = True
    for d1, d2 in ((0.0, 0.0), (1.0, 13.0), (14.9, 14.9), (7.3, 0.1)):
        result = ba.construct_axis(seg_a, seg_b, d1, d2)
        midline_exact = midline_exact and (
            abs(result.m1[1] - 6.0) <= 1e-9 and abs(result.m2[1] - 6.0) <= 1e-9
            and result.axis.angle_deg() <= 1e-9)
    check("criterion 6 (two-line invariants)", worst_gap <= 1e-6 and midline_exact,
          f"worst equidistance gap={worst_gap:.2e} px (<=1e-6, 1000 parallel pairs), "
          f"exact parallel midline for arbitrary d1/d2={midline_exact}")


def test_criterion_7_equivariance_suite():
    # end-to-end rotation equivariance on resampled noiseless phantoms
    worst_rotation = 0.0
    for base_angle in (20.0, 65.0, 120.0):
        truth = ba.generate(ba.PhantomSpec(shaft_angle=base_angle, truncation_fraction=0.1,
                                           convergence_angle=2.0))
        outcome = ba.detect_axis(truth.mask, truth.roi_anterior, truth.roi_posterior)
        base = outcome.axis_result.axis.angle_deg()
        center = np.array([truth.mask.width / 2.0, truth.mask.height / 2.0])
        for theta in (-45.0, -22.5, -9.0, 9.0, 30.0, 45.0):
            rotated_mask = rotate_mask_nn(truth.mask, theta)
            roi_a = ba.RoiSegment(rotate_point(truth.roi_anterior.start, theta, center),
                                  rotate_point(truth.roi_anterior.end, theta, center), "ant")
            roi_b = ba.RoiSegment(rotate_point(truth.roi_posterior.start, theta, center),
                                  rotate_point(truth.roi_posterior.end, theta, center), "post")
            rotated = ba.detect_axis(rotated_mask, roi_a, roi_b)
            delta = rotated.axis_result.axis.angle_deg() - base
            worst_rotation = max(worst_rotation, angle_diff_deg(delta, theta))

    # ROI likelihood rigid-motion invariance in continuous space
    rng = np.random.default_rng(7007)
    params = ba.RoiParams()
    worst_roi = 0.0
    for _ in range(20):
        segment = ba.RoiSegment(rng.uniform(0, 40, 2), rng.uniform(60, 100, 2))
        points = rng.uniform(-20, 120, size=(100, 2))
        base_values = ba.segment_likelihood(segment, params, points)
        theta = float(rng.uniform(-180, 180))
        shift = rng.uniform(-50, 50, 2)
        pivot = rng.uniform(0, 100, 2)
        moved_segment = ba.RoiSegment(rotate_point(segment.start, theta, pivot) + shift,
                                      rotate_point(segment.end, theta, pivot) + shift)
        moved_points = np.array([rotate_point(p, theta, pivot) + shift for p in points])
        moved_values = ba.segment_likelihood(moved_segment, params, moved_points)
        worst_roi = max(worst_roi, float(np.max(np.abs(moved_values - base_values))))

    check("criterion 7 (equivariance suite)", worst_rotation <= 0.3 and worst_roi <= 1e-9,
          f"end-to-end rotation deviation={worst_rotation:.4f} deg (<=0.3, |theta|<=45), "
          f"ROI rigid-motion deviation={worst_roi:.2e} (<=1e-9)")


def test_criterion_8_determinism(tmp_path):
    dataset_a, dataset_b = tmp_path / "a", tmp_path / "b"
    assert cli_main(["phantom", str(dataset_a), "--count", "4", "--seed", "99"]) == 0
    assert cli_main(["phantom", str(dataset_b), "--count", "4", "--seed", "99"]) == 0

    detect_outputs = []
    for dataset, tag in ((dataset_a, "a"), (dataset_b, "b")):
        json_path = tmp_path / f"axis_{tag}.json"
        overlay_path = tmp_path / f"overlay_{tag}.png"
        assert cli_main(["detect", str(dataset / "case_0000"),
                         "--json", str(json_path), "--out", str(overlay_path)]) == 0
        detect_outputs.append((json_path.read_bytes(), overlay_path.read_bytes()))

    report_outputs = []
    for dataset, tag in ((dataset_a, "a"), (dataset_b, "b")):
        out_dir = tmp_path / f"report_{tag}"
        assert cli_main(["evaluate", str(dataset), "--seed", "7",
                         "--out-dir", str(out_dir), "--report", "csv"]) == 0
        assert cli_main(["evaluate", str(dataset), "--seed", "7",
                         "--out-dir", str(out_dir / "json"), "--report", "json",
                         "--no-figures"]) == 0
        report_outputs.append(((out_dir / "report.csv").read_bytes(),
                               (out_dir / "json" / "report.json").read_bytes()))

    same_inputs = all(
        (dataset_a / case / name).read_bytes() == (dataset_b / case / name).read_bytes()
        for case in ("case_0000", "case_0001", "case_0002", "case_0003")
        for name in ("mask_phantom.png", "annotation.json", "truth.json"))
    same_detect = detect_outputs[0] == detect_outputs[1]
    same_reports = report_outputs[0] == report_outputs[1]
    check("criterion 8 (determinism)", same_inputs and same_detect and same_reports,
          f"identical inputs={same_inputs}, identical detect json+overlay={same_detect}, "
          f"identical evaluate csv+json={same_reports}")


def test_criterion_9_failure_mode_coverage():
    params_ok = []

    empty = ba.BinaryMask(np.zeros((64, 64), dtype=bool))
    roi_a = ba.RoiSegment((5.0, 10.0), (40.0, 10.0), "a")
    roi_b = ba.RoiSegment((5.0, 40.0), (40.0, 40.0), "b")
    try:
        ba.detect_axis(empty, roi_a, roi_b)
        params_ok.append(("empty mask", False, "no error raised"))
    except InsufficientSupportError as exc:
        params_ok.append(("empty mask", exc.stage == "extract_contour",
                          f"InsufficientSupportError at {exc.stage}"))

    truth = ba.generate(ba.PhantomSpec())
    try:
        outcome = ba.detect_axis(truth.mask, truth.roi_anterior, truth.roi_anterior)
        params_ok.append(("single-edge ROIs", "near_zero_axis_width" in outcome.warnings,
                          f"warnings={outcome.warnings}"))
    except ba.DegenerateAxisError as exc:
        params_ok.append(("single-edge ROIs", True, f"DegenerateAxisError at {exc.stage}"))

    config = ba.DetectionConfig(d1=1e5, d2=1e5, distance_mode="px")
    try:
        ba.detect_axis(truth.mask, truth.roi_anterior, truth.roi_posterior, config)
        params_ok.append(("d1+d2 >= length", False, "no error raised"))
    except InvalidSubdivisionError as exc:
        params_ok.append(("d1+d2 >= length", exc.stage == "construct_axis",
                          f"InvalidSubdivisionError at {exc.stage}"))

    all_ok = all(ok for _, ok, _ in params_ok)
    detail = "; ".join(f"{name}: {msg}" for name, _, msg in params_ok)
    check("criterion 9 (failure-mode coverage)", all_ok, detail)
