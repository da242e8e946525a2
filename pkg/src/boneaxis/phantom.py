"""Synthetic long-bone phantoms with exactly known edge lines and axis.

A phantom is a filled quadrilateral shaft: two straight edges placed
symmetrically around a central axis, optionally tilted against each other
(convergence), truncated at the image border, with an optional disk blob
at one end standing in for condylar mass. The edge lines and the bisector
axis are recorded analytically before rasterization, which makes phantoms
usable as ground-truth oracles for the full detection pipeline. Edge noise
is per-edge-pixel uniform jitter driven by the seed; generation is
bit-deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, PhantomError
from .geometry import FittedLine
from .mask import BinaryMask
from .roi import RoiSegment

#: keep ROI endpoints clear of the truncation cap / image border (px)
_BORDER_MARGIN = 10.0
#: keep ROI endpoints clear of blob contour, in units of the default sigma
_BLOB_CLEARANCE = 18.0
#: minimum usable ROI segment length (px)
_MIN_ROI_LENGTH = 20.0


@dataclass(frozen=True)
class PhantomSpec:
    image_size: int = 256
    shaft_angle: float = 90.0
    shaft_width: float = 48.0
    convergence_angle: float = 0.0
    truncation_fraction: float = 0.0
    end_blob_radius: float = 30.0
    contour_noise_amp: float = 0.0
    seed: int = 0
    spacing: float = 1.0

    def __post_init__(self):
        if self.image_size < 32:
            raise InvalidInputError(f"image_size must be >= 32, got {self.image_size}")
        if self.shaft_width < 4:
            raise InvalidInputError(f"shaft_width must be >= 4, got {self.shaft_width}")
        if not 0 <= self.convergence_angle <= 15:
            raise InvalidInputError(f"convergence_angle must be in [0, 15], got {self.convergence_angle}")
        if not 0 <= self.truncation_fraction < 1:
            raise InvalidInputError(f"truncation_fraction must be in [0, 1), got {self.truncation_fraction}")
        if self.end_blob_radius < 0 or self.contour_noise_amp < 0:
            raise InvalidInputError("end_blob_radius and contour_noise_amp must be >= 0")
        if not self.spacing > 0:
            raise InvalidInputError(f"spacing must be positive, got {self.spacing}")


@dataclass(frozen=True, eq=False)
class PhantomTruth:
    mask: BinaryMask
    roi_anterior: RoiSegment
    roi_posterior: RoiSegment
    line_anterior: FittedLine
    line_posterior: FittedLine
    axis: FittedLine


def _rotate(v: np.ndarray, angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def _ray_to_border(origin: np.ndarray, direction: np.ndarray, width: float, height: float) -> float:
    """Largest t >= 0 keeping origin + t*direction inside [0,w] x [0,h]."""
    t = math.inf
    for pos, d, hi in ((origin[0], direction[0], width), (origin[1], direction[1], height)):
        if d > 1e-12:
            t = min(t, (hi - pos) / d)
        elif d < -1e-12:
            t = min(t, -pos / d)
    return t


def _line_in_rect(origin: np.ndarray, direction: np.ndarray, lo: float, hi_x: float, hi_y: float):
    """Parameter interval of origin + s*direction inside [lo,hi_x] x [lo,hi_y]."""
    s_lo, s_hi = -math.inf, math.inf
    for pos, d, low, high in (
        (origin[0], direction[0], lo, hi_x),
        (origin[1], direction[1], lo, hi_y),
    ):
        if abs(d) <= 1e-12:
            if not low <= pos <= high:
                return None
            continue
        a, b = (low - pos) / d, (high - pos) / d
        s_lo, s_hi = max(s_lo, min(a, b)), min(s_hi, max(a, b))
    if s_lo >= s_hi:
        return None
    return s_lo, s_hi


def generate(spec: PhantomSpec) -> PhantomTruth:
    """Rasterize a phantom and return it with its analytic ground truth.

    Raises PhantomError when the requested truncation leaves no usable
    shaft (empty raster or no room for the ROI segments).
    """
    n = spec.image_size
    center = np.array([n / 2.0, n / 2.0])
    theta = math.radians(spec.shaft_angle)
    gamma = math.radians(spec.convergence_angle)
    u = np.array([math.cos(theta), math.sin(theta)])
    nvec = np.array([-math.sin(theta), math.cos(theta)])
    u_a = _rotate(u, +gamma / 2.0)
    u_b = _rotate(u, -gamma / 2.0)
    half_w = spec.shaft_width / 2.0
    a0 = center + half_w * nvec
    b0 = center - half_w * nvec

    # axial extent: nominal bone length shifted so that truncation_fraction
    # of it falls beyond the image border in the -u direction
    t_neg = _ray_to_border(center, -u, n, n)
    t_pos = _ray_to_border(center, u, n, n)
    length = 0.85 * (t_neg + t_pos)
    t_lo = -t_neg - spec.truncation_fraction * length
    t_hi = min(t_lo + length, t_pos)
    t_visible_lo = max(t_lo, -t_neg)

    blob_r = spec.end_blob_radius
    end_margin = blob_r + _BLOB_CLEARANCE if blob_r > 0 else _BORDER_MARGIN
    t_roi_lo = t_visible_lo + _BORDER_MARGIN
    t_roi_hi = t_hi - end_margin
    if t_roi_hi - t_roi_lo < _MIN_ROI_LENGTH:
        raise PhantomError("shaft too truncated to place ROI segments")

    # map axis parameter t to each edge's own parameter s (both edges share
    # the same affine map by symmetry), then keep the ROI inside the image
    k = math.cos(gamma / 2.0)
    s_off = -half_w * math.sin(gamma / 2.0)
    rois = []
    for origin, direction, label in ((a0, u_a, "ant"), (b0, u_b, "post")):
        window = (t_roi_lo * k + s_off, t_roi_hi * k + s_off)
        in_rect = _line_in_rect(origin, direction, _BORDER_MARGIN / 2.0,
                                n - _BORDER_MARGIN / 2.0, n - _BORDER_MARGIN / 2.0)
        if in_rect is None:
            raise PhantomError("edge line misses the image")
        s_lo, s_hi = max(window[0], in_rect[0]), min(window[1], in_rect[1])
        if s_hi - s_lo < _MIN_ROI_LENGTH:
            raise PhantomError("no room for ROI segment on the shaft edge")
        rois.append(RoiSegment(origin + s_lo * direction, origin + s_hi * direction, label))

    # rasterize: signed cross products against each edge, jittered per axial bin
    xs = np.arange(n, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(xs, xs)
    px, py = gx.ravel(), gy.ravel()
    t = (px - center[0]) * u[0] + (py - center[1]) * u[1]
    s_a = u_a[0] * (py - a0[1]) - u_a[1] * (px - a0[0])
    s_b = u_b[0] * (py - b0[1]) - u_b[1] * (px - b0[0])

    n_bins = int(math.ceil(t_hi - t_lo)) + 2
    if spec.contour_noise_amp > 0:
        rng = np.random.default_rng(spec.seed)
        jit_a = rng.uniform(-spec.contour_noise_amp, spec.contour_noise_amp, n_bins)
        jit_b = rng.uniform(-spec.contour_noise_amp, spec.contour_noise_amp, n_bins)
    else:
        jit_a = np.zeros(n_bins)
        jit_b = np.zeros(n_bins)
    bins = np.clip(np.floor(t - t_lo).astype(np.int64), 0, n_bins - 1)

    shaft = (t >= t_lo) & (t <= t_hi) & (s_a <= jit_a[bins]) & (s_b >= -jit_b[bins])
    fg = shaft
    if blob_r > 0:
        blob_center = center + t_hi * u
        fg = fg | ((px - blob_center[0]) ** 2 + (py - blob_center[1]) ** 2 <= blob_r**2)

    mask = BinaryMask(fg.reshape(n, n), spec.spacing)
    if mask.is_empty():
        raise PhantomError("phantom raster is empty")

    return PhantomTruth(
        mask=mask,
        roi_anterior=rois[0],
        roi_posterior=rois[1],
        line_anterior=FittedLine(a0, u_a),
        line_posterior=FittedLine(b0, u_b),
        axis=FittedLine(center, u),
    )


def sample_specs(
    count: int,
    seed: int,
    rotation_range=(0.0, 180.0),
    truncation_range=(0.0, 0.4),
    convergence_range=(0.0, 5.0),
    contour_noise_amp: float = 0.0,
    base: PhantomSpec = PhantomSpec(),
) -> list[PhantomSpec]:
    """Draw reproducible phantom specs with randomized pose parameters."""
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(count):
        specs.append(replace(
            base,
            shaft_angle=float(rng.uniform(*rotation_range)),
            truncation_fraction=float(rng.uniform(*truncation_range)),
            convergence_angle=float(rng.uniform(*convergence_range)),
            contour_noise_amp=contour_noise_amp,
            seed=int(rng.integers(0, 2**31 - 1)),
        ))
    return specs


def write_case(truth: PhantomTruth, case_dir, structure: str = "phantom") -> Path:
    """Persist one phantom as a dataset case directory.

    Writes ``mask_<structure>.png``, an ``annotation.json`` with the two
    ROI line segments and the spacing, and a ``truth.json`` with the
    analytic edge lines and axis.
    """
    from .annotations import AnnotationRecord, Shape, serialize_annotation
    from .pipeline import line_to_dict
    from .raster import write_mask

    case_dir = Path(case_dir)
    case_dir.mkdir(parents=True, exist_ok=True)
    write_mask(truth.mask, case_dir / f"mask_{structure}.png")

    record = AnnotationRecord(
        image_width=truth.mask.width,
        image_height=truth.mask.height,
        spacing=truth.mask.spacing,
        shapes=(
            Shape(f"{structure}_ant", "line",
                  [list(truth.roi_anterior.start), list(truth.roi_anterior.end)]),
            Shape(f"{structure}_post", "line",
                  [list(truth.roi_posterior.start), list(truth.roi_posterior.end)]),
        ),
    )
    (case_dir / "annotation.json").write_text(serialize_annotation(record))

    truth_doc = {
        structure: {
            "spacing_mm_per_px": truth.mask.spacing,
            "axis": line_to_dict(truth.axis),
            "anterior": line_to_dict(truth.line_anterior),
            "posterior": line_to_dict(truth.line_posterior),
        }
    }
    (case_dir / "truth.json").write_text(json.dumps(truth_doc, indent=2, sort_keys=True))
    return case_dir
