"""Anatomical shaft-axis detection for long bones.

Library and CLI that turn a binary bone segmentation mask plus two
region-of-interest line segments into the anatomical shaft axis: the
cortex contour is extracted by cross erosion and XOR, masked by a Gaussian
likelihood field around each ROI segment, each retained contour region is
fitted by major-axis regression, and the axis is constructed through the
midpoints of two cross-connections between the fitted lines (two-line
method). Ships with segmentation/axis evaluation metrics and a synthetic
phantom generator used as ground-truth oracle.
"""

from .errors import (
    AnnotationError,
    BoneAxisError,
    DegenerateAxisError,
    DegenerateFitError,
    DegenerateSegmentError,
    InsufficientSupportError,
    InvalidInputError,
    InvalidSubdivisionError,
    PhantomError,
    UndefinedMetricError,
)
from .mask import CROSS, BinaryMask, ContourSet, StructuringElement, erode, extract_contour
from .roi import (
    LikelihoodMap,
    RoiParams,
    RoiSegment,
    mask_contour,
    normalize_peak,
    rasterize_roi,
    segment_likelihood,
)
from .geometry import (
    AxisResult,
    BoundedSegment,
    FittedLine,
    angle_between,
    bound_segment,
    canonical_direction,
    construct_axis,
    fit_major_axis,
    point_to_line_distance,
    project_onto_line,
    subdivide,
)
from .metrics import (
    AxisReport,
    SegmentationReport,
    SummaryStats,
    angulation_error,
    average_surface_distance,
    dice,
    displacement_error,
    hausdorff,
    segmentation_report,
    summarize,
)
from .phantom import PhantomSpec, PhantomTruth, generate, sample_specs, write_case
from .pipeline import (
    CaseResult,
    DetectionConfig,
    DetectionOutcome,
    detect_axis,
    detect_batch,
    evaluate_case_structure,
)
from .annotations import (
    AnnotationRecord,
    Shape,
    mask_from_polygon,
    parse_annotation,
    rasterize_polygon,
    serialize_annotation,
    spacing_from_calibration,
)
from .raster import read_likelihood, read_mask, write_likelihood, write_mask
from .overlay import OverlayStyle, render_overlay

__version__ = "0.1.0"
