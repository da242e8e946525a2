"""Exception types used across the toolkit.

Each failure mode has a dedicated class so callers can react to the exact
condition; the detection pipeline additionally tags raised exceptions with
the name of the stage that failed (``stage`` attribute).
"""


class BoneAxisError(Exception):
    """Base class for all toolkit errors."""

    #: name of the pipeline stage that raised, set by the pipeline wrapper
    stage = None


class InvalidInputError(BoneAxisError):
    """Malformed or inconsistent input values."""


class InsufficientSupportError(BoneAxisError):
    """Too few (distinct) points to support the requested operation."""


class DegenerateFitError(BoneAxisError):
    """Line fit undefined: the point covariance is isotropic."""


class DegenerateSegmentError(BoneAxisError):
    """All support points project onto a single location of the line."""


class InvalidSubdivisionError(BoneAxisError):
    """Subdivision distances do not fit inside the segment."""


class DegenerateAxisError(BoneAxisError):
    """The two constructed midpoints coincide; no axis direction exists."""


class UndefinedMetricError(BoneAxisError):
    """Metric undefined for the given masks, e.g. an empty contour."""


class AnnotationError(BoneAxisError):
    """Annotation file is malformed; ``path`` points at the offending field."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class PhantomError(BoneAxisError):
    """Phantom specification produces an empty or unusable shaft."""
