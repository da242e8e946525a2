"""Binary raster masks, cross erosion and cortex contour extraction.

The contour of a mask is the set of foreground pixels removed by eroding
with the cross-shaped 3x3 structuring element (XOR of mask and erosion),
i.e. the foreground pixels with at least one four-neighbour that is
background or outside the image. Out-of-bounds neighbours count as
background, so foreground touching the image border is contour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

#: pixel (x, y) is the continuous point (x + 0.5, y + 0.5) in image space
PIXEL_CENTER = 0.5


@dataclass(frozen=True)
class StructuringElement:
    """Set of integer (dx, dy) neighbour offsets; must contain the origin."""

    offsets: tuple

    def __post_init__(self):
        offsets = tuple((int(dx), int(dy)) for dx, dy in self.offsets)
        if (0, 0) not in offsets:
            raise InvalidInputError("structuring element must contain (0, 0)")
        object.__setattr__(self, "offsets", offsets)


#: four-neighbourhood cross, the default for contour extraction
CROSS = StructuringElement(((-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)))


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """2D foreground raster with isotropic pixel spacing in mm/px.

    ``pixels`` is row-major and indexed ``pixels[y, x]``; any nonzero
    sample counts as foreground (tolerates 0/1 and 0/255 encodings).
    """

    pixels: np.ndarray
    spacing: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError(f"mask must be a non-empty 2D grid, got shape {arr.shape}")
        if not self.spacing > 0:
            raise InvalidInputError(f"spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "pixels", arr.astype(bool))
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def foreground_count(self) -> int:
        return int(self.pixels.sum())

    def is_empty(self) -> bool:
        return not self.pixels.any()


@dataclass(frozen=True, eq=False)
class ContourSet:
    """Contour pixels as integer (x, y) coordinates in row-major scan order."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def centers(self) -> np.ndarray:
        """Continuous pixel-centre coordinates, float array of shape (N, 2)."""
        return self.points.astype(np.float64) + PIXEL_CENTER


def erode(mask: BinaryMask, se: StructuringElement = CROSS) -> BinaryMask:
    """Morphological erosion with out-of-bounds neighbours as background.

    Output pixel (x, y) is foreground iff every (x + dx, y + dy) over the
    element's offsets is in bounds and foreground. Dimensions and spacing
    are preserved.
    """
    fg = mask.pixels
    h, w = fg.shape
    out = np.ones_like(fg)
    for dx, dy in se.offsets:
        shifted = np.zeros_like(fg)
        y0, y1 = max(0, -dy), min(h, h - dy)
        x0, x1 = max(0, -dx), min(w, w - dx)
        if y0 < y1 and x0 < x1:
            shifted[y0:y1, x0:x1] = fg[y0 + dy:y1 + dy, x0 + dx:x1 + dx]
        out &= shifted
    return BinaryMask(out, mask.spacing)


def extract_contour(mask: BinaryMask) -> ContourSet:
    """Cortex contour: foreground pixels lost under cross erosion.

    Equivalent to XOR of the mask with its erosion; an empty mask yields an
    empty contour.
    """
    rim = mask.pixels & ~erode(mask, CROSS).pixels
    ys, xs = np.nonzero(rim)
    return ContourSet(np.column_stack([xs, ys]))
