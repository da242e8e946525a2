"""Shared test utilities: brute-force oracles and raster transforms.

Everything here is deliberately independent of the library's computation
paths: plain per-pixel loops and direct formula evaluation.
"""

from __future__ import annotations

import math

import numpy as np

import boneaxis as ba

FOUR_NEIGHBOURS = ((-1, 0), (0, -1), (0, 1), (1, 0))


def erode_bruteforce(pixels, offsets):
    """Per-pixel neighbourhood check; out of bounds counts as background."""
    h, w = pixels.shape
    out = np.zeros_like(pixels, dtype=bool)
    for y in range(h):
        for x in range(w):
            keep = True
            for dx, dy in offsets:
                xx, yy = x + dx, y + dy
                if not (0 <= xx < w and 0 <= yy < h and pixels[yy, xx]):
                    keep = False
                    break
            out[y, x] = keep
    return out


def contour_bruteforce(pixels):
    """Foreground pixels with a background/out-of-bounds four-neighbour."""
    h, w = pixels.shape
    points = []
    for y in range(h):
        for x in range(w):
            if not pixels[y, x]:
                continue
            for dx, dy in FOUR_NEIGHBOURS:
                xx, yy = x + dx, y + dy
                if not (0 <= xx < w and 0 <= yy < h and pixels[yy, xx]):
                    points.append((x, y))
                    break
    return points


def likelihood_bruteforce(start, end, sigma, truncation, point):
    """Direct evaluation of the capsule likelihood at one continuous point."""
    sx, sy = start
    ex, ey = end
    px, py = point
    length = math.hypot(ex - sx, ey - sy)
    ux, uy = (ex - sx) / length, (ey - sy) / length
    rx, ry = px - sx, py - sy
    t = rx * ux + ry * uy
    d_perp = abs(rx * uy - ry * ux)
    d_par = max(0.0, -t, t - length)
    if d_perp > truncation * sigma or d_par > truncation * sigma:
        return 0.0
    return math.exp(-(d_perp**2 + d_par**2) / (2.0 * sigma * sigma))


def min_distances_bruteforce(pa, pb):
    """Per point of pa: exact distance to the nearest point of pb."""
    out = []
    for x1, y1 in pa:
        best = min((x1 - x2) ** 2 + (y1 - y2) ** 2 for x2, y2 in pb)
        out.append(math.sqrt(best))
    return np.array(out)


def asd_hd_bruteforce(pixels_a, pixels_b, spacing):
    """O(n^2) surface metrics from brute-force contours, scan order."""
    pa = contour_bruteforce(pixels_a)
    pb = contour_bruteforce(pixels_b)
    da = min_distances_bruteforce(pa, pb)
    db = min_distances_bruteforce(pb, pa)
    asd = (da.sum() + db.sum()) / (len(da) + len(db)) * spacing
    hd = max(da.max(), db.max()) * spacing
    return asd, hd


def grid_fit_angle(points, coarse=0.05, fine=0.001):
    """Sweep line angles minimizing the summed squared orthogonal residuals.

    Residuals are evaluated directly from the points at every grid angle.
    The objective is a pure sinusoid in twice the angle with a single
    minimum per half turn, so a coarse pass plus a fine pass around the
    coarse minimum is equivalent to sweeping the full range at the fine
    resolution.
    """
    pts = np.asarray(points, float)
    pts = pts - pts.mean(axis=0)

    def objective(angles_deg):
        th = np.radians(angles_deg)
        normals = np.stack([-np.sin(th), np.cos(th)])
        return ((pts @ normals) ** 2).sum(axis=0)

    coarse_angles = np.arange(0.0, 180.0, coarse)
    best = coarse_angles[np.argmin(objective(coarse_angles))]
    fine_angles = np.arange(best - 2 * coarse, best + 2 * coarse, fine)
    return float(fine_angles[np.argmin(objective(fine_angles))] % 180.0)


def angle_diff_deg(a, b):
    """Acute difference between two undirected line angles in degrees."""
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


def rotate_point(p, theta_deg, center):
    th = math.radians(theta_deg)
    c, s = math.cos(th), math.sin(th)
    rel = np.asarray(p, float) - center
    return center + np.array([c * rel[0] - s * rel[1], s * rel[0] + c * rel[1]])


def rotate_mask_nn(mask, theta_deg):
    """Nearest-neighbour rotation about the image centre (inverse mapping)."""
    h, w = mask.pixels.shape
    th = math.radians(theta_deg)
    c, s = math.cos(th), math.sin(th)
    cx, cy = w / 2.0, h / 2.0
    xs = np.arange(w) + 0.5
    ys = np.arange(h) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    sx = c * (gx - cx) + s * (gy - cy) + cx
    sy = -s * (gx - cx) + c * (gy - cy) + cy
    ix, iy = np.floor(sx).astype(int), np.floor(sy).astype(int)
    ok = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    out = np.zeros_like(mask.pixels)
    out[ok] = mask.pixels[iy[ok], ix[ok]]
    return ba.BinaryMask(out, mask.spacing)


def random_blob_mask(rng, size=48, spacing=1.0):
    """Random non-empty mask: a few rectangles plus scattered pixels."""
    pixels = np.zeros((size, size), dtype=bool)
    for _ in range(rng.integers(1, 4)):
        x0, y0 = rng.integers(0, size - 8, size=2)
        w, h = rng.integers(3, 12, size=2)
        pixels[y0:y0 + h, x0:x0 + w] = True
    extra = rng.integers(0, size, size=(rng.integers(2, 10), 2))
    pixels[extra[:, 1], extra[:, 0]] = True
    return ba.BinaryMask(pixels, spacing)
