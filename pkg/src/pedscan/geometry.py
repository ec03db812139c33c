"""Foot regions and the geometric features the radial scan is anchored on.

Orientation convention: a contour is counter-clockwise when its shoelace sum
``sum(x_i * y_{i+1} - x_{i+1} * y_i)`` is positive in the raster frame
(y pointing down).  Polar angles are ``atan2(dy, dx)`` in the same frame, so
walking a counter-clockwise contour sweeps increasing angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .errors import GeometryError, SegmentationError
from .imaging import BinaryMask, ThermalImage

Point = Tuple[int, int]
RealPoint = Tuple[float, float]

LEFT = "left"
RIGHT = "right"

#: Heel sector defaults: the half-plane below the centroid (image bottom).
HEEL_DIRECTION = math.pi / 2
HEEL_HALF_WIDTH = math.pi / 2

MAX_AREA_RATIO = 10.0

# Moore neighbourhood, counter-clockwise in the sense above: E, SE, S, SW, W, NW, N, NE.
_DIRS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_DIR_INDEX = {d: i for i, d in enumerate(_DIRS)}
_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class FootRegion:
    side: str
    mask: BinaryMask
    centroid: RealPoint
    heel_point: Point
    edge: Tuple[Point, ...]
    image: ThermalImage

    @property
    def area(self) -> int:
        return self.mask.count

    def intensity(self, point: Point) -> int:
        x, y = point
        return int(self.image.pixels[y, x])

    def to_dict(self) -> dict:
        return {
            "side": self.side,
            "area": self.area,
            "centroid": [round(self.centroid[0], 6), round(self.centroid[1], 6)],
            "heel": list(self.heel_point),
            "edge": [list(p) for p in self.edge],
        }


def centroid(mask: BinaryMask) -> RealPoint:
    """Mean ``(x, y)`` of the foreground pixels."""
    ys, xs = np.nonzero(mask.bits)
    if xs.size == 0:
        raise GeometryError("centroid of an empty mask")
    return float(xs.sum()) / xs.size, float(ys.sum()) / ys.size


def shoelace(points: Sequence[Point]) -> float:
    """Signed polygon area; positive means counter-clockwise here."""
    total = 0
    n = len(points)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total / 2.0


def trace_contour(mask: BinaryMask) -> list[Point]:
    """Closed Moore-neighbour walk around the outer boundary of one blob.

    Starts at the top-most, then left-most, foreground pixel and stops as
    soon as a (pixel, entry side) state repeats.  Pixels on one-pixel-wide
    parts appear once per pass, so the walk can repeat pixels.
    """
    bits = np.pad(mask.bits, 1)
    ys, xs = np.nonzero(bits)
    if xs.size == 0:
        raise GeometryError("cannot trace the edge of an empty mask")
    start = (int(xs[0]), int(ys[0]))
    height, width = bits.shape

    # Row-major scan order guarantees the west neighbour of `start` is background.
    current, back = start, _DIR_INDEX[(-1, 0)]
    states = {(current, back)}
    walk = [start]
    while True:
        cx, cy = current
        for step in range(1, 8):
            d = (back + step) % 8
            nx, ny = cx + _DIRS[d][0], cy + _DIRS[d][1]
            if 0 <= nx < width and 0 <= ny < height and bits[ny, nx]:
                px, py = cx + _DIRS[d - 1][0], cy + _DIRS[d - 1][1]
                back = _DIR_INDEX[(px - nx, py - ny)]
                current = (nx, ny)
                break
        else:
            break  # isolated pixel
        if (current, back) in states:
            break
        states.add((current, back))
        walk.append(current)
    if len(walk) > 1 and walk[-1] == start:
        walk.pop()
    return [(x - 1, y - 1) for x, y in walk]


def trace_edge(mask: BinaryMask) -> list[Point]:
    """Counter-clockwise outer edge of one blob, each pixel once.

    The Moore walk from :func:`trace_contour` with repeat visits dropped.
    """
    return list(dict.fromkeys(trace_contour(mask)))


def boundary_pixels(mask: BinaryMask) -> set[Point]:
    """Foreground pixels with a background 4-neighbour or on the image border."""
    bits = np.pad(mask.bits, 1)
    inner = bits[1:-1, 1:-1]
    interior = inner & bits[:-2, 1:-1] & bits[2:, 1:-1] & bits[1:-1, :-2] & bits[1:-1, 2:]
    ys, xs = np.nonzero(inner & ~interior)
    return set(zip(xs.tolist(), ys.tolist()))


def _angle_diff(a: float, b: float) -> float:
    """Absolute circular difference between two angles, in [0, pi]."""
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def heel_point(center: RealPoint, edge: Sequence[Point],
               direction: float = HEEL_DIRECTION,
               half_width: float = HEEL_HALF_WIDTH) -> tuple[Point, int]:
    """Edge point farthest from ``center`` inside the heel sector.

    The sector holds directions within ``half_width`` (exclusive) of
    ``direction``; the default is the open half-plane below the centroid.
    Returns the point and its index in ``edge``; the lowest index wins ties.
    """
    if not edge:
        raise GeometryError("heel search on an empty edge")
    cx, cy = center
    best: Optional[tuple[float, int]] = None
    for index, (x, y) in enumerate(edge):
        dx, dy = x - cx, y - cy
        if dx == 0 and dy == 0:
            continue
        if _angle_diff(math.atan2(dy, dx), direction) >= half_width:
            continue
        dist = dx * dx + dy * dy
        if best is None or dist > best[0]:
            best = (dist, index)
    if best is None:
        raise GeometryError("heel sector empty; check orientation")
    return tuple(edge[best[1]]), best[1]  # type: ignore[return-value]


def bresenham(p0: Point, p1: Point) -> list[Point]:
    """Integer best-fit line from ``p0`` to ``p1``, both endpoints included.

    Along the driving axis every step advances by one pixel; the minor
    coordinate is the one nearest the real line, and an exact half-pixel tie
    keeps the minor coordinate closer to ``p0``.  The offset after ``k`` steps
    is the classic accumulated integer error in closed form.
    """
    x0, y0 = int(p0[0]), int(p0[1])
    x1, y1 = int(p1[0]), int(p1[1])
    dx, dy = x1 - x0, y1 - y0
    sx = 1 if dx >= 0 else -1
    sy = 1 if dy >= 0 else -1
    adx, ady = abs(dx), abs(dy)
    if adx == 0 and ady == 0:
        return [(x0, y0)]
    if adx >= ady:
        den, num, bias = 2 * adx, 2 * ady, adx - 1
        ys = [y0 + sy * ((num * k + bias) // den) for k in range(adx + 1)]
        return list(zip(range(x0, x1 + sx, sx), ys))
    den, num, bias = 2 * ady, 2 * adx, ady - 1
    xs = [x0 + sx * ((num * k + bias) // den) for k in range(ady + 1)]
    return list(zip(xs, range(y0, y1 + sy, sy)))


def label_components(mask: BinaryMask) -> tuple[np.ndarray, list[int]]:
    """8-connected labels plus the pixel count of each label (index 0 unused)."""
    labels, n = ndimage.label(mask.bits, structure=_EIGHT)
    sizes = np.bincount(labels.ravel(), minlength=n + 1).tolist()
    sizes[0] = 0
    return labels, sizes


def build_region(side: str, bits: np.ndarray, image: ThermalImage,
                 heel_direction: float = HEEL_DIRECTION,
                 heel_half_width: float = HEEL_HALF_WIDTH) -> FootRegion:
    """Derive centroid, heel and heel-first edge for one foot mask."""
    mask = BinaryMask(bits)
    center = centroid(mask)
    edge = trace_edge(mask)
    heel, index = heel_point(center, edge, heel_direction, heel_half_width)
    ordered = tuple(edge[index:] + edge[:index])
    return FootRegion(side, mask, center, heel, ordered, image)


def split_feet(mask: BinaryMask, image: ThermalImage,
               heel_direction: float = HEEL_DIRECTION,
               heel_half_width: float = HEEL_HALF_WIDTH) -> tuple[FootRegion, FootRegion]:
    """Keep the two largest blobs as the feet; the one further left is ``left``.

    Every smaller component is treated as noise and dropped.
    """
    if mask.bits.shape != image.pixels.shape:
        raise ValueError("mask and image dimensions differ")
    labels, sizes = label_components(mask)
    ranked = sorted(range(1, len(sizes)), key=lambda k: (-sizes[k], k))
    if len(ranked) < 2:
        raise SegmentationError("single-foot or empty image")
    first, second = ranked[:2]
    if sizes[first] > MAX_AREA_RATIO * sizes[second]:
        raise SegmentationError(
            f"implausible segmentation: largest blobs have {sizes[first]} and {sizes[second]} pixels")
    blobs = [labels == first, labels == second]
    blobs.sort(key=lambda b: centroid(BinaryMask(b))[0])
    left = build_region(LEFT, blobs[0], image, heel_direction, heel_half_width)
    right = build_region(RIGHT, blobs[1], image, heel_direction, heel_half_width)
    return left, right
