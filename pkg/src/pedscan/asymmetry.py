"""Left/right thermal comparison: scalable scanning and the overlapping baseline.

Both methods flag a point when the two feet differ by more than a threshold
and mark it on the hotter foot.  Overlapping additionally reports every pixel
covered by only one of the aligned feet.  That ring of single-foot pixels is
how the baseline produces false areas when the projections differ in size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .geometry import LEFT, RIGHT, FootRegion, Point
from .radial import RadialGrid

SCANNING = "scanning"
OVERLAPPING = "overlapping"
METHODS = (SCANNING, OVERLAPPING)

HEALTHY_SAME = "healthy_same"
HEALTHY_DIFFERENT = "healthy_different"
ABNORMAL_SAME = "abnormal_same"
ABNORMAL_DIFFERENT = "abnormal_different"
CATEGORIES = (HEALTHY_SAME, HEALTHY_DIFFERENT, ABNORMAL_SAME, ABNORMAL_DIFFERENT)

#: Mean false points per image at or above which a method is labelled "high".
HIGH_FALSE_POINTS = 20.0


@dataclass(frozen=True)
class AbnormalPoint:
    side: str
    pixel: Point
    delta: int
    is_edge_adjacent: bool = False
    line_index: Optional[int] = None
    sample_index: Optional[int] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "side": self.side,
            "line": self.line_index,
            "sample": self.sample_index,
            "x": self.pixel[0],
            "y": self.pixel[1],
            "delta": self.delta,
            "edge": self.is_edge_adjacent,
        }


@dataclass(frozen=True)
class AsymmetryReport:
    method: str
    points: Tuple[AbnormalPoint, ...]
    threshold_used: int
    edge_margin: int = 0
    edge_excluded: bool = False

    @property
    def per_side_counts(self) -> dict[str, int]:
        counts = {LEFT: 0, RIGHT: 0}
        for p in self.points:
            counts[p.side] += 1
        return counts

    def on_side(self, side: str) -> list[AbnormalPoint]:
        return [p for p in self.points if p.side == side]

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "threshold": self.threshold_used,
            "edge_margin": self.edge_margin,
            "points": [p.to_dict() for p in self.points],
            "counts": self.per_side_counts,
        }


def _hotter(i_left: int, i_right: int) -> str:
    return LEFT if i_left > i_right else RIGHT


def compare_scan(grid_l: RadialGrid, grid_r: RadialGrid, threshold: int,
                 margin: int = 0) -> AsymmetryReport:
    """Compare corresponding samples line by line, centroid outwards.

    A sample is edge-adjacent when fewer than ``max(margin, 1)`` samples
    separate it from the end of its line.  When ``margin > 0`` the last
    ``margin`` samples of every line are left out of the report.  Sides are
    assigned by argument position: ``grid_l`` is the left foot.
    """
    if margin < 0:
        raise ConfigError("edge margin must be non-negative")
    if len(grid_l.lines) != len(grid_r.lines):
        raise ConfigError("grids not built as a pair: different line counts")
    points = []
    for line_l, line_r in zip(grid_l.lines, grid_r.lines):
        n = len(line_l.samples)
        if len(line_r.samples) != n:
            raise ConfigError(f"grids not built as a pair: line {line_l.index} sample counts differ")
        for k, ((p_l, v_l), (p_r, v_r)) in enumerate(zip(line_l.samples, line_r.samples)):
            from_edge = n - 1 - k
            if from_edge < margin:
                continue
            delta = abs(v_l - v_r)
            if delta <= threshold:
                continue
            side = _hotter(v_l, v_r)
            points.append(AbnormalPoint(
                side=side,
                pixel=p_l if side == LEFT else p_r,
                delta=delta,
                is_edge_adjacent=from_edge < max(margin, 1),
                line_index=line_l.index,
                sample_index=k,
            ))
    return AsymmetryReport(SCANNING, tuple(points), threshold, margin, margin > 0)


def overlap_alignment(left: FootRegion, right: FootRegion) -> tuple[int, int]:
    """Integer mirror-and-shift pairing left ``(x, y)`` with right ``(s - x, y + dy)``.

    ``s`` and ``dy`` come from the centroids, so the mirrored right centroid
    lands on the left one up to integer rounding.  Swapping the feet gives
    the same pairing.
    """
    s = round(left.centroid[0] + right.centroid[0])
    dy = round(right.centroid[1] - left.centroid[1])
    return s, dy


def compare_overlap(left: FootRegion, right: FootRegion, threshold: int) -> AsymmetryReport:
    """Mirror the right foot onto the left one and subtract pixel by pixel.

    Pixels where both feet are present are flagged when they differ by more
    than ``threshold``.  Pixels covered by only one foot are always flagged,
    marked edge-adjacent, on the foot that covers them.
    """
    s, dy = overlap_alignment(left, right)
    ly, lx = np.nonzero(left.mask.bits)
    ry, rx = np.nonzero(right.mask.bits)
    # Right pixels expressed in the left foot's frame.
    ax, ay = s - rx, ry - dy
    x0 = int(min(lx.min(), ax.min()))
    y0 = int(min(ly.min(), ay.min()))
    x1 = int(max(lx.max(), ax.max()))
    y1 = int(max(ly.max(), ay.max()))
    shape = (y1 - y0 + 1, x1 - x0 + 1)
    has_l = np.zeros(shape, dtype=bool)
    has_r = np.zeros(shape, dtype=bool)
    val_l = np.zeros(shape, dtype=np.int64)
    val_r = np.zeros(shape, dtype=np.int64)
    has_l[ly - y0, lx - x0] = True
    val_l[ly - y0, lx - x0] = left.image.pixels[ly, lx]
    has_r[ay - y0, ax - x0] = True
    val_r[ay - y0, ax - x0] = right.image.pixels[ry, rx]

    both = has_l & has_r
    delta = np.abs(val_l - val_r)
    flagged = (both & (delta > threshold)) | (has_l ^ has_r)
    rows, cols = np.nonzero(flagged)
    # Single-foot pixels report their own intensity as the difference.
    values = np.where(both, delta, val_l + val_r)[rows, cols]
    on_left = np.where(both, val_l > val_r, has_l)[rows, cols]
    points = [
        AbnormalPoint(LEFT, (x, y), v, not b) if left_side
        else AbnormalPoint(RIGHT, (s - x, y + dy), v, not b)
        for x, y, v, left_side, b in zip((cols + x0).tolist(), (rows + y0).tolist(),
                                         values.tolist(), on_left.tolist(),
                                         both[rows, cols].tolist())
    ]
    return AsymmetryReport(OVERLAPPING, tuple(points), threshold)


# -- corpus evaluation ------------------------------------------------------


@dataclass(frozen=True)
class Hotspot:
    """Ground-truth hot disk used to score detections."""

    center: Tuple[float, float]
    radius: float
    side: str

    def contains(self, pixel: Point) -> bool:
        dx = pixel[0] - self.center[0]
        dy = pixel[1] - self.center[1]
        return dx * dx + dy * dy <= self.radius * self.radius


def hotspot_detected(report: AsymmetryReport, hotspot: Hotspot) -> bool:
    return any(p.side == hotspot.side and hotspot.contains(p.pixel) for p in report.points)


def false_points(report: AsymmetryReport, hotspots: Sequence[Hotspot] = ()) -> list[AbnormalPoint]:
    """Points not explained by any ground-truth hotspot on their own side."""
    return [p for p in report.points
            if not any(h.side == p.side and h.contains(p.pixel) for h in hotspots)]


@dataclass
class CategoryTally:
    images: int = 0
    images_with_detections: int = 0
    images_with_false_points: int = 0
    hotspots_detected: int = 0
    hotspots_total: int = 0
    total_points: int = 0
    false_points: int = 0

    @property
    def images_without(self) -> int:
        return self.images - self.images_with_detections

    @property
    def mean_false_points(self) -> float:
        return self.false_points / self.images if self.images else 0.0

    def false_level(self, high: float = HIGH_FALSE_POINTS) -> str:
        if self.false_points == 0:
            return "none"
        return "high" if self.mean_false_points >= high else "small"

    def to_dict(self) -> dict[str, Any]:
        return {
            "images": self.images,
            "images_with_detections": self.images_with_detections,
            "images_without": self.images_without,
            "images_with_false_points": self.images_with_false_points,
            "hotspots_detected": self.hotspots_detected,
            "hotspots_total": self.hotspots_total,
            "total_points": self.total_points,
            "false_points": self.false_points,
            "mean_false_points": round(self.mean_false_points, 6),
            "false_level": self.false_level(),
        }


@dataclass
class CorpusMetrics:
    tallies: dict[str, dict[str, CategoryTally]] = field(
        default_factory=lambda: {m: {c: CategoryTally() for c in CATEGORIES} for m in METHODS})

    def tally(self, method: str, category: str) -> CategoryTally:
        return self.tallies[method][category]

    def table2(self) -> dict[str, dict[str, Any]]:
        """The four assessment columns per method."""
        out = {}
        for method in METHODS:
            t = self.tallies[method]
            out[method] = {
                "healthy_same_images_with_false_areas": t[HEALTHY_SAME].images_with_detections,
                "healthy_different_images_with_false_areas":
                    t[HEALTHY_DIFFERENT].images_with_detections,
                "abnormal_images_detected":
                    t[ABNORMAL_SAME].hotspots_detected + t[ABNORMAL_DIFFERENT].hotspots_detected,
                "abnormal_different_false_points": t[ABNORMAL_DIFFERENT].false_level(),
            }
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "methods": {m: {c: self.tallies[m][c].to_dict() for c in CATEGORIES} for m in METHODS},
            "table2": self.table2(),
        }


def corpus_metrics(reports: Iterable[Sequence[Any]]) -> CorpusMetrics:
    """Fold ``(category, report)`` or ``(category, report, hotspots)`` items.

    An image counts as having detections when its report holds at least one
    point.  Points inside a same-side ground-truth hotspot are not false.
    """
    metrics = CorpusMetrics()
    for item in reports:
        category, report = item[0], item[1]
        hotspots: Sequence[Hotspot] = item[2] if len(item) > 2 else ()
        if category not in CATEGORIES:
            raise ConfigError(f"unknown category {category!r}")
        if report.method not in METHODS:
            raise ConfigError(f"unknown method {report.method!r}")
        t = metrics.tallies[report.method][category]
        spurious = false_points(report, hotspots)
        t.images += 1
        t.images_with_detections += bool(report.points)
        t.images_with_false_points += bool(spurious)
        t.total_points += len(report.points)
        t.false_points += len(spurious)
        t.hotspots_total += len(hotspots)
        t.hotspots_detected += sum(hotspot_detected(report, h) for h in hotspots)
    return metrics
