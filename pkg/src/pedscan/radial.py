"""Radial sampling grids that put two differently sized feet in correspondence.

Both feet are swept by ``lines`` rays from the centroid, starting at the heel
direction.  The left foot is sampled every ``step_l`` raster pixels.  On the
right foot, line ``i`` uses ``step_l * len_right(i) / len_left(i)`` and is
forced to the left line's sample count.  Corresponding lines therefore carry
the same number of comparison points whatever the two projections look like.

The right foot is swept in the mirrored sense so that line ``i`` lands on
the same anatomical side of both feet.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, GeometryError
from .geometry import FootRegion, Point, bresenham

MAX_ANGLE_STEP = math.radians(5.0)
MIN_LINES = 72
TWO_PI = 2.0 * math.pi
ANGLE_TIE = 1e-9


@dataclass(frozen=True)
class ScanConfig:
    lines: int = 72
    step_l: int = 4
    compare_threshold: int = 5
    exclude_edge_margin: int = 1

    def __post_init__(self) -> None:
        angle_step(self.lines)
        if self.step_l < 1:
            raise ConfigError("step_l must be at least 1 pixel")
        if self.exclude_edge_margin < 0:
            raise ConfigError("exclude_edge_margin must be non-negative")
        if not 0 <= self.compare_threshold <= 255:
            raise ConfigError("compare_threshold must be an intensity level in [0, 255]")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScanConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown ScanConfig keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class RadialLine:
    index: int
    angle: float
    edge_point: Point
    raster: Tuple[Point, ...]
    step: float
    sample_indices: Tuple[int, ...]
    samples: Tuple[Tuple[Point, int], ...]

    @property
    def length(self) -> int:
        return len(self.raster)

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "angle": round(self.angle, 6),
            "edge_point": list(self.edge_point),
            "length": self.length,
            "step": round(self.step, 6),
            "samples": [[p[0], p[1], v] for p, v in self.samples],
        }


@dataclass(frozen=True)
class RadialGrid:
    side: str
    lines: Tuple[RadialLine, ...]
    config: ScanConfig

    def sample_counts(self) -> list[int]:
        return [len(line.samples) for line in self.lines]

    def sample_points(self) -> list[Point]:
        return [p for line in self.lines for p, _ in line.samples]

    def to_dict(self) -> dict[str, Any]:
        return {
            "side": self.side,
            "config": self.config.to_dict(),
            "lines": [line.to_dict() for line in self.lines],
        }


def angle_step(lines: int) -> float:
    """Angular spacing of ``lines`` rays; must not exceed five degrees."""
    if lines < MIN_LINES:
        raise ConfigError(f"angle step exceeds five degrees ({lines} lines < {MIN_LINES})")
    return TWO_PI / lines


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def reference_angle(region: FootRegion) -> float:
    cx, cy = region.centroid
    hx, hy = region.heel_point
    return math.atan2(hy - cy, hx - cx) % TWO_PI


def line_angle(region: FootRegion, i: int, step: float, lines: Optional[int] = None,
               mirrored: bool = False) -> float:
    """Direction of ray ``i``: the centroid-to-heel direction turned by ``i`` steps.

    The turn is counter-clockwise, or clockwise when ``mirrored``.  The result
    lies in [0, 2*pi).
    """
    count = lines if lines is not None else int(round(TWO_PI / step))
    if not 0 <= i < count:
        raise ConfigError(f"line index {i} outside [0, {count})")
    sign = -1.0 if mirrored else 1.0
    return (reference_angle(region) + sign * i * step) % TWO_PI


def _edge_polar(region: FootRegion) -> tuple[np.ndarray, np.ndarray]:
    edge = np.asarray(region.edge, dtype=float)
    dx = edge[:, 0] - region.centroid[0]
    dy = edge[:, 1] - region.centroid[1]
    return np.arctan2(dy, dx) % TWO_PI, np.hypot(dx, dy)


def _nearest_edge(region: FootRegion, theta: float, angles: np.ndarray,
                  radii: np.ndarray) -> Point:
    diff = np.abs((angles - theta) % TWO_PI)
    diff = np.minimum(diff, TWO_PI - diff)
    candidates = np.flatnonzero(diff <= diff.min() + ANGLE_TIE)
    # Largest radius among angular ties, then the earliest edge index.
    best = candidates[np.argmax(radii[candidates])]
    return tuple(region.edge[int(best)])  # type: ignore[return-value]


def edge_intersection(region: FootRegion, theta: float) -> Point:
    """Edge pixel whose polar angle about the centroid is closest to ``theta``."""
    if not region.edge:
        raise GeometryError("edge intersection on an empty edge")
    angles, radii = _edge_polar(region)
    return _nearest_edge(region, theta, angles, radii)


def rounded_centroid(region: FootRegion) -> Point:
    return _round_half_up(region.centroid[0]), _round_half_up(region.centroid[1])


def sample_indices(length: int, step_px: float, count: Optional[int] = None) -> list[int]:
    """Raster indices ``round(k * step_px)`` clamped to the last pixel.

    Without ``count`` the line takes ``floor((length - 1) / step_px) + 1``
    samples.  Clamped duplicates are kept so a forced count is met exactly.
    """
    if step_px <= 0:
        raise ConfigError("sampling step must be positive")
    if length < 1:
        raise GeometryError("cannot sample an empty raster")
    n = count if count is not None else int(math.floor((length - 1) / step_px)) + 1
    return [min(_round_half_up(k * step_px), length - 1) for k in range(n)]


def _make_line(region: FootRegion, index: int, theta: float, edge_point: Point,
               step_px: float, count: Optional[int]) -> RadialLine:
    raster = tuple(bresenham(rounded_centroid(region), edge_point))
    picks = sample_indices(len(raster), step_px, count)
    pixels = region.image.pixels
    samples = tuple((raster[j], int(pixels[raster[j][1], raster[j][0]])) for j in picks)
    return RadialLine(index, theta, edge_point, raster, float(step_px), tuple(picks), samples)


def sample_line(region: FootRegion, i: int, step_px: float, count: Optional[int] = None,
                lines: int = MIN_LINES, mirrored: bool = False) -> RadialLine:
    """Rasterise ray ``i`` from the rounded centroid to the edge and pick samples."""
    step = angle_step(lines)
    theta = line_angle(region, i, step, lines, mirrored)
    return _make_line(region, i, theta, edge_intersection(region, theta), step_px, count)


def _rays(region: FootRegion, lines: int, mirrored: bool) -> list[tuple[float, Point]]:
    step = angle_step(lines)
    angles, radii = _edge_polar(region)
    out = []
    for i in range(lines):
        theta = line_angle(region, i, step, lines, mirrored)
        out.append((theta, _nearest_edge(region, theta, angles, radii)))
    return out


def build_grids(left: FootRegion, right: FootRegion,
                config: ScanConfig = ScanConfig()) -> tuple[RadialGrid, RadialGrid]:
    """Sample both feet so every pair of corresponding lines has equal counts."""
    left_lines = []
    right_lines = []
    left_rays = _rays(left, config.lines, mirrored=False)
    right_rays = _rays(right, config.lines, mirrored=True)
    for i in range(config.lines):
        theta_l, edge_l = left_rays[i]
        line_l = _make_line(left, i, theta_l, edge_l, config.step_l, None)
        if line_l.length < 2:
            raise GeometryError(f"degenerate radial line {i} on the left foot")
        theta_r, edge_r = right_rays[i]
        len_r = len(bresenham(rounded_centroid(right), edge_r))
        step_r = config.step_l * (len_r / line_l.length)
        line_r = _make_line(right, i, theta_r, edge_r, step_r, len(line_l.samples))
        left_lines.append(line_l)
        right_lines.append(line_r)
    return (RadialGrid(left.side, tuple(left_lines), config),
            RadialGrid(right.side, tuple(right_lines), config))


def length_ratios(grid_l: RadialGrid, grid_r: RadialGrid) -> list[float]:
    """Per-line ``len_right / len_left``."""
    return [r.length / l.length for l, r in zip(grid_l.lines, grid_r.lines)]
