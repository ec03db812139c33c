"""End-to-end analysis of one thermal image: segment, split, scan, compare."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .asymmetry import AsymmetryReport, compare_overlap, compare_scan
from .errors import ConfigError
from .ga import GAConfig, GAResult, evolve, exhaustive_best_threshold, segment
from .geometry import HEEL_DIRECTION, HEEL_HALF_WIDTH, FootRegion, split_feet
from .imaging import BinaryMask, Overlay, ThermalImage
from .radial import RadialGrid, ScanConfig, build_grids, rounded_centroid

SCAN = "scan"
OVERLAP = "overlap"
BOTH = "both"
METHOD_CHOICES = (SCAN, OVERLAP, BOTH)


@dataclass(frozen=True)
class PipelineConfig:
    ga: GAConfig = GAConfig()
    scan: ScanConfig = ScanConfig()
    method: str = BOTH
    heel_direction: float = HEEL_DIRECTION
    heel_half_width: float = HEEL_HALF_WIDTH
    calibration: Optional[float] = None
    exhaustive: bool = False  # use the 256-level search instead of the GA

    def __post_init__(self) -> None:
        if self.method not in METHOD_CHOICES:
            raise ConfigError(f"method must be one of {METHOD_CHOICES}, got {self.method!r}")
        if self.calibration is not None and not self.calibration > 0:
            raise ConfigError("calibration must be positive")


@dataclass
class Analysis:
    segmentation: GAResult
    mask: BinaryMask
    left: FootRegion
    right: FootRegion
    grids: Optional[tuple[RadialGrid, RadialGrid]] = None
    reports: dict[str, AsymmetryReport] = field(default_factory=dict)


def segment_image(image: ThermalImage, config: PipelineConfig) -> GAResult:
    return exhaustive_best_threshold(image) if config.exhaustive else evolve(image, config.ga)


def analyze(image: ThermalImage, config: PipelineConfig = PipelineConfig()) -> Analysis:
    """Run the full chain and return every intermediate product."""
    result = segment_image(image, config)
    mask = segment(image, result.threshold)
    left, right = split_feet(mask, image, config.heel_direction, config.heel_half_width)
    analysis = Analysis(result, mask, left, right)
    threshold = config.scan.compare_threshold
    if config.method in (SCAN, BOTH):
        grid_l, grid_r = build_grids(left, right, config.scan)
        analysis.grids = (grid_l, grid_r)
        analysis.reports["scanning"] = compare_scan(grid_l, grid_r, threshold,
                                                    config.scan.exclude_edge_margin)
    if config.method in (OVERLAP, BOTH):
        analysis.reports["overlapping"] = compare_overlap(left, right, threshold)
    return analysis


def grid_overlay(analysis: Analysis) -> Overlay:
    """Comparison points of both grids plus centroids and heel points."""
    points = []
    if analysis.grids is not None:
        for grid in analysis.grids:
            points.extend((x, y, "grid") for x, y in grid.sample_points())
    for region in (analysis.left, analysis.right):
        cx, cy = rounded_centroid(region)
        points.append((cx, cy, "centroid"))
        points.append((*region.heel_point, "heel"))
    return Overlay(tuple(points), {"grid": "comparison point", "centroid": "foot centroid",
                                   "heel": "heel point"})


def report_overlay(report: AsymmetryReport) -> Overlay:
    return Overlay(tuple((p.pixel[0], p.pixel[1], "abnormal") for p in report.points),
                   {"abnormal": f"{report.method} abnormal point"})
