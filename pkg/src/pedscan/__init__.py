"""Thermal asymmetry analysis of plantar foot images by scalable radial scanning."""

from .asymmetry import (AbnormalPoint, AsymmetryReport, CorpusMetrics, compare_overlap,
                        compare_scan, corpus_metrics)
from .errors import (ConfigError, GeometryError, ImageFormatError, PedscanError,
                     SegmentationError)
from .ga import GAConfig, GAResult, FitnessStats, evolve, exhaustive_best_threshold, fitness, segment
from .geometry import FootRegion, bresenham, centroid, heel_point, split_feet, trace_edge
from .imaging import BinaryMask, Overlay, ThermalImage, apply_mask, load_image, save_annotated
from .pipeline import PipelineConfig, analyze
from .radial import RadialGrid, RadialLine, ScanConfig, angle_step, build_grids, sample_line
from .synth import GroundTruth, SynthSpec, generate, generate_corpus

__version__ = "0.1.0"
