"""Synthetic plantar thermal images with ground truth.

A foot is an ellipse body with a heel bulge and five toe lobes, drawn in its own
anatomical frame: ``u`` points medially (big-toe side), ``v`` points toward the
heel, and lengths are in pixels at scale 1.  The right foot is rendered as the
mirror image of the left, so two identical :class:`FootSpec` values placed
symmetrically give a mirror-symmetric pair.

Intensities are integers: rounded smooth fields plus uniform integer noise,
so renders are bit-identical across platforms for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Tuple

import numpy as np

from .asymmetry import (ABNORMAL_DIFFERENT, ABNORMAL_SAME, HEALTHY_DIFFERENT,
                        HEALTHY_SAME, Hotspot)
from .errors import ConfigError
from .geometry import LEFT, RIGHT
from .imaging import BinaryMask, ThermalImage

# Anatomical template at scale 1.  The outline is polar about the origin:
# ellipse radius plus Gaussian bumps (angle, height px, angular width rad).
# Angles are atan2(v, u), so -pi/2 points at the toes and +pi/2 at the heel.
BODY_HALF_WIDTH = 17.0
BODY_HALF_LENGTH = 40.0
HEEL_BUMP = (math.pi / 2, 0.5, 0.35)
# The heel ends in a slight point (height px, angular decay rad) so that the
# pixel farthest from the centroid is a well-defined landmark.
HEEL_CUSP = (2.0, 0.10)
TOE_BUMPS = (
    (math.radians(-66.0), 7.0, 0.17),    # hallux
    (math.radians(-90.0), 6.0, 0.12),
    (math.radians(-106.0), 4.5, 0.11),
    (math.radians(-120.0), 3.5, 0.10),
    (math.radians(-133.0), 2.5, 0.09),
)
#: Lowest point of the heel in the anatomical frame.
HEEL_APEX = (0.0, BODY_HALF_LENGTH + HEEL_BUMP[1] + HEEL_CUSP[0])

SEGMENTABILITY_MARGIN = 20

DEFAULT_WIDTH = 200
DEFAULT_HEIGHT = 170
#: Ratio range between the larger and smaller foot in different-size pairs.
SIZE_RATIO_RANGE = (1.1, 1.4)
#: Hotspot deltas in corpus images start at twice the default compare threshold.
MIN_HOTSPOT_DELTA = 10


@dataclass(frozen=True)
class HotspotSpec:
    offset: Tuple[float, float]  # (u, v) in the foot's anatomical frame at scale 1
    radius: float                # image pixels
    delta: int

    def __post_init__(self) -> None:
        if self.delta < 0:
            raise ConfigError("hotspot delta must be non-negative")
        if self.radius <= 0:
            raise ConfigError("hotspot radius must be positive")


@dataclass(frozen=True)
class FootSpec:
    center: Tuple[int, int]
    scale: float = 1.0
    rotation: float = 0.0       # radians, applied in the foot's own frame
    base: float = 120.0
    gradient: float = 0.0       # levels per anatomical pixel toward the heel
    hotspots: Tuple[HotspotSpec, ...] = ()

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ConfigError("foot scale must be positive")


@dataclass(frozen=True)
class BackgroundSpec:
    base: float = 40.0
    gradient: Tuple[float, float] = (0.0, 0.0)  # levels per pixel along x and y


@dataclass(frozen=True)
class SynthSpec:
    left: FootSpec
    right: FootSpec
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    background: BackgroundSpec = BackgroundSpec()
    noise: int = 0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ConfigError("image size must be positive")
        if self.noise < 0:
            raise ConfigError("noise amplitude must be non-negative")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    masks: dict
    heels: dict
    hotspots: Tuple[Hotspot, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "heel": {side: list(p) for side, p in sorted(self.heels.items())},
            "area": {side: int(m.count) for side, m in sorted(self.masks.items())},
            "hotspots": [
                {"side": h.side, "center": [round(h.center[0], 6), round(h.center[1], 6)],
                 "radius": h.radius}
                for h in self.hotspots
            ],
        }

    @staticmethod
    def hotspots_from_dict(data: dict) -> Tuple[Hotspot, ...]:
        return tuple(Hotspot((float(h["center"][0]), float(h["center"][1])), float(h["radius"]),
                             h["side"]) for h in data.get("hotspots", ()))


def _round_half_up(values: np.ndarray) -> np.ndarray:
    return np.floor(values + 0.5)


def _to_anatomical(foot: FootSpec, side: str, xs: np.ndarray, ys: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Image coordinates to the foot's anatomical (u, v) frame at scale 1."""
    rx = xs - foot.center[0]
    ry = ys - foot.center[1]
    if side == RIGHT:
        rx = -rx
    c, s = math.cos(foot.rotation), math.sin(foot.rotation)
    u = (c * rx + s * ry) / foot.scale
    v = (-s * rx + c * ry) / foot.scale
    # The left foot's big toe faces +x in the image (toward the other foot).
    return u, v


def _to_image(foot: FootSpec, side: str, u: float, v: float) -> tuple[float, float]:
    c, s = math.cos(foot.rotation), math.sin(foot.rotation)
    rx = foot.scale * (c * u - s * v)
    ry = foot.scale * (s * u + c * v)
    if side == RIGHT:
        rx = -rx
    return foot.center[0] + rx, foot.center[1] + ry


def outline_radius(phi: np.ndarray) -> np.ndarray:
    """Distance from the template origin to the outline at polar angle ``phi``."""
    radius = 1.0 / np.sqrt((np.cos(phi) / BODY_HALF_WIDTH) ** 2
                           + (np.sin(phi) / BODY_HALF_LENGTH) ** 2)
    for center, height, width in (HEEL_BUMP,) + TOE_BUMPS:
        d = (phi - center + math.pi) % (2 * math.pi) - math.pi
        radius = radius + height * np.exp(-0.5 * (d / width) ** 2)
    d = (phi - math.pi / 2 + math.pi) % (2 * math.pi) - math.pi
    return radius + HEEL_CUSP[0] * np.exp(-np.abs(d) / HEEL_CUSP[1])


def foot_shape(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Template membership test in the anatomical frame."""
    return np.hypot(u, v) <= outline_radius(np.arctan2(v, u))


def _foot_layers(spec: SynthSpec, side: str, xs: np.ndarray, ys: np.ndarray
                 ) -> tuple[np.ndarray, np.ndarray, list[Hotspot], list[np.ndarray]]:
    foot = spec.left if side == LEFT else spec.right
    u, v = _to_anatomical(foot, side, xs, ys)
    mask = foot_shape(u, v)
    warmth = foot.base + foot.gradient * v
    hotspots = []
    disks = []
    for h in foot.hotspots:
        hx, hy = _to_image(foot, side, *h.offset)
        disk = (xs - hx) ** 2 + (ys - hy) ** 2 <= h.radius * h.radius
        hotspots.append(Hotspot((hx, hy), h.radius, side))
        disks.append((disk, h.delta))
    return mask, warmth, hotspots, disks


def generate(spec: SynthSpec) -> tuple[ThermalImage, GroundTruth]:
    """Render one foot pair and its ground truth."""
    ys, xs = np.mgrid[0:spec.height, 0:spec.width].astype(float)
    bg = spec.background
    background = bg.base + bg.gradient[0] * xs + bg.gradient[1] * ys
    smooth = background.copy()
    masks = {}
    heels = {}
    hotspots: list[Hotspot] = []
    for side in (LEFT, RIGHT):
        foot = spec.left if side == LEFT else spec.right
        mask, warmth, spots, disks = _foot_layers(spec, side, xs, ys)
        if not mask.any():
            raise ConfigError(f"{side} foot does not intersect the image")
        if _touches_border(mask):
            raise ConfigError(f"{side} foot extends outside the image")
        if (masks.get(LEFT) is not None) and (masks[LEFT] & mask).any():
            raise ConfigError("feet overlap")
        if warmth[mask].min() < background.max() + SEGMENTABILITY_MARGIN:
            raise ConfigError(f"{side} foot is not {SEGMENTABILITY_MARGIN} levels above background")
        for disk, _ in disks:
            if not (mask | ~disk).all():
                raise ConfigError(f"hotspot on the {side} foot leaves the foot")
        smooth = np.where(mask, warmth, smooth)
        for disk, delta in disks:
            smooth = np.where(disk & mask, smooth + delta, smooth)
        masks[side] = mask
        heels[side] = _landmark(mask, *_to_image(foot, side, *HEEL_APEX))
        hotspots.extend(spots)

    values = _round_half_up(smooth).astype(np.int64)
    if spec.noise:
        rng = np.random.default_rng(spec.rng_seed)
        values = values + rng.integers(-spec.noise, spec.noise + 1, size=values.shape)
    image = ThermalImage(np.clip(values, 0, 255))
    truth = GroundTruth({s: BinaryMask(m) for s, m in masks.items()}, heels, tuple(hotspots))
    return image, truth


def _landmark(mask: np.ndarray, x: float, y: float) -> tuple[int, int]:
    """Foot pixel nearest a template point; the first in raster order wins ties."""
    ys, xs = np.nonzero(mask)
    k = int(np.argmin((xs - x) ** 2 + (ys - y) ** 2))
    return int(xs[k]), int(ys[k])


def _touches_border(mask: np.ndarray) -> bool:
    return bool(mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any())


def _hotspot_fits(foot: FootSpec, hotspot: HotspotSpec, margin: float = 2.0) -> bool:
    """Whether the disk plus ``margin`` pixels stays inside the template."""
    reach = (hotspot.radius + margin) / foot.scale
    angles = np.linspace(0.0, 2 * math.pi, 48, endpoint=False)
    u = hotspot.offset[0] + reach * np.cos(angles)
    v = hotspot.offset[1] + reach * np.sin(angles)
    return bool(foot_shape(u, v).all())


def _corpus_spec(category: str, rng: np.random.Generator, noise: int) -> SynthSpec:
    width, height = DEFAULT_WIDTH, DEFAULT_HEIGHT
    small = float(rng.uniform(0.8, 0.95))
    if category in (HEALTHY_DIFFERENT, ABNORMAL_DIFFERENT):
        ratio = float(rng.uniform(*SIZE_RATIO_RANGE))
        scales = [small, small * ratio]
        if rng.random() < 0.5:
            scales.reverse()
    else:
        scales = [small, small]
    rotation = float(rng.uniform(-0.1, 0.1))
    base = float(rng.uniform(105.0, 135.0))
    gradient = float(rng.uniform(-0.12, 0.12))
    cx_left = int(rng.integers(44, 56))
    cy = int(rng.integers(80, 90))
    shift_x = int(rng.integers(-4, 5))
    shift_y = int(rng.integers(-5, 6))
    bg = BackgroundSpec(base=float(rng.uniform(25.0, 45.0)),
                        gradient=(float(rng.uniform(-0.03, 0.03)), float(rng.uniform(-0.15, 0.0))))
    left = FootSpec((cx_left, cy), scales[0], rotation, base, gradient)
    right = FootSpec((width - 1 - cx_left + shift_x, cy + shift_y), scales[1], rotation, base,
                     gradient)
    if category in (ABNORMAL_SAME, ABNORMAL_DIFFERENT):
        side = LEFT if rng.random() < 0.5 else RIGHT
        foot = left if side == LEFT else right
        while True:
            radius = float(rng.uniform(8.0, 11.0))
            offset = (float(rng.uniform(-12.0, 12.0)), float(rng.uniform(-34.0, 30.0)))
            hotspot = HotspotSpec(offset, radius, int(rng.integers(MIN_HOTSPOT_DELTA + 2, 26)))
            if _hotspot_fits(foot, hotspot):
                break
        foot = replace(foot, hotspots=(hotspot,))
        if side == LEFT:
            left = foot
        else:
            right = foot
    return SynthSpec(left, right, width, height, bg, noise, int(rng.integers(0, 2 ** 63)))


CORPUS_LAYOUT = (
    (HEALTHY_SAME, 40),
    (HEALTHY_DIFFERENT, 40),
    (ABNORMAL_SAME, 30),
    (ABNORMAL_DIFFERENT, 30),
)


def corpus_categories() -> list[str]:
    return [category for category, count in CORPUS_LAYOUT for _ in range(count)]


def corpus_spec(seed: int, index: int, noise: int = 1) -> SynthSpec:
    """Generator settings for corpus image ``index``; depends only on ``(seed, index)``."""
    categories = corpus_categories()
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    return _corpus_spec(categories[index], rng, noise)


def generate_corpus(seed: int = 0, noise: int = 1
                    ) -> list[tuple[str, ThermalImage, GroundTruth]]:
    """Render the 140-image corpus: 40/40 healthy and 30/30 abnormal pairs."""
    out = []
    for index, category in enumerate(corpus_categories()):
        image, truth = generate(corpus_spec(seed, index, noise))
        out.append((category, image, truth))
    return out
