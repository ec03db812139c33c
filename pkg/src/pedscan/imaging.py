"""Thermal image representation, PGM/PNG I/O and annotated rendering.

Images are 8-bit grayscale rasters stored row-major with the origin at the
top-left corner, x growing rightward and y growing downward.  Every geometric
routine in the package uses that frame.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image

from .errors import ImageFormatError

PathLike = Union[str, Path]

#: Degrees Celsius per intensity level used for report labels when no
#: sidecar calibration is available (5 levels stay under 1 degree).
DEFAULT_CELSIUS_PER_LEVEL = 0.2

TAG_COLORS = {
    "abnormal": (255, 0, 0),
    "grid": (0, 200, 0),
    "edge": (255, 200, 0),
    "heel": (0, 80, 255),
    "centroid": (0, 220, 220),
}
_FALLBACK_COLOR = (255, 0, 255)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ThermalImage:
    """An 8-bit grayscale thermal image.

    ``pixels`` is a read-only ``(height, width)`` uint8 array.  ``calibration``
    is an optional degrees-Celsius-per-level factor that is only ever used to
    label reports.
    """

    pixels: np.ndarray
    calibration: Optional[float] = None

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2:
            raise ImageFormatError(f"expected a 2-D intensity grid, got shape {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ImageFormatError("zero-dimension image")
        if pixels.dtype != np.uint8:
            if not np.issubdtype(pixels.dtype, np.integer):
                raise ImageFormatError(f"intensities must be integers, got {pixels.dtype}")
            if pixels.min() < 0 or pixels.max() > 255:
                raise ImageFormatError("intensities must lie in [0, 255]")
            pixels = pixels.astype(np.uint8)
        if self.calibration is not None and not self.calibration > 0:
            raise ImageFormatError("calibration must be a positive number")
        object.__setattr__(self, "pixels", _frozen(pixels))

    @classmethod
    def from_values(cls, width: int, height: int, values: Sequence[int],
                    calibration: Optional[float] = None) -> "ThermalImage":
        """Build an image from a flat row-major list of intensities."""
        if len(values) != width * height:
            raise ImageFormatError(
                f"expected {width * height} intensities for {width}x{height}, got {len(values)}")
        return cls(np.asarray(values, dtype=np.int64).reshape(height, width), calibration)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def intensities(self) -> list[int]:
        return self.pixels.ravel().tolist()

    @property
    def celsius_per_level(self) -> float:
        return DEFAULT_CELSIUS_PER_LEVEL if self.calibration is None else self.calibration

    def __getitem__(self, xy: Tuple[int, int]) -> int:
        x, y = xy
        return int(self.pixels[y, x])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ThermalImage):
            return NotImplemented
        return (self.calibration == other.calibration
                and np.array_equal(self.pixels, other.pixels))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Foreground/background flags, one per pixel, as a read-only bool array."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits).astype(bool)
        if bits.ndim != 2:
            raise ImageFormatError(f"expected a 2-D mask, got shape {bits.shape}")
        object.__setattr__(self, "bits", _frozen(bits))

    @property
    def width(self) -> int:
        return int(self.bits.shape[1])

    @property
    def height(self) -> int:
        return int(self.bits.shape[0])

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def points(self) -> list[tuple[int, int]]:
        """Foreground pixels as ``(x, y)`` in row-major order."""
        ys, xs = np.nonzero(self.bits)
        return list(zip(xs.tolist(), ys.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Overlay:
    """Point annotations drawn on top of a grayscale image.

    ``points`` holds ``(x, y, tag)`` triples; ``legend`` maps tags to a short
    human-readable meaning.
    """

    points: Tuple[Tuple[int, int, str], ...] = ()
    legend: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple((int(x), int(y), str(t)) for x, y, t in self.points))


# -- reading ---------------------------------------------------------------


def _pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens: list[bytes] = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def _read_pgm(data: bytes) -> np.ndarray:
    tokens, pos = _pgm_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise ImageFormatError(f"not a grayscale PGM (magic {magic!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ImageFormatError("malformed PGM header") from exc
    if width < 1 or height < 1:
        raise ImageFormatError("zero-dimension image")
    if maxval > 255:
        raise ImageFormatError("unsupported bit depth")
    if maxval < 1:
        raise ImageFormatError("malformed PGM maxval")
    if magic == b"P5":
        raster = data[pos + 1:pos + 1 + width * height]
        if len(raster) != width * height:
            raise ImageFormatError("truncated PGM raster")
        pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    else:
        values = data[pos:].split()
        if len(values) < width * height:
            raise ImageFormatError("truncated PGM raster")
        try:
            pixels = np.array([int(v) for v in values[:width * height]], dtype=np.int64)
        except ValueError as exc:
            raise ImageFormatError("non-numeric PGM sample") from exc
        pixels = pixels.reshape(height, width)
    if pixels.max() > maxval:
        raise ImageFormatError("PGM sample exceeds maxval")
    return pixels


def _read_png(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as img:
        if img.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
            raise ImageFormatError("unsupported bit depth")
        if img.mode == "RGB":
            img = img.convert("L")  # ITU-R 601 luma
        elif img.mode != "L":
            raise ImageFormatError(f"unsupported PNG mode {img.mode!r}")
        return np.array(img, dtype=np.uint8)


def sidecar_path(path: PathLike) -> Path:
    """Location of the optional calibration metadata for an image file."""
    return Path(path).with_suffix(".json")


def _read_calibration(path: Path) -> Optional[float]:
    meta = sidecar_path(path)
    if not meta.is_file():
        return None
    try:
        payload = json.loads(meta.read_text())
    except (OSError, ValueError):
        return None
    if isinstance(payload, dict) and "celsius_per_level" in payload:
        return float(payload["celsius_per_level"])
    return None


def load_image(path: PathLike) -> ThermalImage:
    """Read an 8-bit PGM (P2/P5) or PNG file into a :class:`ThermalImage`.

    RGB PNGs are converted by luminance.  A ``<name>.json`` sidecar holding
    ``{"celsius_per_level": ...}`` sets the calibration.
    """
    path = Path(path)
    data = path.read_bytes()
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        pixels = _read_png(data)
    elif data[:2] in (b"P2", b"P5"):
        pixels = _read_pgm(data)
    else:
        raise ImageFormatError(f"{path}: not a PGM or PNG file")
    return ThermalImage(pixels, _read_calibration(path))


# -- writing ---------------------------------------------------------------


def _encode_png(array: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(array, dtype=np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


def save_image(image: ThermalImage, path: PathLike) -> None:
    """Write ``image`` as binary PGM (``.pgm``) or grayscale PNG (anything else)."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
        path.write_bytes(header + image.pixels.tobytes())
    else:
        path.write_bytes(_encode_png(image.pixels))


def save_mask(mask: BinaryMask, path: PathLike) -> None:
    """Write a mask as a 0/255 grayscale image."""
    save_image(ThermalImage(mask.bits.astype(np.uint8) * 255), path)


def render_annotated(image: ThermalImage, overlays: Iterable[Overlay]) -> np.ndarray:
    """RGB array with overlay points recolored; later overlays paint on top."""
    rgb = np.repeat(image.pixels[:, :, None], 3, axis=2).copy()
    for overlay in overlays:
        for x, y, tag in overlay.points:
            if not (0 <= x < image.width and 0 <= y < image.height):
                raise ValueError(f"overlay point ({x}, {y}) outside {image.width}x{image.height} image")
            rgb[y, x] = TAG_COLORS.get(tag, _FALLBACK_COLOR)
    return rgb


def save_annotated(image: ThermalImage, overlays: Iterable[Overlay], path: PathLike) -> None:
    """Write a color PNG of ``image`` with overlay points painted in."""
    rgb = render_annotated(image, overlays)
    Path(path).write_bytes(_encode_png(rgb))


def apply_mask(image: ThermalImage, mask: BinaryMask) -> ThermalImage:
    """Zero every background pixel, leaving foreground intensities untouched."""
    if mask.bits.shape != image.pixels.shape:
        raise ValueError(
            f"mask {mask.width}x{mask.height} does not match image {image.width}x{image.height}")
    return ThermalImage(np.where(mask.bits, image.pixels, 0).astype(np.uint8), image.calibration)
