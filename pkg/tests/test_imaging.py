import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from pedscan.errors import ImageFormatError
from pedscan.imaging import (DEFAULT_CELSIUS_PER_LEVEL, TAG_COLORS, BinaryMask, Overlay,
                             ThermalImage, apply_mask, load_image, save_annotated, save_image)
from pedscan.synth import corpus_spec, generate


def test_p2_read(tmp_path):
    path = tmp_path / "tiny.pgm"
    path.write_text("P2\n# comment\n2 2\n255\n0 85\n170 255\n")
    image = load_image(path)
    assert image == ThermalImage.from_values(2, 2, [0, 85, 170, 255])
    assert image.intensities == [0, 85, 170, 255]
    assert image.calibration is None


def test_p5_read(tmp_path):
    path = tmp_path / "tiny.pgm"
    path.write_bytes(b"P5\n3 1\n255\n" + bytes([1, 2, 3]))
    assert load_image(path).intensities == [1, 2, 3]


@pytest.mark.parametrize("suffix", [".pgm", ".png"])
def test_round_trip_generated(tmp_path, suffix):
    image, _ = generate(corpus_spec(0, 100))
    path = tmp_path / f"img{suffix}"
    save_image(image, path)
    assert load_image(path) == image


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 9), st.integers(1, 9))))
def test_round_trip_property(tmp_path_factory, pixels):
    image = ThermalImage(pixels)
    folder = tmp_path_factory.mktemp("rt")
    for name in ("a.pgm", "a.png"):
        save_image(image, folder / name)
        assert load_image(folder / name) == image


def test_rgb_png_converted_by_luminance(tmp_path):
    rgb = np.zeros((1, 2, 3), dtype=np.uint8)
    rgb[0, 0] = (90, 90, 90)
    rgb[0, 1] = (255, 0, 0)
    path = tmp_path / "c.png"
    Image.fromarray(rgb).save(path)
    assert load_image(path).intensities == [90, 76]  # 0.299 * 255


def test_sixteen_bit_png_rejected(tmp_path):
    path = tmp_path / "deep.png"
    Image.fromarray(np.full((2, 2), 1000, dtype=np.uint16)).save(path)
    with pytest.raises(ImageFormatError, match="unsupported bit depth"):
        load_image(path)


def test_sixteen_bit_pgm_rejected(tmp_path):
    path = tmp_path / "deep.pgm"
    path.write_text("P2\n1 1\n65535\n300\n")
    with pytest.raises(ImageFormatError, match="unsupported bit depth"):
        load_image(path)


def test_zero_dimension_rejected(tmp_path):
    path = tmp_path / "empty.pgm"
    path.write_text("P2\n0 3\n255\n")
    with pytest.raises(ImageFormatError, match="zero-dimension"):
        load_image(path)


def test_unreadable_file(tmp_path):
    path = tmp_path / "junk.pgm"
    path.write_bytes(b"hello")
    with pytest.raises(ImageFormatError):
        load_image(path)
    with pytest.raises(OSError):
        load_image(tmp_path / "missing.pgm")


def test_invariants_enforced():
    with pytest.raises(ImageFormatError):
        ThermalImage.from_values(2, 2, [1, 2, 3])
    with pytest.raises(ImageFormatError):
        ThermalImage.from_values(1, 1, [256])
    with pytest.raises(ImageFormatError):
        ThermalImage.from_values(1, 1, [-1])


def test_sidecar_calibration(tmp_path):
    path = tmp_path / "cal.pgm"
    save_image(ThermalImage.from_values(1, 1, [7]), path)
    assert load_image(path).celsius_per_level == DEFAULT_CELSIUS_PER_LEVEL
    (tmp_path / "cal.json").write_text(json.dumps({"celsius_per_level": 0.1}))
    assert load_image(path).calibration == 0.1


def _read_rgb(path):
    with Image.open(path) as img:
        return np.array(img.convert("RGB"))


def test_annotated_empty_overlay_is_identity(tmp_path):
    image, _ = generate(corpus_spec(0, 3))
    save_annotated(image, [], tmp_path / "a.png")
    rgb = _read_rgb(tmp_path / "a.png")
    for channel in range(3):
        assert np.array_equal(rgb[:, :, channel], image.pixels)


def test_annotated_single_point(tmp_path):
    image = ThermalImage(np.full((4, 5), 60, dtype=np.uint8))
    save_annotated(image, [Overlay(((0, 0, "abnormal"),), {"abnormal": "hot"})], tmp_path / "a.png")
    rgb = _read_rgb(tmp_path / "a.png")
    assert tuple(rgb[0, 0]) == TAG_COLORS["abnormal"]
    changed = np.any(rgb != 60, axis=2)
    assert changed.sum() == 1 and changed[0, 0]


def test_annotated_deterministic(tmp_path):
    image, _ = generate(corpus_spec(0, 90))
    overlay = Overlay(((10, 10, "grid"), (20, 5, "heel")))
    save_annotated(image, [overlay], tmp_path / "a.png")
    save_annotated(image, [overlay], tmp_path / "b.png")
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


def test_annotated_out_of_bounds():
    image = ThermalImage(np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        save_annotated(image, [Overlay(((2, 0, "grid"),))], io.BytesIO())


def test_apply_mask_examples():
    image = ThermalImage(np.arange(12, dtype=np.uint8).reshape(3, 4))
    assert apply_mask(image, BinaryMask(np.ones((3, 4), bool))) == image
    assert apply_mask(image, BinaryMask(np.zeros((3, 4), bool))).pixels.max() == 0
    flat = ThermalImage(np.full((3, 3), 100, dtype=np.uint8))
    checker = (np.indices((3, 3)).sum(axis=0) % 2) == 0
    assert apply_mask(flat, BinaryMask(checker)).intensities == [100, 0, 100, 0, 100, 0, 100, 0, 100]


def test_apply_mask_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_mask(ThermalImage(np.zeros((2, 2), np.uint8)), BinaryMask(np.ones((2, 3), bool)))


@given(arrays(np.uint8, (6, 7)), arrays(np.bool_, (6, 7)))
def test_apply_mask_property(pixels, bits):
    out = apply_mask(ThermalImage(pixels), BinaryMask(bits)).pixels
    assert np.array_equal(out[bits], pixels[bits])
    assert not out[~bits].any()


def test_image_is_immutable():
    image = ThermalImage.from_values(2, 1, [1, 2])
    with pytest.raises(ValueError):
        image.pixels[0, 0] = 9
