import numpy as np
import pytest

from reinfer_harness import imageio


def test_float32_round_trip(tmp_path):
    arr = np.linspace(0, 1, 24, dtype=np.float32).reshape(2, 3, 4)
    path = tmp_path / "t.sft"
    imageio.write_tensor(arr, path)
    back = imageio.read_tensor(path)
    assert back.dtype == np.float32
    assert back.shape == (2, 3, 4)
    assert np.array_equal(back, arr)


def test_uint8_round_trip(tmp_path):
    arr = np.arange(12, dtype=np.uint8).reshape(3, 4)
    path = tmp_path / "t.sft"
    imageio.write_tensor(arr, path)
    assert np.array_equal(imageio.read_tensor(path), arr)


def test_uint32_round_trip(tmp_path):
    arr = np.array([0, 1, 2**32 - 1], dtype=np.uint32)
    path = tmp_path / "t.sft"
    imageio.write_tensor(arr, path)
    back = imageio.read_tensor(path)
    assert back.dtype == np.uint32
    assert np.array_equal(back, arr)


def test_reencode_is_byte_identical(tmp_path):
    arr = np.random.default_rng(5).random((7, 9)).astype(np.float32)
    first = tmp_path / "a.sft"
    second = tmp_path / "b.sft"
    imageio.write_tensor(arr, first)
    imageio.write_tensor(imageio.read_tensor(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_read_rejects_bad_magic(tmp_path):
    path = tmp_path / "t.sft"
    path.write_bytes(b"NOPE" + bytes(20))
    with pytest.raises(imageio.FormatError, match="magic"):
        imageio.read_tensor(path)


def test_read_rejects_truncated_payload(tmp_path):
    arr = np.zeros((4, 4), dtype=np.float32)
    path = tmp_path / "t.sft"
    imageio.write_tensor(arr, path)
    blob = path.read_bytes()
    path.write_bytes(blob[:-3])
    with pytest.raises(imageio.FormatError, match="payload"):
        imageio.read_tensor(path)


def test_read_rejects_trailing_bytes(tmp_path):
    arr = np.zeros((4, 4), dtype=np.float32)
    path = tmp_path / "t.sft"
    imageio.write_tensor(arr, path)
    path.write_bytes(path.read_bytes() + b"x")
    with pytest.raises(imageio.FormatError, match="payload"):
        imageio.read_tensor(path)


def test_read_rejects_bad_rank(tmp_path):
    path = tmp_path / "t.sft"
    path.write_bytes(b"SFT1" + bytes([0, 4]) + bytes(16))
    with pytest.raises(imageio.FormatError, match="rank"):
        imageio.read_tensor(path)


def test_read_rejects_unknown_dtype_code(tmp_path):
    path = tmp_path / "t.sft"
    path.write_bytes(b"SFT1" + bytes([9, 1]) + bytes(4))
    with pytest.raises(imageio.FormatError, match="dtype"):
        imageio.read_tensor(path)


def test_read_rejects_nan_payload(tmp_path):
    path = tmp_path / "t.sft"
    import struct

    header = b"SFT1" + bytes([0, 1]) + struct.pack("<I", 2)
    payload = np.array([0.5, np.nan], dtype="<f4").tobytes()
    path.write_bytes(header + payload)
    with pytest.raises(imageio.FormatError, match="finite"):
        imageio.read_tensor(path)


def test_write_rejects_other_dtypes(tmp_path):
    path = tmp_path / "t.sft"
    for arr in (np.zeros(3, dtype=np.float64), np.zeros(3, dtype=np.int64)):
        with pytest.raises(imageio.FormatError, match="dtype"):
            imageio.write_tensor(arr, path)


def test_write_rejects_bad_rank(tmp_path):
    path = tmp_path / "t.sft"
    with pytest.raises(imageio.FormatError, match="rank"):
        imageio.write_tensor(np.zeros((2, 2, 2, 2), dtype=np.float32), path)
    with pytest.raises(imageio.FormatError, match="rank"):
        imageio.write_tensor(np.float32(1.0), path)


def test_write_rejects_non_finite(tmp_path):
    path = tmp_path / "t.sft"
    with pytest.raises(imageio.FormatError, match="finite"):
        imageio.write_tensor(np.array([np.inf], dtype=np.float32), path)


def test_read_image_p6(tmp_path):
    path = tmp_path / "t.ppm"
    pixels = bytes(range(24))
    path.write_bytes(b"P6\n4 2\n255\n" + pixels)
    img = imageio.read_image(path)
    assert img.shape == (2, 4, 3)
    assert img.dtype == np.uint8
    assert img.tobytes() == pixels


def test_read_mask_p5_with_comment(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n# say something\n3 2\n255\n" + bytes([0, 255] * 3))
    mask = imageio.read_mask(path)
    assert mask.shape == (2, 3)
    assert set(np.unique(mask)) == {0, 255}


def test_pnm_wrong_magic_for_kind(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P6\n1 1\n255\n" + bytes(3))
    with pytest.raises(imageio.FormatError, match="P5"):
        imageio.read_mask(path)


def test_pnm_rejects_other_maxval(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n1 1\n15\n" + bytes(1))
    with pytest.raises(imageio.FormatError, match="maxval"):
        imageio.read_mask(path)


def test_pnm_rejects_truncated_pixels(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n4 4\n255\n" + bytes(10))
    with pytest.raises(imageio.FormatError, match="truncated"):
        imageio.read_mask(path)
