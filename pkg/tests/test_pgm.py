"""PGM round-trip and format validation."""

import numpy as np
import pytest

from fingersense.pgm import read_pgm, write_pgm


def test_round_trip_is_byte_exact(tmp_path):
    rng = np.random.default_rng(0)
    image = rng.integers(0, 256, size=(48, 64), dtype=np.uint8)
    path = tmp_path / "img.pgm"
    write_pgm(path, image)
    np.testing.assert_array_equal(read_pgm(path), image)


def test_header_layout(tmp_path):
    image = np.zeros((2, 3), dtype=np.uint8)
    path = tmp_path / "img.pgm"
    write_pgm(path, image)
    assert path.read_bytes() == b"P5\n3 2\n255\n" + b"\x00" * 6


def test_read_accepts_header_comments(tmp_path):
    path = tmp_path / "img.pgm"
    path.write_bytes(b"P5\n# a comment\n3 2\n255\n" + bytes(range(6)))
    image = read_pgm(path)
    assert image.shape == (2, 3)
    assert image[1, 2] == 5


def test_write_rejects_non_uint8(tmp_path):
    with pytest.raises(ValueError):
        write_pgm(tmp_path / "x.pgm", np.zeros((2, 2), dtype=np.float64))


def test_read_rejects_wrong_magic(tmp_path):
    path = tmp_path / "x.pgm"
    path.write_bytes(b"P2\n2 2\n255\n0 0 0 0")
    with pytest.raises(ValueError):
        read_pgm(path)


def test_read_rejects_truncated_payload(tmp_path):
    path = tmp_path / "x.pgm"
    path.write_bytes(b"P5\n4 4\n255\n" + b"\x00" * 7)
    with pytest.raises(ValueError):
        read_pgm(path)
