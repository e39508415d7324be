"""Binary PPM/PGM readers and writers."""

import numpy as np
import pytest

from semcom import NetpbmError, read_pgm, read_ppm, write_pgm, write_ppm
from semcom.errors import ShapeError


def test_ppm_round_trip(tmp_path):
    img = np.random.default_rng(1).random((3, 7, 5)).astype(np.float32)
    p = tmp_path / "a.ppm"
    write_ppm(p, img)
    back = read_ppm(p)
    assert back.shape == (3, 7, 5)
    assert back.dtype == np.float32
    # 8-bit quantization bounds the error by half a step
    assert np.abs(back - img).max() <= 0.5 / 255 + 1e-6


def test_ppm_all_white_reads_as_ones(tmp_path):
    p = tmp_path / "w.ppm"
    p.write_bytes(b"P6\n2 2\n255\n" + b"\xff" * 12)
    img = read_ppm(p)
    assert np.array_equal(img, np.ones((3, 2, 2), dtype=np.float32))


def test_ppm_header_comments(tmp_path):
    p = tmp_path / "c.ppm"
    p.write_bytes(b"P6\n# made by hand\n2 1\n# another note\n255\n"
                  + bytes([10, 20, 30, 40, 50, 60]))
    img = read_ppm(p)
    assert img.shape == (3, 1, 2)
    assert img[0, 0, 0] == pytest.approx(10 / 255)
    assert img[2, 0, 1] == pytest.approx(60 / 255)


def test_ppm_truncated_raster_names_file(tmp_path):
    p = tmp_path / "trunc.ppm"
    p.write_bytes(b"P6\n4 4\n255\n" + b"\x00" * 10)  # needs 48 bytes
    with pytest.raises(NetpbmError, match="trunc.ppm"):
        read_ppm(p)


def test_ppm_wrong_magic(tmp_path):
    p = tmp_path / "bad.ppm"
    p.write_bytes(b"P5\n2 2\n255\n" + b"\x00" * 4)
    with pytest.raises(NetpbmError, match="magic"):
        read_ppm(p)


def test_ppm_maxval_over_255_rejected(tmp_path):
    p = tmp_path / "wide.ppm"
    p.write_bytes(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00")
    with pytest.raises(NetpbmError, match="maxval"):
        read_ppm(p)


def test_ppm_scales_nondefault_maxval(tmp_path):
    p = tmp_path / "m15.ppm"
    p.write_bytes(b"P6\n1 1\n15\n" + bytes([15, 0, 3]))
    img = read_ppm(p)
    assert img[0, 0, 0] == pytest.approx(1.0)
    assert img[2, 0, 0] == pytest.approx(3 / 15)


def test_write_ppm_clamps_out_of_range(tmp_path):
    img = np.array([[[-0.5]], [[0.5]], [[1.5]]], dtype=np.float32)
    p = tmp_path / "clamp.ppm"
    write_ppm(p, img)
    back = read_ppm(p)
    assert back[0, 0, 0] == 0.0
    assert back[2, 0, 0] == 1.0


def test_write_ppm_shape_check():
    with pytest.raises(ShapeError):
        write_ppm("/tmp/never.ppm", np.zeros((1, 4, 4)))


def test_pgm_round_trip(tmp_path):
    gray = np.random.default_rng(2).integers(0, 256, (9, 4), dtype=np.uint8)
    p = tmp_path / "g.pgm"
    write_pgm(p, gray)
    assert np.array_equal(read_pgm(p), gray)


def test_pgm_rescales_maxval(tmp_path):
    p = tmp_path / "g1.pgm"
    p.write_bytes(b"P5\n2 1\n1\n" + bytes([1, 0]))
    assert np.array_equal(read_pgm(p), np.array([[255, 0]], dtype=np.uint8))


def test_pgm_truncation_and_magic(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n3 3\n255\n" + b"\x00" * 4)
    with pytest.raises(NetpbmError, match="t.pgm"):
        read_pgm(p)
    q = tmp_path / "m.pgm"
    q.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(NetpbmError, match="magic"):
        read_pgm(q)


def test_pgm_requires_uint8():
    with pytest.raises(ShapeError):
        write_pgm("/tmp/never.pgm", np.zeros((4, 4), dtype=np.float32))
