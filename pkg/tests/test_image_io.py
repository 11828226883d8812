import numpy as np
import pytest

from arcellipse.errors import (CorruptFileError, TooSmallError,
                               UnsupportedFormatError)
from arcellipse.image_io import (GrayImage, compute_gradient_map, gaussian_blur,
                                 gaussian_downscale, load_grayscale, write_pgm)

from oracles import discrete_gaussian_center_weight


def write_p2(path, width, height, values, maxval=255):
    body = " ".join(str(v) for v in values)
    path.write_text(f"P2\n{width} {height}\n{maxval}\n{body}\n")


# --- loading ------------------------------------------------------------------

def test_p2_too_small_rejected(tmp_path):
    p = tmp_path / "tiny.pgm"
    write_p2(p, 4, 4, [128] * 16)
    with pytest.raises(TooSmallError):
        load_grayscale(p)


def test_p5_identity_round_trip(tmp_path):
    p = tmp_path / "ramp.pgm"
    payload = bytes(k % 256 for k in range(256))
    p.write_bytes(b"P5\n16 16\n255\n" + payload)
    img = load_grayscale(p)
    assert img.width == 16 and img.height == 16
    flat = img.data.ravel()
    assert all(flat[k] == k % 256 for k in range(256))


def test_p2_with_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_text("P2\n# a comment\n8 8 # inline\n255\n" + " ".join(["7"] * 64))
    img = load_grayscale(p)
    assert np.all(img.data == 7)


def test_p5_payload_truncated(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P5\n16 16\n255\n" + bytes(100))
    with pytest.raises(CorruptFileError):
        load_grayscale(p)


def test_p2_payload_short(tmp_path):
    p = tmp_path / "bad2.pgm"
    write_p2(p, 8, 8, [1] * 50)
    with pytest.raises(CorruptFileError):
        load_grayscale(p)


def test_maxval_16bit_unsupported(tmp_path):
    p = tmp_path / "deep.pgm"
    p.write_text("P2\n8 8\n65535\n" + " ".join(["0"] * 64))
    with pytest.raises(UnsupportedFormatError):
        load_grayscale(p)


def test_unknown_magic(tmp_path):
    p = tmp_path / "junk.img"
    p.write_bytes(b"GIF89a....")
    with pytest.raises(UnsupportedFormatError):
        load_grayscale(p)


def test_png_gray_and_rgb_luma(tmp_path):
    from PIL import Image
    gray = np.arange(256, dtype=np.uint8).reshape(16, 16)
    gp = tmp_path / "g.png"
    Image.fromarray(gray, mode="L").save(gp)
    img = load_grayscale(gp)
    assert np.array_equal(img.data, gray.astype(float))

    red = np.zeros((16, 16, 3), dtype=np.uint8)
    red[..., 0] = 255
    rp = tmp_path / "r.png"
    Image.fromarray(red, mode="RGB").save(rp)
    img = load_grayscale(rp)
    assert np.all(img.data == 76)  # round(0.299 * 255)


def test_png_rgba_unsupported(tmp_path):
    from PIL import Image
    rgba = np.zeros((16, 16, 4), dtype=np.uint8)
    p = tmp_path / "a.png"
    Image.fromarray(rgba, mode="RGBA").save(p)
    with pytest.raises(UnsupportedFormatError):
        load_grayscale(p)


def test_write_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    img = GrayImage.from_array(rng.integers(0, 256, size=(12, 20)).astype(float))
    p = tmp_path / "out.pgm"
    write_pgm(p, img)
    back = load_grayscale(p)
    assert np.array_equal(back.data, img.data)


# --- gradients ------------------------------------------------------------------

def test_gradient_constant_image_all_invalid():
    img = GrayImage.from_array(np.full((20, 20), 55.0))
    gmap = compute_gradient_map(img)
    assert np.all(gmap.magnitude == 0)
    assert not gmap.valid.any()


def test_gradient_vertical_step():
    data = np.full((20, 20), 20.0)
    data[:, 10:] = 220.0
    gmap = compute_gradient_map(GrayImage.from_array(data))
    ys, xs = np.nonzero(gmap.valid)
    assert len(xs) > 0
    assert np.allclose(gmap.gradient_angle[ys, xs], 0.0)
    assert np.allclose(gmap.level_line_angle[ys, xs], 270.0)


def test_gradient_diagonal_ramp():
    ii, jj = np.mgrid[0:30, 0:30]
    img = GrayImage.from_array(4.0 * (ii + jj))
    gmap = compute_gradient_map(img)
    ys, xs = np.nonzero(gmap.valid)
    assert np.all(np.abs(gmap.gradient_angle[ys, xs] - 45.0) < 1.0)


def test_level_line_is_gradient_minus_ninety():
    rng = np.random.default_rng(1)
    img = GrayImage.from_array(rng.uniform(0, 255, size=(24, 24)))
    gmap = compute_gradient_map(img)
    diff = (gmap.level_line_angle - (gmap.gradient_angle - 90.0)) % 360.0
    assert np.all(np.minimum(diff, 360.0 - diff) < 1e-9)


def test_gradient_rotation_equivariance():
    rng = np.random.default_rng(2)
    data = rng.uniform(0, 255, size=(24, 24))
    a = compute_gradient_map(GrayImage.from_array(data))
    b = compute_gradient_map(GrayImage.from_array(np.rot90(data)))
    h, w = data.shape
    # Cell (x, y) of the original maps to cell (y, w - 2 - x) of the rotated
    # image; vectors rotate by -90 degrees.
    for y in range(2, h - 3):
        for x in range(2, w - 3):
            if not a.valid[y, x]:
                continue
            ny, nx = w - 2 - x, y
            assert b.valid[ny, nx]
            expected = (a.gradient_angle[y, x] - 90.0) % 360.0
            got = b.gradient_angle[ny, nx]
            delta = abs((got - expected + 180.0) % 360.0 - 180.0)
            assert delta < 1e-9


def test_gradient_offset_invariance():
    rng = np.random.default_rng(3)
    data = rng.uniform(0, 200, size=(16, 16))
    g1 = compute_gradient_map(GrayImage.from_array(data))
    g2 = compute_gradient_map(GrayImage.from_array(data + 55.0))
    assert np.allclose(g1.magnitude, g2.magnitude, atol=1e-9)


def test_edge_ridge_is_thin():
    data = np.full((30, 30), 20.0)
    data[:, 15:] = 220.0
    gmap = compute_gradient_map(GrayImage.from_array(data))
    # A hard vertical step: exactly one ridge column.
    ridge_cols = {x for y, x in zip(*np.nonzero(gmap.edge_max))}
    assert len(ridge_cols) == 1


# --- downscale --------------------------------------------------------------------

def test_downscale_identity_at_scale_one():
    rng = np.random.default_rng(4)
    img = GrayImage.from_array(rng.uniform(0, 255, size=(40, 50)))
    out = gaussian_downscale(img, 1.0)
    assert out is img


def test_downscale_dimensions():
    img = GrayImage.from_array(np.zeros((100, 100)))
    out = gaussian_downscale(img, 0.8)
    assert out.width == 80 and out.height == 80
    out = gaussian_downscale(img, 0.33)
    assert out.width == 33 and out.height == 33


def test_downscale_rejects_bad_scale():
    img = GrayImage.from_array(np.zeros((20, 20)))
    with pytest.raises(ValueError):
        gaussian_downscale(img, 0.0)
    with pytest.raises(ValueError):
        gaussian_downscale(img, 1.5)


def test_blur_impulse_matches_discrete_gaussian_peak():
    # scale 0.8 implies sigma = 0.6 / 0.8 = 0.75
    sigma = 0.75
    data = np.zeros((41, 41))
    data[20, 20] = 1000.0
    blurred = gaussian_blur(GrayImage.from_array(data), sigma)
    w0 = discrete_gaussian_center_weight(sigma)
    assert abs(blurred.data[20, 20] - 1000.0 * w0 * w0) < 1e-6 * 1000.0
