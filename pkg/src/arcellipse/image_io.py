"""Grayscale image loading and the gradient / level-line fields.

Angle convention: the image y axis points down, angles come from
atan2(gy, gx) in degrees mapped into [0, 360).  The level-line angle is the
gradient angle rotated by -90 degrees (modulo 360).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import CorruptFileError, TooSmallError, UnsupportedFormatError

MIN_DIMENSION = 8

# Rec. 601 luma weights for true-color inputs.
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class GrayImage:
    """Row-major grayscale raster with intensities in [0, 255]."""

    width: int
    height: int
    data: np.ndarray  # float64, shape (height, width)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "GrayImage":
        arr = np.asarray(array, dtype=float)
        if arr.ndim != 2:
            raise ValueError("grayscale image array must be 2-D")
        h, w = arr.shape
        return cls(w, h, arr)

    def check_detectable(self) -> None:
        if self.width < MIN_DIMENSION or self.height < MIN_DIMENSION:
            raise TooSmallError(
                f"image {self.width}x{self.height} below {MIN_DIMENSION}x{MIN_DIMENSION}")


@dataclass(frozen=True)
class GradientMap:
    """Per-pixel gradient magnitude, gradient angle and level-line angle.

    Gradients use the 2x2 forward-difference cell, so the value stored at
    index (y, x) sits at spatial position (x + 0.5, y + 0.5); the last row
    and column are invalid.  ``valid`` is False wherever the magnitude falls
    below the quantization threshold; ``edge_max`` additionally keeps only
    ridge pixels (local magnitude maxima along the gradient direction), the
    one-pixel-wide skeleton of each valid band.
    """

    width: int
    height: int
    magnitude: np.ndarray
    gradient_angle: np.ndarray
    level_line_angle: np.ndarray
    valid: np.ndarray
    edge_max: np.ndarray

    def unit_gradients(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        ang = np.radians(self.gradient_angle[ys, xs])
        return np.column_stack((np.cos(ang), np.sin(ang)))


def _read_pgm_tokens(raw: bytes, count: int):
    """Yield the first `count` whitespace/comment-delimited header tokens."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(raw):
            raise CorruptFileError("truncated graymap header")
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos] not in (0x0A, 0x0D):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    return tokens, pos


def _load_pgm(raw: bytes) -> np.ndarray:
    magic = raw[:2]
    tokens, pos = _read_pgm_tokens(raw[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise CorruptFileError("non-numeric graymap header") from exc
    if width <= 0 or height <= 0:
        raise CorruptFileError("non-positive graymap dimensions")
    if maxval <= 0 or maxval > 255:
        raise UnsupportedFormatError(f"only 8-bit graymaps supported, maxval={maxval}")
    n = width * height
    if magic == b"P5":
        payload = raw[2 + pos + 1:]
        if len(payload) < n:
            raise CorruptFileError(
                f"graymap payload has {len(payload)} bytes, expected {n}")
        values = np.frombuffer(payload[:n], dtype=np.uint8).astype(float)
    else:
        text = raw[2 + pos:]
        fields = re.split(rb"\s+", text.strip())
        fields = [f for f in fields if f]
        if len(fields) < n:
            raise CorruptFileError(
                f"graymap payload has {len(fields)} samples, expected {n}")
        try:
            values = np.array([int(f) for f in fields[:n]], dtype=float)
        except ValueError as exc:
            raise CorruptFileError("non-numeric graymap sample") from exc
    if values.max(initial=0) > maxval:
        raise CorruptFileError("graymap sample exceeds declared maxval")
    return values.reshape(height, width)


def _load_png(path: Path) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise UnsupportedFormatError("PNG support requires Pillow") from exc
    with Image.open(path) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=float)
        if im.mode == "RGB":
            rgb = np.asarray(im, dtype=float)
            return np.floor(rgb @ _LUMA + 0.5)
        raise UnsupportedFormatError(
            f"PNG mode {im.mode!r} unsupported; need 8-bit grayscale or RGB")


def load_grayscale(path) -> GrayImage:
    """Load an 8-bit graymap (P2/P5) or 8-bit gray/true-color PNG.

    True-color pixels are converted with luma weights 0.299/0.587/0.114 and
    rounded.  Images smaller than 8x8 are rejected.
    """
    p = Path(path)
    raw = p.read_bytes()
    if raw[:2] in (b"P2", b"P5"):
        arr = _load_pgm(raw)
    elif raw[:8] == b"\x89PNG\r\n\x1a\n":
        arr = _load_png(p)
    else:
        raise UnsupportedFormatError(f"unrecognized image format in {p.name}")
    img = GrayImage.from_array(arr)
    img.check_detectable()
    return img


def write_pgm(path, img: GrayImage) -> None:
    """Write a binary (P5) graymap."""
    data = np.clip(np.rint(img.data), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.width} {img.height}\n255\n".encode())
        fh.write(data.tobytes())


def compute_gradient_map(img: GrayImage, quant_threshold: float = 5.22) -> GradientMap:
    """Gradient field on the 2x2 forward-difference mask.

    gx is the mean right-minus-left difference over the 2x2 cell and gy the
    mean bottom-minus-top difference; pixels whose magnitude falls below
    ``quant_threshold`` are marked invalid, as are the last row and column.
    """
    data = img.data
    h, w = data.shape
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    gx[:-1, :-1] = 0.5 * (data[:-1, 1:] - data[:-1, :-1] + data[1:, 1:] - data[1:, :-1])
    gy[:-1, :-1] = 0.5 * (data[1:, :-1] - data[:-1, :-1] + data[1:, 1:] - data[:-1, 1:])
    magnitude = np.hypot(gx, gy)
    gradient_angle = np.degrees(np.arctan2(gy, gx)) % 360.0
    level_line = (gradient_angle - 90.0) % 360.0
    valid = magnitude >= quant_threshold
    valid[-1, :] = False
    valid[:, -1] = False
    edge_max = valid & _nonmax_ridge(magnitude, gx, gy)
    return GradientMap(w, h, magnitude, gradient_angle, level_line, valid, edge_max)


def _nonmax_ridge(magnitude: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Pixels whose magnitude is a local maximum along the gradient axis,
    with the direction quantized to the four 8-neighbor axes."""
    h, w = magnitude.shape
    padded = np.pad(magnitude, 1, mode="constant")

    def shifted(dy: int, dx: int) -> np.ndarray:
        return padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]

    ang = np.degrees(np.arctan2(gy, gx)) % 180.0
    sector = ((ang + 22.5) // 45.0).astype(int) % 4  # 0:+x 1:diag 2:+y 3:anti-diag
    steps = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    ridge = np.zeros_like(magnitude, dtype=bool)
    for s, (dy, dx) in steps.items():
        fwd = shifted(dy, dx)
        back = shifted(-dy, -dx)
        ridge |= (sector == s) & (magnitude >= fwd) & (magnitude > back)
    return ridge


def gaussian_blur(img: GrayImage, sigma: float) -> GrayImage:
    """Separable Gaussian smoothing with a sampled, normalized kernel."""
    blurred = ndimage.gaussian_filter(img.data, sigma=sigma, mode="nearest")
    return GrayImage(img.width, img.height, blurred)


def gaussian_downscale(img: GrayImage, scale: float) -> GrayImage:
    """Blur with sigma = 0.6/scale, then bilinear-resample to ceil(scale*dim).

    ``scale == 1`` returns the input unchanged.  Output pixel centers map to
    input coordinates via (i + 0.5)/scale - 0.5.
    """
    if not (0.0 < scale <= 1.0):
        raise ValueError(f"scale must lie in (0, 1], got {scale}")
    if scale == 1.0:
        return img
    blurred = gaussian_blur(img, 0.6 / scale).data
    out_w = math.ceil(scale * img.width)
    out_h = math.ceil(scale * img.height)
    xs = (np.arange(out_w) + 0.5) / scale - 0.5
    ys = (np.arange(out_h) + 0.5) / scale - 0.5
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    resampled = ndimage.map_coordinates(
        blurred, [grid_y.ravel(), grid_x.ravel()], order=1, mode="nearest")
    return GrayImage(out_w, out_h, resampled.reshape(out_h, out_w))
