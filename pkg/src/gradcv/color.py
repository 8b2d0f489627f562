"""Color-space conversions and intensity adjustments on NCHW batches.

All conversions are differentiable almost everywhere; branch selections
(channel argmax, hue sector) are constant masks, so gradients are correct
away from the associated discontinuities.  RGB inputs are nominally [0,1];
hue is expressed in radians [0, 2*pi).
"""
from __future__ import annotations

import numpy as np

from . import tape
from .errors import ParameterError, ShapeError
from .tape import Var, as_var, concat, maximum, minimum, where

# BT.601 luma weights, matching common library behavior.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)

# Linear sRGB -> CIE-XYZ (D65 white point).
_RGB_TO_XYZ = np.array(
    [
        [0.412453, 0.357580, 0.180423],
        [0.212671, 0.715160, 0.072169],
        [0.019334, 0.119193, 0.950227],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)

_TWO_PI = 2.0 * np.pi


def _require_channels(img: Var, n: int, who: str) -> None:
    if img.ndim != 4 or img.shape[1] != n:
        raise ShapeError(f"{who} expects Nx{n}xHxW input, got shape {img.shape}")


def rgb_to_grayscale(img) -> Var:
    """BT.601 luma: y = 0.299 R + 0.587 G + 0.114 B."""
    img = as_var(img)
    _require_channels(img, 3, "rgb_to_grayscale")
    r, gg, b = img[:, 0:1], img[:, 1:2], img[:, 2:3]
    return GRAY_WEIGHTS[0] * r + GRAY_WEIGHTS[1] * gg + GRAY_WEIGHTS[2] * b


def rgb_to_hsv(img) -> Var:
    """RGB -> HSV with hue in radians [0, 2*pi), S and V in [0,1]."""
    img = as_var(img)
    _require_channels(img, 3, "rgb_to_hsv")
    r, gg, b = img[:, 0:1], img[:, 1:2], img[:, 2:3]
    maxc = maximum(maximum(r, gg), b)
    minc = minimum(minimum(r, gg), b)
    delta = maxc - minc

    dd = delta.data
    chromatic = dd > 0
    safe_delta = where(chromatic, delta, 1.0)
    # sector selection is a constant mask with r > g > b priority at ties
    is_r = chromatic & (maxc.data == r.data)
    is_g = chromatic & (maxc.data == gg.data) & ~is_r
    is_b = chromatic & ~is_r & ~is_g

    h_r = (gg - b) / safe_delta
    h_r = where(h_r.data < 0, h_r + 6.0, h_r)  # wrap to [0,6)
    h_g = (b - r) / safe_delta + 2.0
    h_b = (r - gg) / safe_delta + 4.0
    h = where(is_r, h_r, where(is_g, h_g, where(is_b, h_b, 0.0)))
    h = h * (np.pi / 3.0)

    positive = maxc.data > 0
    s = where(positive, delta / where(positive, maxc, 1.0), 0.0)
    return concat([h, s, maxc], axis=1)


def hsv_to_rgb(img) -> Var:
    """Inverse of :func:`rgb_to_hsv` (exact away from S = 0)."""
    img = as_var(img)
    _require_channels(img, 3, "hsv_to_rgb")
    h, s, v = img[:, 0:1], img[:, 1:2], img[:, 2:3]
    hp = h * (3.0 / np.pi)  # sector coordinate in [0,6)
    sector = np.floor(hp.data).astype(np.int64) % 6
    f = hp - np.floor(hp.data)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))

    # per-sector channel layout: (r,g,b) for sectors 0..5
    table = ((v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q))
    chans = []
    for c in range(3):
        acc = as_var(np.zeros_like(h.data))
        for k in range(6):
            acc = where(sector == k, table[k][c], acc)
        chans.append(acc)
    return concat(chans, axis=1)


def normalize(img, mean, std) -> Var:
    """(x - mean) / std channelwise; mean/std are per-channel sequences."""
    img = as_var(img)
    if img.ndim != 4:
        raise ShapeError(f"normalize expects NCHW input, got {img.shape}")
    mean = np.asarray(mean, dtype=np.float64).reshape(1, -1, 1, 1)
    std = np.asarray(std, dtype=np.float64).reshape(1, -1, 1, 1)
    if mean.size not in (1, img.shape[1]) or std.size not in (1, img.shape[1]):
        raise ShapeError("mean/std length must be 1 or the channel count")
    if np.any(std == 0):
        raise ParameterError("std must be nonzero")
    return (img - mean) / std


def denormalize(img, mean, std) -> Var:
    """Inverse of :func:`normalize`: x * std + mean."""
    img = as_var(img)
    if img.ndim != 4:
        raise ShapeError(f"denormalize expects NCHW input, got {img.shape}")
    mean = np.asarray(mean, dtype=np.float64).reshape(1, -1, 1, 1)
    std = np.asarray(std, dtype=np.float64).reshape(1, -1, 1, 1)
    if np.any(std == 0):
        raise ParameterError("std must be nonzero")
    return img * std + mean


def adjust_brightness(img, amount: float) -> Var:
    return tape.clamp(as_var(img) + float(amount), 0.0, 1.0)


def adjust_contrast(img, factor: float) -> Var:
    return tape.clamp(as_var(img) * float(factor), 0.0, 1.0)


def adjust_gamma(img, gamma: float) -> Var:
    if gamma <= 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    return tape.clamp(tape.pow_(as_var(img), float(gamma)), 0.0, 1.0)


def adjust_saturation(img, factor: float) -> Var:
    """Scale HSV saturation by `factor` (1 is the identity, 0 desaturates)."""
    img = as_var(img)
    _require_channels(img, 3, "adjust_saturation")
    if factor == 1.0:
        return tape.clamp(img, 0.0, 1.0)
    hsv = rgb_to_hsv(img)
    s = tape.clamp(hsv[:, 1:2] * float(factor), 0.0, 1.0)
    out = hsv_to_rgb(concat([hsv[:, 0:1], s, hsv[:, 2:3]], axis=1))
    return tape.clamp(out, 0.0, 1.0)


def adjust_hue(img, shift: float) -> Var:
    """Rotate hue by `shift` radians."""
    img = as_var(img)
    _require_channels(img, 3, "adjust_hue")
    if shift == 0.0:
        return tape.clamp(img, 0.0, 1.0)
    hsv = rgb_to_hsv(img)
    h = hsv[:, 0:1] + float(shift)
    h = h - np.floor(h.data / _TWO_PI) * _TWO_PI
    out = hsv_to_rgb(concat([h, hsv[:, 1:2], hsv[:, 2:3]], axis=1))
    return tape.clamp(out, 0.0, 1.0)


def _apply_matrix(img: Var, m: np.ndarray) -> Var:
    chans = [
        m[i, 0] * img[:, 0:1] + m[i, 1] * img[:, 1:2] + m[i, 2] * img[:, 2:3]
        for i in range(3)
    ]
    return concat(chans, axis=1)


def rgb_to_xyz(img) -> Var:
    img = as_var(img)
    _require_channels(img, 3, "rgb_to_xyz")
    return _apply_matrix(img, _RGB_TO_XYZ)


def xyz_to_rgb(img) -> Var:
    img = as_var(img)
    _require_channels(img, 3, "xyz_to_rgb")
    return _apply_matrix(img, _XYZ_TO_RGB)


def rgb_to_ycbcr(img) -> Var:
    """BT.601 full-range YCbCr with chroma offset 0.5."""
    img = as_var(img)
    _require_channels(img, 3, "rgb_to_ycbcr")
    r, gg, b = img[:, 0:1], img[:, 1:2], img[:, 2:3]
    y = GRAY_WEIGHTS[0] * r + GRAY_WEIGHTS[1] * gg + GRAY_WEIGHTS[2] * b
    cb = (b - y) * (0.5 / (1.0 - GRAY_WEIGHTS[2])) + 0.5
    cr = (r - y) * (0.5 / (1.0 - GRAY_WEIGHTS[0])) + 0.5
    return concat([y, cb, cr], axis=1)


def ycbcr_to_rgb(img) -> Var:
    img = as_var(img)
    _require_channels(img, 3, "ycbcr_to_rgb")
    y, cb, cr = img[:, 0:1], img[:, 1:2], img[:, 2:3]
    r = y + (2.0 * (1.0 - GRAY_WEIGHTS[0])) * (cr - 0.5)
    b = y + (2.0 * (1.0 - GRAY_WEIGHTS[2])) * (cb - 0.5)
    gg = (y - GRAY_WEIGHTS[0] * r - GRAY_WEIGHTS[2] * b) * (1.0 / GRAY_WEIGHTS[1])
    return concat([r, gg, b], axis=1)
