"""Primitive differentiable image kernels: padding, depthwise 2-D
convolution, bilinear sampling, and patch extraction.

All image inputs are 4-D NCHW.  Convolution is correlation (kernels are not
flipped), matching the usual CV convention.
"""
from __future__ import annotations

from typing import Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ParameterError, ShapeError
from .tape import Var, _record, as_var
from .tensor import as_array

BORDER_MODES = ("zero", "replicate", "reflect")

# Source coordinates within this distance of an integer are snapped to it so
# identity grids and integer-pixel warps reproduce inputs bit-for-bit.
_SNAP_EPS = 1e-8


def _require_4d(x: Var, who: str) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{who} expects NCHW input, got shape {x.shape}")


def _pad_index(n: int, lo: int, hi: int, mode: str) -> np.ndarray:
    """Map padded positions to source positions; -1 marks zero-fill."""
    idx = np.arange(n)
    if mode == "zero":
        return np.pad(idx, (lo, hi), mode="constant", constant_values=-1)
    if mode == "replicate":
        return np.pad(idx, (lo, hi), mode="edge")
    if mode == "reflect":
        # half-sample reflection (edge repeated): every input pixel keeps a
        # total kernel weight of 1, so mass-1 blurs preserve the image mean
        if lo > n or hi > n:
            raise ParameterError(f"reflect padding ({lo},{hi}) too large for extent {n}")
        return np.pad(idx, (lo, hi), mode="symmetric")
    raise ParameterError(f"unknown border mode {mode!r}; expected one of {BORDER_MODES}")


def _fold_axis(g: np.ndarray, idx: np.ndarray, n: int, axis: int) -> np.ndarray:
    """Adjoint of index-map padding along one axis (scatter-add)."""
    t = np.moveaxis(g, axis, 0)
    buf = np.zeros((n,) + t.shape[1:], dtype=g.dtype)
    valid = idx >= 0
    np.add.at(buf, idx[valid], t[valid])
    return np.moveaxis(buf, 0, axis)


def pad2d(x, padding: Sequence[int], mode: str = "zero") -> Var:
    """Pad the two trailing spatial axes.

    padding is (top, bottom, left, right); mode is zero | replicate | reflect.
    """
    x = as_var(x)
    _require_4d(x, "pad2d")
    pt, pb, pl, pr = (int(p) for p in padding)
    if min(pt, pb, pl, pr) < 0:
        raise ParameterError("padding must be non-negative")
    _, _, h, w = x.shape
    iy = _pad_index(h, pt, pb, mode)
    ix = _pad_index(w, pl, pr, mode)
    arr = x.data[:, :, np.maximum(iy, 0)[:, None], np.maximum(ix, 0)[None, :]]
    if mode == "zero":
        mask = (iy >= 0)[:, None] & (ix >= 0)[None, :]
        if not mask.all():
            arr = arr * mask
    def vjp(g):
        g = _fold_axis(g, iy, h, 2)
        g = _fold_axis(g, ix, w, 3)
        return (g,)

    return _record(arr, (x,), vjp)


def _conv_valid(xp: Var, kernel: Var) -> Var:
    """Valid-mode depthwise correlation of padded input with the kernel."""
    k = kernel.data
    per_channel = k.ndim == 3
    kh, kw = k.shape[-2:]
    xarr = xp.data
    win = sliding_window_view(xarr, (kh, kw), axis=(2, 3))  # (N,C,H,W,kh,kw)
    if per_channel:
        out = np.einsum("nchwij,cij->nchw", win, k, optimize=True)
    else:
        out = np.einsum("nchwij,ij->nchw", win, k, optimize=True)
    need_x = xp.requires_grad or xp._tape is not None
    need_k = kernel.requires_grad or kernel._tape is not None

    def vjp(g):
        gx = gk = None
        if need_x:
            kf = k[..., ::-1, ::-1]
            gp = np.pad(g, ((0, 0), (0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1)))
            gwin = sliding_window_view(gp, (kh, kw), axis=(2, 3))
            if per_channel:
                gx = np.einsum("nchwij,cij->nchw", gwin, kf, optimize=True)
            else:
                gx = np.einsum("nchwij,ij->nchw", gwin, kf, optimize=True)
        if need_k:
            if per_channel:
                gk = np.einsum("nchwij,nchw->cij", win, g, optimize=True)
            else:
                gk = np.einsum("nchwij,nchw->ij", win, g, optimize=True)
        return (gx, gk)

    return _record(out, (xp, kernel), vjp)


def conv2d(x, kernel, border: str = "reflect") -> Var:
    """Depthwise same-size 2-D correlation.

    kernel is (kH,kW), shared across channels, or (C,kH,kW), one per channel;
    extents must be odd.  Differentiable w.r.t. both input and kernel.
    """
    x = as_var(x)
    kernel = as_var(kernel)
    _require_4d(x, "conv2d")
    if kernel.ndim not in (2, 3):
        raise ShapeError(f"kernel must be (kH,kW) or (C,kH,kW), got {kernel.shape}")
    kh, kw = kernel.shape[-2:]
    if kh % 2 == 0 or kw % 2 == 0:
        raise ParameterError(f"kernel extents must be odd, got {kh}x{kw}")
    if kernel.ndim == 3 and kernel.shape[0] != x.shape[1]:
        raise ShapeError(
            f"per-channel kernel has {kernel.shape[0]} channels, input has {x.shape[1]}"
        )
    xp = pad2d(x, (kh // 2, kh // 2, kw // 2, kw // 2), mode=border)
    return _conv_valid(xp, kernel)


def _snap(p: np.ndarray) -> np.ndarray:
    r = np.rint(p)
    return np.where(np.abs(p - r) <= _SNAP_EPS, r, p)


def sample_bilinear(x, px, py) -> Var:
    """Bilinear lookup of x (NCHW) at pixel coordinates px, py (N,Ho,Wo).

    Out-of-range corners contribute zero.  Differentiable w.r.t. x and both
    coordinate fields.
    """
    x = as_var(x)
    px = as_var(px)
    py = as_var(py)
    _require_4d(x, "sample_bilinear")
    if px.shape != py.shape or px.ndim != 3 or px.shape[0] != x.shape[0]:
        raise ShapeError(f"coordinate fields must be (N,Ho,Wo), got {px.shape} / {py.shape}")
    n, c, h, w = x.shape
    ho, wo = px.shape[1:]
    pxs = _snap(px.data.reshape(n, -1))
    pys = _snap(py.data.reshape(n, -1))
    x0 = np.floor(pxs).astype(np.int64)
    y0 = np.floor(pys).astype(np.int64)
    wx1 = pxs - x0
    wy1 = pys - y0
    wx0 = 1.0 - wx1
    wy0 = 1.0 - wy1

    flat = x.data.reshape(n, c, h * w)
    corners = []
    out = None
    for dy, dx in ((0, 0), (0, 1), (1, 0), (1, 1)):
        cx = x0 + dx
        cy = y0 + dy
        valid = (cx >= 0) & (cx < w) & (cy >= 0) & (cy < h)
        # min/max instead of np.clip: clip's dispatch is the hot-loop cost
        cxc = np.minimum(np.maximum(cx, 0), w - 1)
        cyc = np.minimum(np.maximum(cy, 0), h - 1)
        idx = cyc * w + cxc
        wgt = (wx1 if dx else wx0) * (wy1 if dy else wy0)
        if not valid.all():
            wgt = wgt * valid
        v = np.take_along_axis(flat, idx[:, None, :], axis=2)  # (N,C,P)
        corners.append((v, wgt, valid, idx))
        contrib = v * wgt[:, None, :]
        out = contrib if out is None else out + contrib
    out = out.reshape(n, c, ho, wo)
    need_x = x._tape is not None or x.requires_grad
    need_g = (
        px._tape is not None or px.requires_grad or py._tape is not None or py.requires_grad
    )

    def vjp(g):
        gp = g.reshape(n, c, -1)  # (N,C,P)
        gx_img = None
        if need_x:
            size = n * h * w
            offs = (np.arange(n) * (h * w))[:, None]
            idx_all = np.concatenate([(idx + offs).ravel() for _, _, _, idx in corners])
            wgt_all = np.concatenate([wgt.ravel() for _, wgt, _, _ in corners])
            gx_img = np.empty((c, size), dtype=g.dtype)
            for ch in range(c):
                gch = np.tile(gp[:, ch].ravel(), 4)
                gx_img[ch] = np.bincount(idx_all, weights=wgt_all * gch, minlength=size)
            gx_img = gx_img.reshape(c, n, h, w).transpose(1, 0, 2, 3)
        gpx = gpy = None
        if need_g:
            vm = []
            for v, _, valid, _ in corners:
                vm.append(v if valid.all() else v * valid[:, None, :])
            v00, v01, v10, v11 = vm
            dpx = wy0[:, None, :] * (v01 - v00) + wy1[:, None, :] * (v11 - v10)
            dpy = wx0[:, None, :] * (v10 - v00) + wx1[:, None, :] * (v11 - v01)
            gpx = (gp * dpx).sum(axis=1).reshape(n, ho, wo)
            gpy = (gp * dpy).sum(axis=1).reshape(n, ho, wo)
        return (gx_img, gpx, gpy)

    return _record(out, (x, px, py), vjp)


def grid_sample_bilinear(x, grid) -> Var:
    """Sample x (NCHW) at a normalized grid (N,Ho,Wo,2), (x,y) order.

    Coordinates -1 and +1 map to the centers of the first/last pixel column
    and row; samples outside the image return 0 (zero border).
    """
    x = as_var(x)
    grid = as_var(grid)
    _require_4d(x, "grid_sample_bilinear")
    if grid.ndim != 4 or grid.shape[-1] != 2:
        raise ShapeError(f"grid must be (N,Ho,Wo,2), got {grid.shape}")
    if grid.shape[0] != x.shape[0]:
        raise ShapeError(f"batch mismatch: input {x.shape[0]}, grid {grid.shape[0]}")
    _, _, h, w = x.shape
    px = (grid[..., 0] + 1.0) * (0.5 * (w - 1))
    py = (grid[..., 1] + 1.0) * (0.5 * (h - 1))
    return sample_bilinear(x, px, py)


def identity_grid(n: int, h: int, w: int, dtype=np.float64) -> np.ndarray:
    """Normalized sampling grid (N,H,W,2) that reproduces the input exactly."""
    gx = np.linspace(-1.0, 1.0, w, dtype=dtype) if w > 1 else np.zeros(1, dtype=dtype)
    gy = np.linspace(-1.0, 1.0, h, dtype=dtype) if h > 1 else np.zeros(1, dtype=dtype)
    grid = np.stack(np.meshgrid(gx, gy, indexing="xy"), axis=-1)
    return np.broadcast_to(grid, (n, h, w, 2)).copy()


def upsample_bilinear(x, size: Tuple[int, int]) -> Var:
    """Resize to (Ho,Wo) with bilinear interpolation, corners aligned."""
    x = as_var(x)
    _require_4d(x, "upsample_bilinear")
    n, _, h, w = x.shape
    ho, wo = size
    if wo > 1:
        jx = np.arange(wo, dtype=x.dtype) * ((w - 1) / (wo - 1))
    else:
        jx = np.zeros(1, dtype=x.dtype)
    if ho > 1:
        jy = np.arange(ho, dtype=x.dtype) * ((h - 1) / (ho - 1))
    else:
        jy = np.zeros(1, dtype=x.dtype)
    px = np.broadcast_to(jx[None, None, :], (n, ho, wo)).copy()
    py = np.broadcast_to(jy[None, :, None], (n, ho, wo)).copy()
    return sample_bilinear(x, px, py)


def extract_patches(x, window: Tuple[int, int], stride: Tuple[int, int]) -> Var:
    """Tile an NCHW tensor into (N,P,C,h,w) patches in row-major scan order.

    P = floor((H-h)/sh+1) * floor((W-w)/sw+1).
    """
    x = as_var(x)
    _require_4d(x, "extract_patches")
    h, w = (int(v) for v in window)
    sh, sw = (int(v) for v in stride)
    if sh < 1 or sw < 1:
        raise ParameterError(f"stride must be >= 1, got ({sh},{sw})")
    n, c, hh, ww = x.shape
    if h > hh or w > ww:
        raise ParameterError(f"window {h}x{w} larger than image {hh}x{ww}")
    ph = (hh - h) // sh + 1
    pw = (ww - w) // sw + 1
    win = sliding_window_view(x.data, (h, w), axis=(2, 3))[:, :, ::sh, ::sw]  # (N,C,Ph,Pw,h,w)
    out = win.transpose(0, 2, 3, 1, 4, 5).reshape(n, ph * pw, c, h, w).copy()
    in_shape, in_dtype = x.shape, x.dtype

    def vjp(g):
        gt = g.reshape(n, ph, pw, c, h, w).transpose(0, 3, 1, 2, 4, 5)
        buf = np.zeros(in_shape, dtype=in_dtype)
        for i in range(h):
            for j in range(w):
                buf[:, :, i : i + ph * sh : sh, j : j + pw * sw : sw] += gt[..., i, j]
        return (buf,)

    return _record(out, (x,), vjp)
