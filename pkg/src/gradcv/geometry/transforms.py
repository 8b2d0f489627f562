"""Planar transforms: the 4-point DLT, perspective/affine warps, and the
normalized-coordinate homography warp used by registration.

Warp convention: the matrix maps input pixel coordinates to output pixel
coordinates; warps are inverse-sampling (each output pixel back-projects
into the source), so outputs have no holes and warping is differentiable
w.r.t. both the image and the transform.
"""
from __future__ import annotations

import numpy as np

from ..errors import EstimationError, ParameterError, ShapeError
from ..kernels import sample_bilinear
from ..tape import Var, as_var, concat, stack, where
from ..tensor import as_array

_DET_EPS = 1e-12


def _as_batched_mat3(h) -> Var:
    h = as_var(h)
    if h.ndim == 2:
        h = h.reshape((1, 3, 3))
    if h.ndim != 3 or h.shape[1:] != (3, 3):
        raise ShapeError(f"expected (N,3,3) or (3,3) matrix, got {h.shape}")
    return h


def mat3_inverse(h) -> Var:
    """Differentiable batched 3x3 inverse via the adjugate formula."""
    h = _as_batched_mat3(h)
    m = [[h[:, i, j] for j in range(3)] for i in range(3)]
    c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1]
    c01 = m[0][2] * m[2][1] - m[0][1] * m[2][2]
    c02 = m[0][1] * m[1][2] - m[0][2] * m[1][1]
    c10 = m[1][2] * m[2][0] - m[1][0] * m[2][2]
    c11 = m[0][0] * m[2][2] - m[0][2] * m[2][0]
    c12 = m[0][2] * m[1][0] - m[0][0] * m[1][2]
    c20 = m[1][0] * m[2][1] - m[1][1] * m[2][0]
    c21 = m[0][1] * m[2][0] - m[0][0] * m[2][1]
    c22 = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    det = m[0][0] * c00 + m[0][1] * c10 + m[0][2] * c20
    if np.any(np.abs(det.data) < _DET_EPS):
        raise EstimationError("singular 3x3 matrix (|det| < 1e-12)")
    rows = [
        stack([c00, c01, c02], axis=1),
        stack([c10, c11, c12], axis=1),
        stack([c20, c21, c22], axis=1),
    ]
    return stack(rows, axis=1) / det.reshape((-1, 1, 1))


def _has_collinear_triple(pts: np.ndarray) -> bool:
    scale = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1.0)
    for i in range(2):
        for j in range(i + 1, 3):
            for k in range(j + 1, 4):
                u = pts[j] - pts[i]
                v = pts[k] - pts[i]
                if abs(u[0] * v[1] - u[1] * v[0]) <= 1e-8 * scale * scale:
                    return True
    return False


def get_perspective_transform(src, dst) -> np.ndarray:
    """Homography H with dst_i ~ H @ [src_i, 1] from 4 point pairs.

    Solved as the exactly-determined 8x8 DLT system (LU with partial
    pivoting); H[2,2] is fixed to 1.  Configurations with three collinear
    points (either side) are rejected as degenerate.
    """
    src = as_array(src, np.float64).reshape(4, 2)
    dst = as_array(dst, np.float64).reshape(4, 2)
    if _has_collinear_triple(src) or _has_collinear_triple(dst):
        raise EstimationError("degenerate configuration: three points collinear")
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        a[2 * i] = [x, y, 1, 0, 0, 0, -x * u, -y * u]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -x * v, -y * v]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise EstimationError(f"degenerate point configuration: {exc}") from exc
    if not np.isfinite(h).all():
        raise EstimationError("degenerate point configuration (non-finite solution)")
    return np.append(h, 1.0).reshape(3, 3)


def _warp_coords(h_inv: Var, xs: np.ndarray, ys: np.ndarray, n: int):
    """Back-project constant output pixel coords through (N,3,3) h_inv."""
    xs_v, ys_v = as_var(xs), as_var(ys)
    m = lambda i, j: h_inv[:, i, j].reshape((-1, 1))
    denom = m(2, 0) * xs_v + m(2, 1) * ys_v + m(2, 2)
    ok = np.abs(denom.data) > _DET_EPS
    degenerate = not ok.all()
    if degenerate:
        denom = where(ok, denom, 1.0)
    sx = (m(0, 0) * xs_v + m(0, 1) * ys_v + m(0, 2)) / denom
    sy = (m(1, 0) * xs_v + m(1, 1) * ys_v + m(1, 2)) / denom
    if degenerate:
        # points mapped to infinity fall far outside -> zero-border samples
        sx = where(ok, sx, -1e9)
        sy = where(ok, sy, -1e9)
    return sx, sy


def warp_perspective(img, h, dsize=None) -> Var:
    """Warp an NCHW image by a homography in pixel coordinates.

    out(u) = img(H^-1 u); dsize is (H', W') and defaults to the input size.
    """
    img = as_var(img)
    if img.ndim != 4:
        raise ShapeError(f"warp_perspective expects NCHW input, got {img.shape}")
    h = _as_batched_mat3(h)
    n = img.shape[0]
    if h.shape[0] not in (1, n):
        raise ShapeError(f"{h.shape[0]} transforms for batch of {n}")
    ho, wo = dsize if dsize is not None else img.shape[2:]
    h_inv = mat3_inverse(h)
    xs, ys = np.meshgrid(np.arange(wo, dtype=img.dtype), np.arange(ho, dtype=img.dtype))
    sx, sy = _warp_coords(h_inv, xs.ravel()[None], ys.ravel()[None], n)
    if h.shape[0] == 1 and n > 1:
        ones = np.ones((n, 1))
        sx, sy = sx * ones, sy * ones
    return sample_bilinear(img, sx.reshape((n, ho, wo)), sy.reshape((n, ho, wo)))


def warp_affine(img, m, dsize=None) -> Var:
    """Warp by a (N,2,3)/(2,3) affine matrix; same path as warp_perspective."""
    m = as_var(m)
    if m.ndim == 2:
        m = m.reshape((1, 2, 3))
    if m.ndim != 3 or m.shape[1:] != (2, 3):
        raise ShapeError(f"expected (N,2,3) affine matrix, got {m.shape}")
    bottom = np.tile(np.array([[[0.0, 0.0, 1.0]]]), (m.shape[0], 1, 1))
    return warp_perspective(img, concat([m, as_var(bottom)], axis=1), dsize)


def get_rotation_matrix2d(center, angle_deg: float, scale: float) -> np.ndarray:
    """2x3 matrix rotating by angle (counter-clockwise, degrees) about
    `center` with isotropic `scale`; matches the warp convention above."""
    if scale == 0:
        raise ParameterError("scale must be nonzero")
    cx, cy = (float(v) for v in center)
    t = np.deg2rad(angle_deg)
    a = scale * np.cos(t)
    b = scale * np.sin(t)
    return np.array([[a, b, (1 - a) * cx - b * cy], [-b, a, b * cx + (1 - a) * cy]])


def normal_transform_pixel(height: int, width: int) -> np.ndarray:
    """Pixel -> normalized [-1,1] coordinate matrix for an HxW image."""
    return np.array(
        [[2.0 / (width - 1), 0.0, -1.0], [0.0, 2.0 / (height - 1), -1.0], [0.0, 0.0, 1.0]]
    )


def normalize_homography(h_pix: np.ndarray, src_size, dst_size) -> np.ndarray:
    """Pixel-coordinate homography -> normalized-coordinate homography."""
    n_src = normal_transform_pixel(*src_size)
    n_dst = normal_transform_pixel(*dst_size)
    return n_dst @ as_array(h_pix, np.float64) @ np.linalg.inv(n_src)


def denormalize_homography(h_norm: np.ndarray, src_size, dst_size) -> np.ndarray:
    n_src = normal_transform_pixel(*src_size)
    n_dst = normal_transform_pixel(*dst_size)
    return np.linalg.inv(n_dst) @ as_array(h_norm, np.float64) @ n_src


def homography_warp(img, h, dsize=None, inverse_map: bool = False) -> Var:
    """Warp with a homography acting on normalized [-1,1] coordinates.

    The normalized frame is resolution-independent, so the same matrix warps
    any pyramid level.  With inverse_map=True, h already maps output
    coordinates to input coordinates and no differentiable inverse is needed.
    """
    img = as_var(img)
    if img.ndim != 4:
        raise ShapeError(f"homography_warp expects NCHW input, got {img.shape}")
    h = _as_batched_mat3(h)
    n, _, hi, wi = img.shape
    ho, wo = dsize if dsize is not None else (hi, wi)
    m = h if inverse_map else mat3_inverse(h)
    gx = np.linspace(-1.0, 1.0, wo) if wo > 1 else np.zeros(1)
    gy = np.linspace(-1.0, 1.0, ho) if ho > 1 else np.zeros(1)
    xs, ys = np.meshgrid(gx, gy)
    nx, ny = _warp_coords(m, xs.ravel()[None], ys.ravel()[None], n)
    if m.shape[0] == 1 and n > 1:
        ones = np.ones((n, 1))
        nx, ny = nx * ones, ny * ones
    px = (nx + 1.0) * (0.5 * (wi - 1))
    py = (ny + 1.0) * (0.5 * (hi - 1))
    return sample_bilinear(img, px.reshape((n, ho, wo)), py.reshape((n, ho, wo)))
