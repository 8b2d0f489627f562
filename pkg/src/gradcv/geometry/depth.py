"""Depth-map geometry: per-pixel unprojection, surface normals, and the
calibrated depth warper (unproject with the reference depth, move into the
source camera, project, bilinear-sample the source image).

The warp is differentiable w.r.t. both the reference depth and the source
image; pixels that land behind or outside the source view sample zero.
"""
from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from ..kernels import sample_bilinear
from ..tape import Var, as_var, concat, sqrt, where
from .camera import PinholeCamera
from .linalg import inverse_transform

_Z_EPS = 1e-6


def _rays(cam: PinholeCamera, h: int, w: int) -> np.ndarray:
    """Unit-depth ray directions (3, H*W) for every pixel center."""
    us, vs = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    x = (us - cam.cx) / cam.fx
    y = (vs - cam.cy) / cam.fy
    return np.stack([x.ravel(), y.ravel(), np.ones(h * w)])


def depth_to_3d(depth, cam: PinholeCamera) -> Var:
    """(N,1,H,W) depth -> (N,3,H,W) camera-frame points (zeros stay zero)."""
    depth = as_var(depth)
    if depth.ndim != 4 or depth.shape[1] != 1:
        raise ShapeError(f"depth must be (N,1,H,W), got {depth.shape}")
    n, _, h, w = depth.shape
    rays = _rays(cam, h, w).reshape(1, 3, h, w)
    return depth * rays


def depth_normals(depth, cam: PinholeCamera) -> Var:
    """Per-pixel unit normals from point-cloud forward differences.

    Normals are oriented toward the camera ((0,0,-1) for a fronto-parallel
    plane); invalid pixels (depth == 0) get zero normals.
    """
    depth = as_var(depth)
    pts = depth_to_3d(depth, cam)

    def fwd_x(t):
        return concat([t[:, :, :, 1:] - t[:, :, :, :-1], t[:, :, :, -1:] * 0.0], axis=3)

    def fwd_y(t):
        return concat([t[:, :, 1:] - t[:, :, :-1], t[:, :, -1:] * 0.0], axis=2)

    tx = fwd_x(pts)
    ty = fwd_y(pts)
    x1, y1, z1 = tx[:, 0:1], tx[:, 1:2], tx[:, 2:3]
    x2, y2, z2 = ty[:, 0:1], ty[:, 1:2], ty[:, 2:3]
    # -(tx x ty): cross points away from the camera for +z-forward frames
    nx = -(y1 * z2 - z1 * y2)
    ny = -(z1 * x2 - x1 * z2)
    nz = -(x1 * y2 - y1 * x2)
    norm = sqrt(nx * nx + ny * ny + nz * nz + 1e-20)
    valid = depth.data > 0
    out = concat([nx, ny, nz], axis=1) / norm
    return where(np.broadcast_to(valid, out.shape), out, 0.0)


def depth_warp(src_img, depth_ref, cam_src: PinholeCamera, cam_ref: PinholeCamera) -> Var:
    """Warp the source view into the reference frame given reference depth."""
    src_img = as_var(src_img)
    depth_ref = as_var(depth_ref)
    if src_img.ndim != 4:
        raise ShapeError(f"src_img must be NCHW, got {src_img.shape}")
    if depth_ref.ndim != 4 or depth_ref.shape[1] != 1:
        raise ShapeError(f"depth must be (N,1,H,W), got {depth_ref.shape}")
    n, _, h, w = depth_ref.shape
    rays = _rays(cam_ref, h, w)  # (3,P) constants
    t_rel = cam_src.extrinsics @ inverse_transform(cam_ref.extrinsics)
    r, t = t_rel[:3, :3], t_rel[:3, 3]

    d = depth_ref.reshape((n, 1, h * w))
    pts = d * rays[None]  # (N,3,P) reference-frame points
    # rotate+translate into the source frame with constant coefficients
    xs = r[0, 0] * pts[:, 0:1] + r[0, 1] * pts[:, 1:2] + r[0, 2] * pts[:, 2:3] + t[0]
    ys = r[1, 0] * pts[:, 0:1] + r[1, 1] * pts[:, 1:2] + r[1, 2] * pts[:, 2:3] + t[1]
    zs = r[2, 0] * pts[:, 0:1] + r[2, 1] * pts[:, 1:2] + r[2, 2] * pts[:, 2:3] + t[2]
    in_front = zs.data > _Z_EPS
    z_safe = where(in_front, zs, 1.0)
    u = cam_src.fx * xs / z_safe + cam_src.cx
    v = cam_src.fy * ys / z_safe + cam_src.cy
    u = where(in_front, u, -1e9)
    v = where(in_front, v, -1e9)
    return sample_bilinear(src_img, u.reshape((n, h, w)), v.reshape((n, h, w)))
