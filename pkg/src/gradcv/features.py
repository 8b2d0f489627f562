"""Classical local features, differentiable end to end where it matters.

Pipeline (wide-baseline matching): Gaussian pyramid -> Hessian blob response
per level -> hard non-maxima suppression -> patch extraction at keypoint
scale -> dominant gradient orientation -> SIFT description -> mutual
nearest-neighbor matching -> RANSAC homography verification.

Detection (integer NMS locations, orientation assignment, match indices) is
discrete; responses, subpixel refinement, and descriptors are Var-valued, so
gradients flow from descriptor/position losses back into image pixels.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import EstimationError, NoConsensusError, ParameterError, ShapeError
from .filters import gaussian_blur2d, pyramid_down, spatial_gradient
from .geometry.transforms import get_perspective_transform
from .kernels import sample_bilinear
from .tape import Var, _record, as_var, concat, matmul, sqrt, where
from .tensor import as_array

PATCH_SIZE = 32
DESC_SPATIAL_BINS = 4
DESC_ORI_BINS = 8
ORI_HIST_BINS = 36
PYRAMID_BASE_SIGMA = 1.6
_MAG_EPS = 1e-12


@dataclass
class Keypoint:
    """Subpixel detection: image coords at full resolution, scale in pixels,
    orientation in radians, detector response, source pyramid level."""

    x: float
    y: float
    scale: float = 1.0
    orientation: float = 0.0
    response: float = 0.0
    level: int = 0


@dataclass
class MatchPair:
    ia: int
    ib: int
    distance: float


def _require_gray(img: Var, who: str) -> None:
    if img.ndim != 4 or img.shape[1] != 1:
        raise ShapeError(f"{who} expects Nx1xHxW grayscale input, got {img.shape}")


# ---------------------------------------------------------------------------
# response maps


def _structure_tensor(img: Var, sigma_int: float, sigma_window: float):
    ksize = 2 * int(3 * sigma_int) + 1
    smoothed = gaussian_blur2d(img, (ksize, ksize), (sigma_int, sigma_int))
    grad = spatial_gradient(smoothed, mode="diff")
    ix, iy = grad[:, :, 0], grad[:, :, 1]
    wsize = 2 * int(3 * sigma_window) + 1
    blur = lambda t: gaussian_blur2d(t, (wsize, wsize), (sigma_window, sigma_window))
    return blur(ix * ix), blur(iy * iy), blur(ix * iy)


def corner_response(
    img,
    mode: str = "harris",
    sigma_int: float = 1.0,
    sigma_window: float = 1.5,
    k: float = 0.04,
) -> Var:
    """Interest-point response map (harris | shi_tomasi | hessian).

    harris: det(M) - k tr(M)^2 of the structure tensor; shi_tomasi: its
    smaller eigenvalue; hessian: determinant of the second-derivative matrix
    of the sigma_int-smoothed image.
    """
    img = as_var(img)
    _require_gray(img, "corner_response")
    if mode in ("harris", "shi_tomasi"):
        ixx, iyy, ixy = _structure_tensor(img, sigma_int, sigma_window)
        if mode == "harris":
            return ixx * iyy - ixy * ixy - k * (ixx + iyy) * (ixx + iyy)
        tr_half = (ixx + iyy) * 0.5
        rad = sqrt((ixx - iyy) * (ixx - iyy) * 0.25 + ixy * ixy + _MAG_EPS)
        return tr_half - rad
    if mode == "hessian":
        ksize = 2 * int(3 * sigma_int) + 1
        smoothed = gaussian_blur2d(img, (ksize, ksize), (sigma_int, sigma_int))
        grad = spatial_gradient(smoothed, mode="diff")
        gxx = spatial_gradient(grad[:, :, 0], mode="diff")
        gyy = spatial_gradient(grad[:, :, 1], mode="diff")
        ixx, ixy = gxx[:, :, 0], gxx[:, :, 1]
        iyy = gyy[:, :, 1]
        return ixx * iyy - ixy * ixy
    raise ParameterError(f"unknown response mode {mode!r}")


# ---------------------------------------------------------------------------
# non-maxima suppression


def _quad_offset(fm: np.ndarray, f0: np.ndarray, fp: np.ndarray) -> np.ndarray:
    denom = fm + fp - 2.0 * f0
    off = np.where(np.abs(denom) > 1e-12, 0.5 * (fm - fp) / np.where(denom == 0, 1, denom), 0.0)
    return np.clip(off, -0.5, 0.5)


def nms2d(response, window: int = 5, threshold: float = 0.0) -> list:
    """Hard NMS: strict window maxima above `threshold` as Keypoints.

    Ties inside a window go to the first pixel in scan order.  Positions are
    refined by a 1-D quadratic fit per axis, clamped to +-0.5 px.
    """
    if window < 1 or window % 2 == 0:
        raise ParameterError(f"window must be odd and positive, got {window}")
    r = as_array(response, np.float64)
    if r.ndim == 4:
        if r.shape[0] != 1 or r.shape[1] != 1:
            raise ShapeError("nms2d takes a single-image response map")
        r = r[0, 0]
    if r.ndim != 2:
        raise ShapeError(f"response must be 2-D, got shape {r.shape}")
    h, w = r.shape
    rad = window // 2
    padded = np.pad(r, rad, mode="constant", constant_values=-np.inf)
    wmax = sliding_window_view(padded, (window, window)).max(axis=(2, 3))
    # a perfectly flat window (constant regions) is not a maximum at all
    wmin = sliding_window_view(np.pad(r, rad, mode="constant", constant_values=np.inf), (window, window)).min(axis=(2, 3))
    cand = np.argwhere((r >= wmax) & (r > threshold) & (wmin < r))
    kps = []
    for y, x in cand:
        v = r[y, x]
        win = padded[y : y + window, x : x + window]
        # scan-order tie-break: drop if an equal value precedes this pixel
        ties = np.argwhere(win == v)
        gy, gx = ties[:, 0] + y - rad, ties[:, 1] + x - rad
        order = gy * w + gx
        if order.min() < y * w + x:
            continue
        dx = _quad_offset(r[y, x - 1], v, r[y, x + 1]) if 0 < x < w - 1 else 0.0
        dy = _quad_offset(r[y - 1, x], v, r[y + 1, x]) if 0 < y < h - 1 else 0.0
        kps.append(Keypoint(x=float(x + dx), y=float(y + dy), response=float(v)))
    return kps


def refine_positions(response: Var, ys: np.ndarray, xs: np.ndarray, clamp: bool = True):
    """Differentiable subpixel positions (x+dx, y+dy) at integer maxima.

    The quadratic-fit offsets are Var-valued functions of the response map,
    so position losses propagate into the image; offsets at the map border
    are zero.  clamp=False skips the +-0.5 saturation: useful when the
    offsets feed an optimization loss, where saturation would kill the
    gradient once the fit wants the peak beyond the neighbor pixel.
    """
    response = as_var(response)
    r = response.reshape(response.shape[-2:]) if response.ndim == 4 else response
    h, w = r.shape
    ys = np.asarray(ys, dtype=np.int64)
    xs = np.asarray(xs, dtype=np.int64)
    interior_x = (xs > 0) & (xs < w - 1)
    interior_y = (ys > 0) & (ys < h - 1)

    def axis_offset(fm, f0, fp, interior):
        denom = fm + fp - 2.0 * f0
        ok = np.abs(denom.data) > 1e-12
        half = 0.5 * (fm - fp) / where(ok, denom, 1.0)
        off = where(ok & interior, half, 0.0)
        return off.clamp(-0.5, 0.5) if clamp else off

    f0 = r[ys, xs]
    # neighbor gathers clamp only their own axis; the mask zeroes border offsets
    dx = axis_offset(r[ys, np.maximum(xs - 1, 0)], f0, r[ys, np.minimum(xs + 1, w - 1)], interior_x)
    dy = axis_offset(r[np.maximum(ys - 1, 0), xs], f0, r[np.minimum(ys + 1, h - 1), xs], interior_y)
    return as_var(xs.astype(np.float64)) + dx, as_var(ys.astype(np.float64)) + dy


# ---------------------------------------------------------------------------
# orientation


def _patch_gradients(patches: Var):
    grad = spatial_gradient(patches, mode="diff")
    return grad[:, :, 0], grad[:, :, 1]


def dominant_orientations(patches) -> tuple:
    """Peak of the magnitude-weighted 36-bin gradient histogram per patch.

    Returns (theta (N,), degenerate (N,) bool).  Histogram voting is hard
    (this is detection machinery, treated as constant); the peak is refined
    by parabolic interpolation over the circular neighbors.
    """
    patches = as_var(patches)
    _require_gray(patches, "dominant_orientations")
    n, _, s, s2 = patches.shape
    if s != s2:
        raise ShapeError(f"patches must be square, got {s}x{s2}")
    dx, dy = _patch_gradients(patches)
    mag = np.hypot(dx.data, dy.data)[:, 0]
    ang = np.mod(np.arctan2(dy.data, dx.data)[:, 0], 2.0 * np.pi)
    sigma = s / 4.0  # Gaussian window: sigma = (patch/2) * 0.5
    c = (s - 1) / 2.0
    yy, xx = np.mgrid[0:s, 0:s]
    gauss = np.exp(-(((xx - c) ** 2 + (yy - c) ** 2) / (2.0 * sigma**2)))
    wgt = (mag * gauss).reshape(n, -1)
    bins = np.minimum((ang.reshape(n, -1) * (ORI_HIST_BINS / (2.0 * np.pi))).astype(int), ORI_HIST_BINS - 1)
    offsets = np.arange(n)[:, None] * ORI_HIST_BINS
    hist = np.bincount(
        (bins + offsets).ravel(), weights=wgt.ravel(), minlength=n * ORI_HIST_BINS
    ).reshape(n, ORI_HIST_BINS)
    degenerate = hist.sum(axis=1) < 1e-9
    peak = hist.argmax(axis=1)
    fm = hist[np.arange(n), (peak - 1) % ORI_HIST_BINS]
    f0 = hist[np.arange(n), peak]
    fp = hist[np.arange(n), (peak + 1) % ORI_HIST_BINS]
    off = _quad_offset(fm, f0, fp)
    theta = (peak + off) * (2.0 * np.pi / ORI_HIST_BINS)
    theta = np.mod(theta, 2.0 * np.pi)
    theta[degenerate] = 0.0
    return theta, degenerate


def dominant_orientation(patch) -> tuple:
    """Single-patch convenience wrapper: (theta, degenerate flag)."""
    arr = as_array(patch, np.float64)
    if arr.ndim == 2:
        arr = arr[None, None]
    theta, degenerate = dominant_orientations(Var(arr))
    return float(theta[0]), bool(degenerate[0])


# ---------------------------------------------------------------------------
# SIFT description


def _soft_orientation_votes(dx: Var, dy: Var, thetas: np.ndarray) -> Var:
    """Fused magnitude-weighted soft orientation binning.

    votes[n,p,o] = |grad| * max(0, 1 - |wrap(angle - theta_n - c_o)| / bw)
    for the 8 descriptor bins.  One tape node with an analytic vjp: the
    elementwise chain over (N,P,8) arrays is the descriptor hot path.
    """
    bw = 2.0 * np.pi / DESC_ORI_BINS
    centers = np.arange(DESC_ORI_BINS) * bw
    dxa = dx.data
    dya = dy.data
    r2 = dxa * dxa + dya * dya + _MAG_EPS
    mag = np.sqrt(r2)
    ang = np.arctan2(dya, dxa) - thetas[:, None]
    diff = ang[:, :, None] - centers
    wrapped = diff - 2.0 * np.pi * np.floor((diff + np.pi) / (2.0 * np.pi))
    tri = 1.0 - np.abs(wrapped) * (1.0 / bw)
    active = tri > 0.0
    tri *= active
    out = mag[:, :, None] * tri

    def vjp(g):
        # d votes/d mag and d votes/d angle, folded back through atan2/sqrt
        g_mag = (g * tri).sum(axis=2)
        g_ang = (g * (mag[:, :, None] * (-np.sign(wrapped) / bw) * active)).sum(axis=2)
        gdx = g_mag * (dxa / mag) + g_ang * (-dya / r2)
        gdy = g_mag * (dya / mag) + g_ang * (dxa / r2)
        return (gdx, gdy)

    return _record(out, (dx, dy), vjp)


def descriptor_spatial_weights(thetas: np.ndarray, size: int = PATCH_SIZE) -> np.ndarray:
    """Constant per-pixel spatial weights (N, size*size, 16): bilinear bin
    tents on theta-rotated coordinates times a Gaussian window."""
    n = thetas.shape[0]
    c = (size - 1) / 2.0
    yy, xx = np.mgrid[0:size, 0:size]
    u = (xx - c).ravel()
    v = (yy - c).ravel()
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    # rotate offsets by -theta so the descriptor frame tracks the keypoint
    ur = cos_t[:, None] * u + sin_t[:, None] * v
    vr = -sin_t[:, None] * u + cos_t[:, None] * v
    half = size / 2.0
    spacing = size / DESC_SPATIAL_BINS
    centers = (np.arange(DESC_SPATIAL_BINS) + 0.5) * spacing - half
    wx = np.maximum(0.0, 1.0 - np.abs(ur[:, :, None] - centers) / spacing)
    wy = np.maximum(0.0, 1.0 - np.abs(vr[:, :, None] - centers) / spacing)
    gauss = np.exp(-(ur**2 + vr**2) / (2.0 * (0.5 * size) ** 2))
    sw = wy[:, :, :, None] * wx[:, :, None, :]  # (N,P,4y,4x)
    return (sw * gauss[:, :, None, None]).reshape(n, size * size, -1)


def sift_describe(patches, orientations=None, spatial_weights=None) -> Var:
    """128-D SIFT descriptors for (N,1,32,32) patches (or one 32x32 patch).

    4x4 spatial bins x 8 orientation bins with soft bilinear voting in both
    domains, Gaussian spatial weighting, then L2-normalize -> clamp at 0.2 ->
    re-normalize.  Differentiable w.r.t. the patches; orientations are
    per-patch constants.  Constant patches yield the zero vector.

    spatial_weights lets callers reuse the theta-dependent constants from
    :func:`descriptor_spatial_weights` across repeated calls.
    """
    pv = as_var(patches)
    if pv.ndim == 2:
        pv = pv.reshape((1, 1) + pv.shape)
    _require_gray(pv, "sift_describe")
    n, _, s, s2 = pv.shape
    if s != PATCH_SIZE or s2 != PATCH_SIZE:
        raise ShapeError(f"sift_describe expects {PATCH_SIZE}x{PATCH_SIZE} patches, got {s}x{s2}")
    thetas = np.zeros(n) if orientations is None else np.atleast_1d(as_array(orientations, np.float64))
    if thetas.shape != (n,):
        raise ShapeError(f"need {n} orientations, got shape {thetas.shape}")

    dx, dy = _patch_gradients(pv)
    degenerate = (np.abs(dx.data).max(axis=(1, 2, 3)) + np.abs(dy.data).max(axis=(1, 2, 3))) < 1e-12
    votes = _soft_orientation_votes(
        dx.reshape((n, s * s)), dy.reshape((n, s * s)), thetas
    )  # (N, P, 8)
    sw = descriptor_spatial_weights(thetas, s) if spatial_weights is None else spatial_weights
    desc = matmul(as_var(sw).swapaxes(1, 2), votes).reshape((n, -1))  # (N, 128)

    norm = sqrt((desc * desc).sum(axis=1, keepdims=True) + _MAG_EPS)
    desc = desc / norm
    desc = desc.clamp(hi=0.2)
    norm2 = sqrt((desc * desc).sum(axis=1, keepdims=True) + _MAG_EPS)
    desc = desc / norm2
    if degenerate.any():
        desc = where(np.broadcast_to(~degenerate[:, None], desc.shape), desc, 0.0)
    return desc


# ---------------------------------------------------------------------------
# matching


def match_mnn(desc_a, desc_b, ratio: float | None = None) -> list:
    """Mutual nearest neighbors by L2 descriptor distance.

    With `ratio`, Lowe's test d1/d2 <= ratio is applied on side A.  Empty
    inputs give an empty list.
    """
    a = np.atleast_2d(as_array(desc_a, np.float64))
    b = np.atleast_2d(as_array(desc_b, np.float64))
    if a.size == 0 or b.size == 0:
        return []
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"descriptor widths differ: {a.shape[1]} vs {b.shape[1]}")
    d2 = np.maximum(
        (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * (a @ b.T), 0.0
    )
    nn_ab = d2.argmin(axis=1)
    nn_ba = d2.argmin(axis=0)
    out = []
    for i, j in enumerate(nn_ab):
        if nn_ba[j] != i:
            continue
        if ratio is not None and b.shape[0] > 1:
            row = d2[i].copy()
            row[j] = np.inf
            second = row.min()
            if not d2[i, j] <= (ratio * ratio) * second:
                continue
        out.append(MatchPair(ia=int(i), ib=int(j), distance=float(np.sqrt(d2[i, j]))))
    return out


# ---------------------------------------------------------------------------
# RANSAC


def _apply_h(h: np.ndarray, pts: np.ndarray) -> np.ndarray:
    ph = np.concatenate([pts, np.ones((len(pts), 1))], axis=1) @ h.T
    return ph[:, :2] / ph[:, 2:3]


def _dlt_least_squares(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Overdetermined DLT with h22 = 1 via normal equations."""
    n = len(src)
    a = np.zeros((2 * n, 8))
    b = np.zeros(2 * n)
    x, y = src[:, 0], src[:, 1]
    u, v = dst[:, 0], dst[:, 1]
    a[0::2, 0], a[0::2, 1], a[0::2, 2] = x, y, 1.0
    a[0::2, 6], a[0::2, 7] = -x * u, -y * u
    a[1::2, 3], a[1::2, 4], a[1::2, 5] = x, y, 1.0
    a[1::2, 6], a[1::2, 7] = -x * v, -y * v
    b[0::2] = u
    b[1::2] = v
    h = np.linalg.solve(a.T @ a, a.T @ b)
    return np.append(h, 1.0).reshape(3, 3)


def ransac_homography(
    pts_a,
    pts_b,
    threshold: float = 2.0,
    max_iters: int = 1000,
    seed: int = 0,
):
    """RANSAC 4-point homography: pts_b ~ H @ pts_a.

    Best-inlier-count model (ties keep the earliest iteration), refit on the
    inliers by least squares; deterministic for a fixed seed.  Raises
    EstimationError with < 4 pairs and NoConsensusError when no model
    reaches 4 inliers.
    """
    a = np.atleast_2d(as_array(pts_a, np.float64))
    b = np.atleast_2d(as_array(pts_b, np.float64))
    if a.shape != b.shape or a.ndim != 2 or a.shape[1] != 2:
        raise ShapeError(f"point sets must both be (N,2), got {a.shape}/{b.shape}")
    n = len(a)
    if n < 4:
        raise EstimationError(f"RANSAC needs >= 4 correspondences, got {n}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    best_count = 0
    best_mask = None
    best_h = None
    for _ in range(max_iters):
        idx = rng.choice(n, size=4, replace=False)
        try:
            h = get_perspective_transform(a[idx], b[idx])
        except EstimationError:
            continue
        res = np.linalg.norm(_apply_h(h, a) - b, axis=1)
        mask = res < threshold
        count = int(mask.sum())
        if count > best_count:
            best_count, best_mask, best_h = count, mask, h
    if best_count < 4:
        raise NoConsensusError(f"no homography with >= 4 inliers in {max_iters} iterations")
    try:
        refit = _dlt_least_squares(a[best_mask], b[best_mask])
        res = np.linalg.norm(_apply_h(refit, a) - b, axis=1)
        mask = res < threshold
        if mask.sum() >= 4:
            return refit, mask
    except np.linalg.LinAlgError:
        pass
    return best_h, best_mask


# ---------------------------------------------------------------------------
# detection pipeline


def extract_patches_at(img, xs, ys, size: int = PATCH_SIZE, spacing: float = 1.0) -> Var:
    """Bilinear patches (M,1,size,size) centered at subpixel (xs, ys).

    Differentiable w.r.t. the image (and the centers when they are Vars).
    """
    img = as_var(img)
    _require_gray(img, "extract_patches_at")
    offs = (np.arange(size) - (size - 1) / 2.0) * spacing
    ox, oy = np.meshgrid(offs, offs)
    xs_v, ys_v = as_var(xs), as_var(ys)
    m = xs_v.size
    px = xs_v.reshape((m, 1, 1)) + ox[None]
    py = ys_v.reshape((m, 1, 1)) + oy[None]
    # single big grid against the one-image batch
    px = px.reshape((1, m * size, size))
    py = py.reshape((1, m * size, size))
    out = sample_bilinear(img, px, py)
    return out.reshape((m, 1, size, size))


@dataclass
class PyramidLevel:
    image: Var  # level image (1,1,h,w)
    response: Var  # Hessian response at the level
    scale: int  # 2**level sampling factor vs full resolution


def hessian_pyramid(img, levels: int = 3, sigma: float = PYRAMID_BASE_SIGMA) -> list:
    """Gaussian pyramid with a Hessian response map per level."""
    img = as_var(img)
    _require_gray(img, "hessian_pyramid")
    out = []
    cur = img
    for lvl in range(levels):
        if min(cur.shape[2], cur.shape[3]) < PATCH_SIZE + 4:
            break
        resp = corner_response(cur, mode="hessian", sigma_int=sigma)
        out.append(PyramidLevel(image=cur, response=resp, scale=2**lvl))
        cur = pyramid_down(cur)
    if not out:
        raise ShapeError(f"image too small for the {PATCH_SIZE}px patch pipeline: {img.shape}")
    return out


def detect(
    img,
    max_keypoints: int = 500,
    levels: int = 3,
    threshold: float = 1e-6,
    nms_window: int = 5,
) -> list:
    """Hessian blob keypoints over a pyramid, strongest first.

    Keypoints too close to a level border for a 32px patch are dropped;
    coordinates are reported at full resolution with scale 1.6 * 2^level.
    """
    margin = PATCH_SIZE // 2 + 1
    kps = []
    for lvl, level in enumerate(hessian_pyramid(img, levels)):
        h, w = level.response.shape[2:]
        for kp in nms2d(level.response.data, window=nms_window, threshold=threshold):
            if not (margin <= kp.x <= w - 1 - margin and margin <= kp.y <= h - 1 - margin):
                continue
            kps.append(
                Keypoint(
                    x=kp.x * level.scale,
                    y=kp.y * level.scale,
                    scale=PYRAMID_BASE_SIGMA * level.scale,
                    response=kp.response,
                    level=lvl,
                )
            )
    kps.sort(key=lambda k: -k.response)
    return kps[:max_keypoints]


def describe(img, keypoints, pyramid=None) -> Var:
    """SIFT descriptors (M,128) for detected keypoints.

    Patches are sampled on the keypoint's pyramid level at 1px spacing, so
    descriptor support scales with detection scale.  Differentiable w.r.t.
    the image; assigns each keypoint's dominant orientation in place.
    """
    if pyramid is None:
        pyramid = hessian_pyramid(img, levels=max((k.level for k in keypoints), default=0) + 1)
    if not keypoints:
        raise ParameterError("describe needs at least one keypoint")
    parts = []
    order = []
    for lvl, level in enumerate(pyramid):
        sel = [i for i, k in enumerate(keypoints) if k.level == lvl]
        if not sel:
            continue
        xs = np.array([keypoints[i].x for i in sel]) / level.scale
        ys = np.array([keypoints[i].y for i in sel]) / level.scale
        patches = extract_patches_at(level.image, xs, ys)
        thetas, _ = dominant_orientations(Var(patches.data))
        for i, th in zip(sel, thetas):
            keypoints[i].orientation = float(th)
        parts.append(sift_describe(patches, thetas))
        order.extend(sel)
    stacked = parts[0] if len(parts) == 1 else concat(parts, axis=0)
    inv = np.argsort(np.array(order))
    return stacked[inv]


def detect_and_describe(
    img,
    max_keypoints: int = 500,
    levels: int = 3,
    threshold: float = 1e-6,
) -> tuple:
    """Full pipeline: (keypoints sorted by response, descriptors (M,128))."""
    img = as_var(img)
    pyramid = hessian_pyramid(img, levels)
    kps = detect(img, max_keypoints=max_keypoints, levels=levels, threshold=threshold)
    if not kps:
        return [], np.zeros((0, 128))  # plain array: empty tensors are not a thing
    return kps, describe(img, kps, pyramid=pyramid)


# ---------------------------------------------------------------------------
# CSV dumps


def save_keypoints_csv(path, keypoints) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "scale", "orientation", "response"])
        for k in keypoints:
            writer.writerow([k.x, k.y, k.scale, k.orientation, k.response])


def load_keypoints_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        Keypoint(
            x=float(r["x"]),
            y=float(r["y"]),
            scale=float(r["scale"]),
            orientation=float(r["orientation"]),
            response=float(r["response"]),
        )
        for r in rows
    ]


def save_matches_csv(path, matches) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ia", "ib", "dist"])
        for m in matches:
            writer.writerow([m.ia, m.ib, m.distance])


def load_matches_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [MatchPair(ia=int(r["ia"]), ib=int(r["ib"]), distance=float(r["dist"])) for r in rows]
