"""Primitive image kernels vs hand oracles and finite differences."""
import numpy as np
import pytest

import gradcv as g
from gradcv.testing import gradcheck


def conv_oracle(img, kernel, border):
    """Dense per-pixel correlation oracle (single image, single channel)."""
    kh, kw = kernel.shape
    h, w = img.shape
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(kh):
                for j in range(kw):
                    yy = y + i - kh // 2
                    xx = x + j - kw // 2
                    if border == "zero":
                        v = img[yy, xx] if 0 <= yy < h and 0 <= xx < w else 0.0
                    elif border == "replicate":
                        v = img[min(max(yy, 0), h - 1), min(max(xx, 0), w - 1)]
                    else:  # reflect = half-sample symmetric (edge repeated)
                        yy = yy if yy >= 0 else -yy - 1
                        yy = yy if yy < h else 2 * h - 1 - yy
                        xx = xx if xx >= 0 else -xx - 1
                        xx = xx if xx < w else 2 * w - 1 - xx
                        v = img[yy, xx]
                    acc += v * kernel[i, j]
            out[y, x] = acc
    return out


# --- conv2d ---------------------------------------------------------------


def test_conv2d_1x1_doubles():
    x = g.Var(np.random.default_rng(0).random((2, 3, 4, 5)))
    out = g.conv2d(x, np.array([[2.0]]))
    assert np.allclose(out.data, 2.0 * x.data)


@pytest.mark.parametrize("border", ["zero", "replicate", "reflect"])
def test_conv2d_impulse_identity(border):
    x = g.Var(np.random.default_rng(1).random((1, 2, 6, 7)))
    k = np.zeros((3, 3))
    k[1, 1] = 1.0
    out = g.conv2d(x, k, border=border)
    assert np.array_equal(out.data, x.data)


def test_conv2d_ramp_center_value():
    # I(x,y) = x on a 5x5, all-ones 3x3 kernel, zero border: center = 9 * 2
    img = np.tile(np.arange(5.0), (5, 1))
    out = g.conv2d(g.Var(img[None, None]), np.ones((3, 3)), border="zero")
    assert out.data[0, 0, 2, 2] == pytest.approx(18.0)


@pytest.mark.parametrize("border", ["zero", "replicate", "reflect"])
def test_conv2d_matches_dense_oracle(border):
    rng = np.random.default_rng(7)
    img = rng.random((6, 8))
    kernel = rng.random((3, 5))
    out = g.conv2d(g.Var(img[None, None]), kernel, border=border)
    assert np.allclose(out.data[0, 0], conv_oracle(img, kernel, border), atol=1e-12)


def test_conv2d_even_kernel_rejected():
    with pytest.raises(g.ParameterError):
        g.conv2d(g.Var(np.ones((1, 1, 4, 4))), np.ones((2, 3)))


def test_conv2d_per_channel_kernel():
    rng = np.random.default_rng(3)
    x = rng.random((1, 2, 5, 5))
    k = rng.random((2, 3, 3))
    out = g.conv2d(g.Var(x), g.Var(k), border="zero")
    for c in range(2):
        assert np.allclose(out.data[0, c], conv_oracle(x[0, c], k[c], "zero"), atol=1e-12)


@pytest.mark.parametrize("border", ["zero", "replicate", "reflect"])
@pytest.mark.parametrize("seed", range(3))
def test_conv2d_gradcheck(border, seed):
    rng = np.random.default_rng(10 + seed)
    x = rng.normal(size=(2, 2, 5, 6))
    k = rng.normal(size=(3, 3))
    gradcheck(lambda a, b: (g.conv2d(a, b, border=border) ** 2.0).sum(), [x, k])


# --- grid sampling ----------------------------------------------------------


def test_grid_sample_identity_bit_exact():
    x = g.Var(np.random.default_rng(2).random((2, 3, 7, 9)))
    out = g.grid_sample_bilinear(x, g.identity_grid(2, 7, 9))
    assert np.array_equal(out.data, x.data)


def test_grid_sample_pixel_center_exact():
    x = np.random.default_rng(4).random((1, 1, 5, 5))
    # pixel (3,2): normalized (2*3/4-1, 2*2/4-1) = (0.5, 0.0)
    grid = np.array([[[[0.5, 0.0]]]])
    out = g.grid_sample_bilinear(g.Var(x), grid)
    assert out.data[0, 0, 0, 0] == x[0, 0, 2, 3]


def test_grid_sample_midpoint_average():
    x = np.zeros((1, 1, 1, 2))
    x[0, 0, 0, 1] = 1.0
    grid = np.array([[[[0.0, 0.0]]]])  # halfway between the two pixels
    out = g.grid_sample_bilinear(g.Var(x), grid)
    assert out.data[0, 0, 0, 0] == pytest.approx(0.5)


def test_grid_sample_out_of_range_zero():
    x = g.Var(np.ones((1, 1, 4, 4)))
    grid = np.full((1, 1, 1, 2), -3.0)
    out = g.grid_sample_bilinear(x, grid)
    assert out.data[0, 0, 0, 0] == 0.0


def test_grid_sample_bad_trailing_extent():
    with pytest.raises(g.ShapeError):
        g.grid_sample_bilinear(g.Var(np.ones((1, 1, 4, 4))), np.zeros((1, 2, 2, 3)))


@pytest.mark.parametrize("seed", range(5))
def test_grid_sample_gradcheck_input_and_grid(seed):
    rng = np.random.default_rng(30 + seed)
    x = rng.normal(size=(2, 2, 6, 6))
    # keep samples away from integer pixel loci so bilinear kinks don't bite
    grid = rng.uniform(-0.9, 0.9, size=(2, 3, 4, 2))
    px = (grid + 1.0) * 0.5 * 5
    frac = px - np.floor(px)
    grid[np.abs(frac - 0.0).min(axis=-1) < 0.05] += 0.033
    gradcheck(lambda a, b: (g.grid_sample_bilinear(a, b) ** 2.0).sum(), [x, grid])


def test_upsample_bilinear_matches_identity_when_same_size():
    x = g.Var(np.random.default_rng(5).random((1, 2, 4, 6)))
    out = g.upsample_bilinear(x, (4, 6))
    assert np.array_equal(out.data, x.data)


def test_upsample_bilinear_linear_ramp_exact():
    # bilinear interpolation reproduces a linear ramp at any resolution
    x = np.arange(4.0).reshape(1, 1, 1, 4) / 3.0
    out = g.upsample_bilinear(g.Var(np.broadcast_to(x, (1, 1, 3, 4)).copy()), (5, 7))
    expect = np.linspace(0.0, 1.0, 7)
    assert np.allclose(out.data[0, 0, 2], expect, atol=1e-12)


# --- extract_patches --------------------------------------------------------


def test_patches_tile_4x4():
    x = g.Var(np.arange(16.0).reshape(1, 1, 4, 4))
    p = g.extract_patches(x, (2, 2), (2, 2))
    assert p.shape == (1, 4, 1, 2, 2)
    assert np.array_equal(p.data[0, 0, 0], [[0, 1], [4, 5]])
    assert np.array_equal(p.data[0, 3, 0], [[10, 11], [14, 15]])


def test_patches_full_window_is_input():
    x = g.Var(np.random.default_rng(6).random((1, 3, 5, 4)))
    p = g.extract_patches(x, (5, 4), (1, 1))
    assert p.shape == (1, 1, 3, 5, 4)
    assert np.array_equal(p.data[0, 0], x.data[0])


def test_patches_index_arithmetic_oracle():
    x = np.random.default_rng(8).random((1, 1, 5, 5))
    p = g.extract_patches(g.Var(x), (3, 3), (1, 1))
    assert p.shape[1] == 9
    for idx in range(9):
        i, j = divmod(idx, 3)
        assert np.array_equal(p.data[0, idx, 0], x[0, 0, i : i + 3, j : j + 3])


def test_patches_window_too_large():
    with pytest.raises(g.ParameterError):
        g.extract_patches(g.Var(np.ones((1, 1, 4, 4))), (5, 5), (1, 1))


def test_patches_reassembly_roundtrip():
    x = np.random.default_rng(9).random((2, 3, 6, 8))
    p = g.extract_patches(g.Var(x), (3, 2), (3, 2)).data
    rebuilt = np.zeros_like(x)
    pw = 8 // 2
    for idx in range(p.shape[1]):
        i, j = divmod(idx, pw)
        rebuilt[:, :, 3 * i : 3 * i + 3, 2 * j : 2 * j + 2] = p[:, idx]
    assert np.array_equal(rebuilt, x)


@pytest.mark.parametrize("seed", range(3))
def test_patches_gradcheck(seed):
    rng = np.random.default_rng(40 + seed)
    x = rng.normal(size=(1, 2, 5, 5))
    gradcheck(lambda a: (g.extract_patches(a, (3, 3), (2, 2)) ** 2.0).sum(), [x])


# --- pad -------------------------------------------------------------------


@pytest.mark.parametrize("mode", ["zero", "replicate", "reflect"])
def test_pad_matches_numpy(mode):
    x = np.random.default_rng(11).random((1, 1, 4, 5))
    out = g.pad2d(g.Var(x), (1, 2, 2, 1), mode=mode)
    np_mode = {"zero": "constant", "replicate": "edge", "reflect": "symmetric"}[mode]
    expect = np.pad(x, ((0, 0), (0, 0), (1, 2), (2, 1)), mode=np_mode)
    assert np.array_equal(out.data, expect)


@pytest.mark.parametrize("mode", ["zero", "replicate", "reflect"])
@pytest.mark.parametrize("seed", range(2))
def test_pad_gradcheck(mode, seed):
    rng = np.random.default_rng(50 + seed)
    x = rng.normal(size=(1, 2, 4, 4))
    gradcheck(lambda a: (g.pad2d(a, (2, 1, 1, 2), mode=mode) ** 2.0).sum(), [x])


def test_reflect_pad_too_large():
    with pytest.raises(g.ParameterError):
        g.pad2d(g.Var(np.ones((1, 1, 3, 3))), (4, 4, 0, 0), mode="reflect")
