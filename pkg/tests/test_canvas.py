import numpy as np
import pytest
import torch

from strokeforge import torchops
from strokeforge.canvas import (
    GridSpec,
    alpha_from_white,
    composite,
    load_png,
    new_canvas,
    save_png,
    stitch,
    stitch_weights,
)
from strokeforge.oracle import OracleConfig, render_stroke
from strokeforge.actions import sample_action


def test_alpha_of_white_is_zero():
    alpha, _ = alpha_from_white(np.ones((4, 4, 3)))
    assert np.all(alpha == 0.0)


def test_alpha_of_black_pixel():
    stroke = np.ones((2, 2, 3))
    stroke[0, 0] = 0.0
    alpha, ink = alpha_from_white(stroke)
    assert alpha[0, 0] == 1.0
    assert np.all(ink[0, 0] == 0.0)


def test_alpha_of_mid_gray():
    stroke = np.full((1, 1, 3), 0.5)
    alpha, ink = alpha_from_white(stroke)
    assert alpha[0, 0] == pytest.approx(0.5)
    assert np.allclose(ink[0, 0], 0.0)


def test_composite_white_stroke_identity():
    rng = np.random.default_rng(0)
    canvas = rng.uniform(size=(8, 8, 3))
    out = composite(canvas, np.ones((8, 8, 3)))
    assert np.array_equal(out, canvas)


def test_composite_on_white_reproduces_stroke():
    rng = np.random.default_rng(1)
    stroke = render_stroke(sample_action(rng), OracleConfig(canvas_size=32))
    out = composite(new_canvas(32, 32), stroke)
    assert np.max(np.abs(out - stroke)) < 1e-6


def test_composite_idempotent_at_full_alpha():
    stroke = np.ones((4, 4, 3))
    stroke[1:3, 1:3] = 0.0  # fully opaque black block
    canvas = np.full((4, 4, 3), 0.7)
    once = composite(canvas, stroke)
    twice = composite(once, stroke)
    assert np.array_equal(once, twice)


def test_composite_stays_in_unit_range():
    rng = np.random.default_rng(2)
    canvas = rng.uniform(size=(8, 8, 3))
    stroke = rng.uniform(size=(8, 8, 3))
    out = composite(canvas, stroke)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_composite_order_irrelevant_for_disjoint_strokes():
    s1 = np.ones((8, 8, 3))
    s1[0:3, 0:3] = 0.2
    s2 = np.ones((8, 8, 3))
    s2[5:8, 5:8] = 0.6
    canvas = np.full((8, 8, 3), 0.9)
    a = composite(composite(canvas, s1), s2)
    b = composite(composite(canvas, s2), s1)
    assert np.allclose(a, b, atol=1e-12)


def test_composite_shape_mismatch():
    with pytest.raises(ValueError):
        composite(np.ones((4, 4, 3)), np.ones((5, 5, 3)))


def test_stitch_single_tile_identity():
    spec = GridSpec(tile_size=16, rows=1, cols=1)
    tile = np.random.default_rng(0).uniform(size=(16, 16, 3))
    out = stitch([tile], spec)
    assert np.allclose(out, tile)


def test_stitch_uniform_tiles_stay_uniform():
    spec = GridSpec(tile_size=16, rows=1, cols=2, overlap_fraction=0.5)
    tile = np.full((16, 16, 3), 0.4)
    out = stitch([tile, tile], spec)
    assert np.allclose(out, 0.4)


def test_stitch_output_size_formula():
    spec = GridSpec(tile_size=64, rows=2, cols=2, overlap_fraction=0.5)
    assert spec.output_shape == (96, 96)
    tiles = np.ones((4, 64, 64, 3)) * 0.5
    assert stitch(tiles, spec).shape == (96, 96, 3)


@pytest.mark.parametrize("rows,cols,overlap", [(2, 2, 0.5), (3, 2, 0.25), (1, 4, 0.75)])
def test_stitch_weights_sum_to_one(rows, cols, overlap):
    spec = GridSpec(tile_size=16, rows=rows, cols=cols, overlap_fraction=overlap)
    weights = stitch_weights(spec)
    total = np.zeros(spec.output_shape)
    for r in range(rows):
        for c in range(cols):
            y, x = r * spec.stride, c * spec.stride
            total[y:y + 16, x:x + 16] += weights[r, c]
    assert np.max(np.abs(total - 1.0)) <= 1e-6


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(tile_size=10, rows=1, cols=1, overlap_fraction=0.33)
    with pytest.raises(ValueError):
        GridSpec(tile_size=16, rows=0, cols=1)
    with pytest.raises(ValueError):
        GridSpec(tile_size=16, rows=1, cols=1, overlap_fraction=1.0)


def test_stitch_tile_count_mismatch():
    spec = GridSpec(tile_size=16, rows=2, cols=2, overlap_fraction=0.5)
    with pytest.raises(ValueError):
        stitch(np.ones((3, 16, 16, 3)), spec)


def test_torch_composite_matches_numpy():
    rng = np.random.default_rng(3)
    canvas = rng.uniform(size=(6, 6, 3))
    stroke = rng.uniform(size=(6, 6, 3))
    want = composite(canvas, stroke)
    got = torchops.composite(
        torch.from_numpy(canvas).permute(2, 0, 1)[None],
        torch.from_numpy(stroke).permute(2, 0, 1)[None],
    )[0].permute(1, 2, 0).numpy()
    assert np.max(np.abs(want - got)) < 1e-12


def test_torch_stitch_matches_numpy():
    spec = GridSpec(tile_size=16, rows=2, cols=2, overlap_fraction=0.5)
    rng = np.random.default_rng(4)
    tiles = rng.uniform(size=(4, 16, 16, 3))
    want = stitch(tiles, spec)
    got = torchops.stitch(
        torch.from_numpy(tiles).permute(0, 3, 1, 2), spec
    ).permute(1, 2, 0).numpy()
    assert np.max(np.abs(want - got)) < 1e-12


def test_composite_gradient_matches_finite_differences():
    # scalar of composite output vs stroke pixels, away from the matte eps
    torch.manual_seed(0)
    canvas = torch.rand(1, 3, 5, 5, dtype=torch.float64)
    stroke = (torch.rand(1, 3, 5, 5, dtype=torch.float64) * 0.8 + 0.05).requires_grad_(True)
    w = torch.rand(1, 3, 5, 5, dtype=torch.float64)

    def f(s):
        return (torchops.composite(canvas, s) * w).sum()

    f(stroke).backward()
    analytic = stroke.grad.clone()
    eps = 1e-6
    fd = torch.zeros_like(stroke)
    with torch.no_grad():
        flat = stroke.view(-1)
        for i in range(flat.numel()):
            orig = flat[i].item()
            flat[i] = orig + eps
            hi = f(stroke).item()
            flat[i] = orig - eps
            lo = f(stroke).item()
            flat[i] = orig
            fd.view(-1)[i] = (hi - lo) / (2 * eps)
    rel = (analytic - fd).norm() / max(analytic.norm(), fd.norm())
    assert rel < 1e-4


def test_png_roundtrip(tmp_path):
    img = np.random.default_rng(5).uniform(size=(10, 12, 3))
    p = tmp_path / "img.png"
    save_png(p, img)
    back = load_png(p)
    assert back.shape == (10, 12, 3)
    # half-up 8-bit quantization bound
    assert np.max(np.abs(back - img)) <= 0.5 / 255.0 + 1e-9
