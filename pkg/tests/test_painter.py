import numpy as np
import pytest
import torch

from strokeforge.actions import ACTION_DIM
from strokeforge.dataset import generate_dataset, write_dataset
from strokeforge.oracle import OracleConfig
from strokeforge.painter import (
    GanPainterConfig,
    PainterNet,
    VaePainterConfig,
    action_sweep,
    evaluate_painter,
    load_painter,
    paint,
    save_painter,
    train_gan_painter,
    train_vae_painter,
)
from strokeforge.painter.api import PainterCheckpoint

CANVAS = 32
ORACLE = OracleConfig(canvas_size=CANVAS, max_radius_px=5.0, seed=11)


@pytest.fixture(scope="module")
def tiny_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "tiny.npds"
    generate_dataset(300, ORACLE, path)
    return path


@pytest.fixture(scope="module")
def tiny_vae(tiny_dataset):
    cfg = VaePainterConfig(latent_dim=16, vae_epochs=2, mapper_epochs=2,
                           batch_size=32, seed=0)
    return train_vae_painter(tiny_dataset, cfg)


@pytest.fixture(scope="module")
def tiny_gan(tiny_dataset):
    cfg = GanPainterConfig(critic_iters_per_gen=2, epochs=2, batch_size=32,
                           latent_dim=16, aux_pixel_weight=0.5, seed=0)
    return train_gan_painter(tiny_dataset, cfg)


def make_ckpt(action_dim=ACTION_DIM, latent=8, canvas=CANVAS, seed=0):
    torch.manual_seed(seed)
    module = PainterNet(action_dim, latent, canvas).eval()
    return PainterCheckpoint(
        kind="vae", action_dim=action_dim, canvas_size=canvas, latent_dim=latent,
        config={}, dataset_fingerprint="", module=module,
    )


def test_vae_smoke_metadata_and_history(tiny_vae):
    assert tiny_vae.kind == "vae"
    assert tiny_vae.action_dim == ACTION_DIM
    assert tiny_vae.canvas_size == CANVAS
    assert len(tiny_vae.history["vae_recon"]) == 2
    assert all(np.isfinite(v) for v in tiny_vae.history["vae_recon"])
    # reconstruction improves over the first epochs
    assert tiny_vae.history["vae_recon"][-1] < tiny_vae.history["vae_recon"][0]


def test_vae_training_is_deterministic(tiny_dataset, tiny_vae):
    cfg = VaePainterConfig(latent_dim=16, vae_epochs=2, mapper_epochs=2,
                           batch_size=32, seed=0)
    again = train_vae_painter(tiny_dataset, cfg)
    assert again.metadata() == tiny_vae.metadata()
    assert again.history["vae_recon"] == tiny_vae.history["vae_recon"]
    for k, v in again.module.state_dict().items():
        assert torch.equal(v, tiny_vae.module.state_dict()[k])


def test_gan_smoke_history(tiny_gan):
    assert tiny_gan.kind == "gan"
    assert len(tiny_gan.history["g_adv"]) > 0
    assert np.all(np.isfinite(tiny_gan.history["d_loss"]))


def test_discrete_dataset_requires_opt_in(tmp_path):
    path = tmp_path / "disc.npds"
    generate_dataset(40, ORACLE, path, discrete=True)
    with pytest.raises(ValueError, match="discrete"):
        train_vae_painter(path, VaePainterConfig(latent_dim=4, vae_epochs=1,
                                                 mapper_epochs=1, batch_size=16))
    ckpt = train_vae_painter(
        path,
        VaePainterConfig(latent_dim=4, vae_epochs=1, mapper_epochs=1,
                         batch_size=16, allow_discrete=True),
    )
    assert ckpt.action_dim == 13


def test_empty_dataset_rejected(tmp_path):
    path = tmp_path / "empty.npds"
    write_dataset(path, np.zeros((0, 12), dtype=np.float32),
                  np.zeros((0, CANVAS, CANVAS, 3), dtype=np.uint8))
    with pytest.raises(ValueError, match="empty"):
        train_vae_painter(path, VaePainterConfig(latent_dim=4, vae_epochs=1,
                                                 mapper_epochs=1))


def test_paint_output_range_and_shapes():
    ckpt = make_ckpt()
    rng = np.random.default_rng(0)
    out = paint(ckpt, rng.uniform(size=(7, ACTION_DIM)))
    assert out.shape == (7, CANVAS, CANVAS, 3)
    assert out.min() >= 0.0 and out.max() <= 1.0
    single = paint(ckpt, rng.uniform(size=ACTION_DIM))
    assert single.shape == (CANVAS, CANVAS, 3)


def test_paint_batch_independence():
    ckpt = make_ckpt()
    rng = np.random.default_rng(1)
    batch = rng.uniform(size=(64, ACTION_DIM))
    full = paint(ckpt, batch)
    one = paint(ckpt, batch[17])
    # CPU kernels re-block reductions across batch sizes; agreement is at
    # float32 reassociation level, not bitwise
    assert np.max(np.abs(full[17] - one)) < 1e-6
    # within a fixed batch size, order is irrelevant bit-for-bit
    perm = rng.permutation(64)
    shuffled = paint(ckpt, batch[perm])
    assert np.array_equal(shuffled[np.argsort(perm)], full)


def test_paint_deterministic():
    ckpt = make_ckpt()
    a = np.random.default_rng(2).uniform(size=ACTION_DIM)
    assert np.array_equal(paint(ckpt, a), paint(ckpt, a))


def test_paint_dim_mismatch():
    ckpt = make_ckpt()
    with pytest.raises(ValueError, match="dim"):
        paint(ckpt, np.zeros(13))


def test_paint_tensor_is_differentiable():
    ckpt = make_ckpt()
    a = torch.rand(3, ACTION_DIM, requires_grad=True)
    out = paint(ckpt, a)
    assert out.shape == (3, 3, CANVAS, CANVAS)
    out.mean().backward()
    assert a.grad is not None
    assert torch.isfinite(a.grad).all()
    assert a.grad.abs().sum() > 0


def finite_difference_grad(ckpt, action, weights, step=1e-3):
    grads = np.zeros(ckpt.action_dim)
    for d in range(ckpt.action_dim):
        hi, lo = action.copy(), action.copy()
        hi[d] += step
        lo[d] -= step
        f_hi = float((paint(ckpt, hi) * weights).sum())
        f_lo = float((paint(ckpt, lo) * weights).sum())
        grads[d] = (f_hi - f_lo) / (2 * step)
    return grads


def gradient_relative_error(ckpt, n_actions=10, seed=0):
    """Max relative error between analytic and central-difference gradients."""
    module = ckpt.module.double()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_actions):
        action = rng.uniform(0.05, 0.95, size=ckpt.action_dim)
        weights = rng.uniform(size=(ckpt.canvas_size, ckpt.canvas_size, 3))
        a_t = torch.from_numpy(action)[None].requires_grad_(True)
        w_t = torch.from_numpy(weights).permute(2, 0, 1)[None]
        out = module(a_t)
        (out * w_t).sum().backward()
        analytic = a_t.grad[0].numpy()
        fd = finite_difference_grad(ckpt, action, weights)
        rel = np.linalg.norm(analytic - fd) / max(
            np.linalg.norm(analytic), np.linalg.norm(fd), 1e-12
        )
        worst = max(worst, rel)
    module.float()
    return worst


def test_untrained_painter_gradcheck():
    # architecture-level check; trained painters are re-checked in acceptance
    ckpt = make_ckpt(latent=8)
    assert gradient_relative_error(ckpt, n_actions=3, seed=4) < 1e-2


def test_checkpoint_roundtrip(tmp_path, tiny_vae):
    path = tmp_path / "painter.pt"
    save_painter(tiny_vae, path)
    assert path.with_suffix(".pt.json").exists()
    loaded = load_painter(path)
    assert loaded.metadata() == tiny_vae.metadata()
    a = np.random.default_rng(3).uniform(size=(5, ACTION_DIM))
    assert np.array_equal(paint(loaded, a), paint(tiny_vae, a))
    # loaded checkpoints are frozen
    assert not any(p.requires_grad for p in loaded.module.parameters())


def test_evaluate_painter_reports(tiny_vae, tmp_path):
    m = evaluate_painter(tiny_vae, ORACLE, n=64, out_dir=tmp_path)
    assert m.n == 64
    assert m.blank_mse > 0
    assert np.isfinite(m.mse)
    assert (tmp_path / "pairs_grid.png").exists()
    assert (tmp_path / "metrics.json").exists()
    with pytest.raises(ValueError):
        evaluate_painter(tiny_vae, ORACLE, n=0)


def test_untrained_painter_no_better_than_baseline():
    ckpt = make_ckpt(seed=9)
    m = evaluate_painter(ckpt, ORACLE, n=64)
    assert m.mse > 0.5 * m.blank_mse  # sanity lower bound


def test_sweep_degenerate_single_step():
    ckpt = make_ckpt()
    base = np.full(ACTION_DIM, 0.5)
    res = action_sweep(ckpt, base, dim=0, steps=1)
    expect = base.copy()
    expect[0] = 0.0
    assert np.array_equal(res.images[0], paint(ckpt, expect))
    assert res.strip.shape == (CANVAS, CANVAS, 3)


def test_sweep_shapes_and_validation():
    ckpt = make_ckpt()
    res = action_sweep(ckpt, np.full(ACTION_DIM, 0.5), dim=2, steps=5)
    assert res.images.shape == (5, CANVAS, CANVAS, 3)
    assert res.strip.shape == (CANVAS, 5 * CANVAS, 3)
    assert res.ink_masses.shape == (5,)
    with pytest.raises(ValueError):
        action_sweep(ckpt, np.full(ACTION_DIM, 0.5), dim=12, steps=3)
