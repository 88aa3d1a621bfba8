"""Adversarial painter: conditional Wasserstein training with gradient penalty.

The generator maps actions straight to brushstroke images (no noise
input); the critic scores (action, image) pairs, real pairs being the
oracle renders from the dataset.  An optional auxiliary pixel loss can be
blended into the generator objective for stability at small scale.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import torch

from ..common import TrainingDiverged, images_to_tensor, iter_batches, set_seed
from ..dataset import fingerprint, load_dataset
from .api import PainterCheckpoint
from .nets import PainterNet, PairCritic
from .vae import split_train_val


@dataclass
class GanPainterConfig:
    critic_iters_per_gen: int = 5
    gradient_penalty_weight: float = 10.0
    epochs: int = 10
    learning_rate: float = 2e-4
    batch_size: int = 64
    aux_pixel_weight: float = 0.0
    latent_dim: int = 64
    seed: int = 0
    allow_discrete: bool = False
    log_every: int = 0

    def __post_init__(self):
        if self.critic_iters_per_gen < 1:
            raise ValueError("critic_iters_per_gen must be >= 1")
        if self.gradient_penalty_weight < 0:
            raise ValueError("gradient_penalty_weight must be >= 0")
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("positive learning_rate/batch_size/epochs required")


def gradient_penalty(critic: PairCritic, actions: torch.Tensor,
                     real: torch.Tensor, fake: torch.Tensor) -> torch.Tensor:
    eps = torch.rand(real.shape[0], 1, 1, 1, dtype=real.dtype)
    mixed = (eps * real + (1.0 - eps) * fake).requires_grad_(True)
    scores = critic(actions, mixed)
    grads = torch.autograd.grad(scores.sum(), mixed, create_graph=True)[0]
    norms = grads.flatten(1).norm(2, dim=1)
    return ((norms - 1.0) ** 2).mean()


def train_gan_painter(dataset_path, cfg: GanPainterConfig,
                      progress=None) -> PainterCheckpoint:
    """Train the adversarial painter from an NPDS dataset."""
    info, actions, images = load_dataset(dataset_path)
    if info.count == 0:
        raise ValueError("empty dataset")
    if info.discrete and not cfg.allow_discrete:
        raise ValueError(
            "dataset is discrete-variant; set allow_discrete=True to opt in"
        )
    set_seed(cfg.seed)
    train_idx, _ = split_train_val(info.count)
    n_train = train_idx.shape[0]
    acts_np = actions[train_idx].astype(np.float32)

    gen = PainterNet(info.action_dim, cfg.latent_dim, info.height)
    critic = PairCritic(info.action_dim, info.height)
    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.learning_rate, betas=(0.5, 0.9))
    opt_d = torch.optim.Adam(critic.parameters(), lr=cfg.learning_rate, betas=(0.5, 0.9))

    history = {"d_real": [], "d_fake": [], "d_loss": [], "g_adv": [], "g_pixel": []}
    rng = np.random.default_rng(cfg.seed)

    def fetch(idx):
        a = torch.from_numpy(acts_np[idx])
        x = images_to_tensor(images[train_idx[idx]])
        return a, x

    for epoch in range(cfg.epochs):
        batches = iter_batches(n_train, cfg.batch_size, rng, drop_last=True)
        while True:
            # critic updates
            d_real_v = d_fake_v = d_loss_v = None
            exhausted = False
            for _ in range(cfg.critic_iters_per_gen):
                idx = next(batches, None)
                if idx is None:
                    exhausted = True
                    break
                a, x = fetch(idx)
                with torch.no_grad():
                    fake = gen(a)
                d_real = critic(a, x).mean()
                d_fake = critic(a, fake).mean()
                gp = gradient_penalty(critic, a, x, fake)
                d_loss = d_fake - d_real + cfg.gradient_penalty_weight * gp
                if not torch.isfinite(d_loss):
                    raise TrainingDiverged(
                        f"critic loss non-finite at epoch {epoch}", history
                    )
                opt_d.zero_grad()
                d_loss.backward()
                opt_d.step()
                d_real_v, d_fake_v, d_loss_v = (
                    d_real.item(), d_fake.item(), d_loss.item()
                )
            if exhausted:
                break
            idx = next(batches, None)
            if idx is None:
                break
            # generator update
            a, x = fetch(idx)
            fake = gen(a)
            g_adv = -critic(a, fake).mean()
            g_pixel = ((fake - x) ** 2).mean()
            g_loss = g_adv + cfg.aux_pixel_weight * g_pixel
            if not torch.isfinite(g_loss):
                raise TrainingDiverged(
                    f"generator loss non-finite at epoch {epoch}", history
                )
            opt_g.zero_grad()
            g_loss.backward()
            opt_g.step()
            history["d_real"].append(d_real_v)
            history["d_fake"].append(d_fake_v)
            history["d_loss"].append(d_loss_v)
            history["g_adv"].append(g_adv.item())
            history["g_pixel"].append(g_pixel.item())
            if cfg.log_every and len(history["g_adv"]) % cfg.log_every == 0:
                print(
                    f"gan epoch {epoch} gen-step {len(history['g_adv'])} "
                    f"d {d_loss_v:.3f} g {g_adv.item():.3f} px {g_pixel.item():.4f}",
                    flush=True,
                )
        if progress:
            tail = history["g_pixel"][-20:] or [float("nan")]
            progress(f"gan epoch {epoch}: pixel-mse {np.mean(tail):.4f}")

    gen.eval()
    return PainterCheckpoint(
        kind="gan",
        action_dim=info.action_dim,
        canvas_size=info.height,
        latent_dim=cfg.latent_dim,
        config=asdict(cfg),
        dataset_fingerprint=fingerprint(dataset_path),
        module=gen,
        history=history,
    )
