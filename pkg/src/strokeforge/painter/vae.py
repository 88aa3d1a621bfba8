"""Two-stage painter training: image VAE, then an action-to-latent mapper."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import torch
import torch.nn.functional as F

from ..common import TrainingDiverged, images_to_tensor, iter_batches, set_seed
from ..dataset import fingerprint, load_dataset
from .api import PainterCheckpoint
from .nets import ConvDecoder, ConvEncoder, PainterNet


@dataclass
class VaePainterConfig:
    latent_dim: int = 64
    kl_weight: float = 1.0
    vae_epochs: int = 10
    mapper_epochs: int = 6
    learning_rate: float = 1e-3
    batch_size: int = 64
    seed: int = 0
    allow_discrete: bool = False
    log_every: int = 0

    def __post_init__(self):
        if self.latent_dim < 2:
            raise ValueError("latent_dim must be >= 2")
        if self.learning_rate <= 0 or self.batch_size < 1:
            raise ValueError("positive learning_rate and batch_size required")
        if self.vae_epochs < 1 or self.mapper_epochs < 1:
            raise ValueError("epochs must be >= 1")


def split_train_val(n: int) -> tuple[np.ndarray, np.ndarray]:
    """95/5 split by record index; last 5% held out."""
    cut = max(1, int(round(n * 0.95)))
    cut = min(cut, n - 1) if n > 1 else 1
    return np.arange(cut), np.arange(cut, n)


def vae_losses(x, recon, mu, logvar):
    """Per-sample sums: pixel squared error and KL to the unit Gaussian."""
    recon_err = ((recon - x) ** 2).flatten(1).sum(dim=1)
    kl = -0.5 * (1 + logvar - mu.pow(2) - logvar.exp()).sum(dim=1)
    return recon_err, kl


def train_vae_painter(dataset_path, cfg: VaePainterConfig,
                      progress=None) -> PainterCheckpoint:
    """Train the VAE painter from an NPDS dataset.

    Stage 1 learns a latent space of stroke images; stage 2 regresses each
    action onto its stroke's posterior mean.  The checkpoint packages
    mapper followed by decoder as the served painter.
    """
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

    encoder = ConvEncoder(cfg.latent_dim, info.height)
    decoder = ConvDecoder(cfg.latent_dim, info.height)
    opt = torch.optim.Adam(
        list(encoder.parameters()) + list(decoder.parameters()),
        lr=cfg.learning_rate,
    )
    history = {"vae_recon": [], "vae_kl": [], "mapper_mse": []}
    rng = np.random.default_rng(cfg.seed)

    for epoch in range(cfg.vae_epochs):
        recon_sum = kl_sum = 0.0
        seen = 0
        for step, idx in enumerate(iter_batches(n_train, cfg.batch_size, rng)):
            x = images_to_tensor(images[train_idx[idx]])
            mu, logvar = encoder(x)
            z = mu + torch.randn_like(mu) * (0.5 * logvar).exp()
            recon = decoder(z)
            recon_err, kl = vae_losses(x, recon, mu, logvar)
            loss = (recon_err + cfg.kl_weight * kl).mean()
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    f"VAE loss non-finite at epoch {epoch} step {step}", history
                )
            opt.zero_grad()
            loss.backward()
            opt.step()
            recon_sum += recon_err.sum().item()
            kl_sum += kl.sum().item()
            seen += x.shape[0]
            if cfg.log_every and step % cfg.log_every == 0:
                print(f"vae epoch {epoch} step {step} loss {loss.item():.2f}", flush=True)
        history["vae_recon"].append(recon_sum / seen)
        history["vae_kl"].append(kl_sum / seen)
        if progress:
            progress(f"vae epoch {epoch}: recon {history['vae_recon'][-1]:.2f} "
                     f"kl {history['vae_kl'][-1]:.2f}")

    # Stage 2 targets: posterior means of the training strokes
    encoder.eval()
    with torch.no_grad():
        mus = []
        for start in range(0, n_train, 256):
            x = images_to_tensor(images[train_idx[start:start + 256]])
            mus.append(encoder(x)[0])
        mu_all = torch.cat(mus)
    acts_t = torch.from_numpy(actions[train_idx].astype(np.float32))

    painter = PainterNet(info.action_dim, cfg.latent_dim, info.height)
    painter.decoder.load_state_dict(decoder.state_dict())
    opt_m = torch.optim.Adam(painter.mapper.parameters(), lr=cfg.learning_rate)
    for epoch in range(cfg.mapper_epochs):
        total = 0.0
        seen = 0
        for step, idx in enumerate(iter_batches(n_train, cfg.batch_size, rng)):
            pred = painter.mapper(acts_t[idx])
            loss = F.mse_loss(pred, mu_all[idx])
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    f"mapper loss non-finite at epoch {epoch} step {step}", history
                )
            opt_m.zero_grad()
            loss.backward()
            opt_m.step()
            total += loss.item() * idx.shape[0]
            seen += idx.shape[0]
        history["mapper_mse"].append(total / seen)
        if progress:
            progress(f"mapper epoch {epoch}: mse {history['mapper_mse'][-1]:.4f}")

    painter.eval()
    return PainterCheckpoint(
        kind="vae",
        action_dim=info.action_dim,
        canvas_size=info.height,
        latent_dim=cfg.latent_dim,
        config=asdict(cfg),
        dataset_fingerprint=fingerprint(dataset_path),
        module=painter,
        history=history,
    )
