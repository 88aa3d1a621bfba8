"""Network blocks for the differentiable painters.

Activations are SiLU throughout so painter outputs are smooth in their
inputs (finite-difference gradient checks rely on this).  Canvas sizes
must be multiples of 16: four stride-2 stages map size -> size/16.
"""

from __future__ import annotations

import torch
import torch.nn as nn

ENC_CHANNELS = (16, 32, 64, 128)


def _base_size(canvas_size: int) -> int:
    if canvas_size % 16 != 0 or canvas_size < 16:
        raise ValueError(f"canvas_size must be a positive multiple of 16, got {canvas_size}")
    return canvas_size // 16


class ConvEncoder(nn.Module):
    """Strided conv stack producing posterior (mu, logvar) over the latent."""

    def __init__(self, latent_dim: int, canvas_size: int = 64):
        super().__init__()
        base = _base_size(canvas_size)
        chans = ENC_CHANNELS
        layers = []
        prev = 3
        for ch in chans:
            layers += [nn.Conv2d(prev, ch, 4, stride=2, padding=1), nn.SiLU()]
            prev = ch
        self.conv = nn.Sequential(*layers)
        flat = chans[-1] * base * base
        self.fc_mu = nn.Linear(flat, latent_dim)
        self.fc_logvar = nn.Linear(flat, latent_dim)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h = self.conv(x).flatten(1)
        return self.fc_mu(h), self.fc_logvar(h)


class ConvDecoder(nn.Module):
    """Transposed-conv stack from a latent vector to a [0,1] image."""

    def __init__(self, latent_dim: int, canvas_size: int = 64):
        super().__init__()
        base = _base_size(canvas_size)
        self.base = base
        self.fc = nn.Linear(latent_dim, 128 * base * base)
        self.deconv = nn.Sequential(
            nn.ConvTranspose2d(128, 64, 4, stride=2, padding=1), nn.SiLU(),
            nn.ConvTranspose2d(64, 32, 4, stride=2, padding=1), nn.SiLU(),
            nn.ConvTranspose2d(32, 16, 4, stride=2, padding=1), nn.SiLU(),
            nn.ConvTranspose2d(16, 3, 4, stride=2, padding=1),
        )

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        h = self.fc(z).view(-1, 128, self.base, self.base)
        return torch.sigmoid(self.deconv(h))


class ActionMapper(nn.Module):
    """Feed-forward map from an action vector into the latent space."""

    def __init__(self, action_dim: int, latent_dim: int, hidden: int = 256):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(action_dim, hidden), nn.SiLU(),
            nn.Linear(hidden, hidden), nn.SiLU(),
            nn.Linear(hidden, latent_dim),
        )

    def forward(self, a: torch.Tensor) -> torch.Tensor:
        return self.net(a)


class PainterNet(nn.Module):
    """action -> stroke image; the deterministic painter served at inference.

    Both painter kinds share this shape: a mapper trunk into a latent plus
    a conv decoder.  The VAE trains the two halves separately; the GAN
    trains the whole stack as its generator.
    """

    def __init__(self, action_dim: int, latent_dim: int, canvas_size: int = 64):
        super().__init__()
        self.action_dim = action_dim
        self.latent_dim = latent_dim
        self.canvas_size = canvas_size
        self.mapper = ActionMapper(action_dim, latent_dim)
        self.decoder = ConvDecoder(latent_dim, canvas_size)

    def forward(self, a: torch.Tensor) -> torch.Tensor:
        return self.decoder(self.mapper(a))


class PairCritic(nn.Module):
    """Wasserstein critic over (action, image) pairs.

    The action is broadcast over the spatial grid and concatenated to the
    image channels.  No normalization layers (gradient penalty training).
    """

    def __init__(self, action_dim: int, canvas_size: int = 64):
        super().__init__()
        base = _base_size(canvas_size)
        chans = (32, 64, 128, 128)
        layers = []
        prev = 3 + action_dim
        for ch in chans:
            layers += [nn.Conv2d(prev, ch, 4, stride=2, padding=1), nn.SiLU()]
            prev = ch
        self.conv = nn.Sequential(*layers)
        self.fc = nn.Linear(chans[-1] * base * base, 1)

    def forward(self, actions: torch.Tensor, images: torch.Tensor) -> torch.Tensor:
        n, _, h, w = images.shape
        amap = actions[:, :, None, None].expand(n, actions.shape[1], h, w)
        feats = self.conv(torch.cat([images, amap], dim=1)).flatten(1)
        return self.fc(feats).squeeze(1)
