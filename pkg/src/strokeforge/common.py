"""Shared plumbing: seeding, stable JSON, batching, error types."""

from __future__ import annotations

import json
import platform
import sys

import numpy as np
import torch


class TrainingDiverged(RuntimeError):
    """Raised when a training loss goes non-finite; carries diagnostics."""

    def __init__(self, message: str, history: dict | None = None):
        super().__init__(message)
        self.history = history or {}


def set_seed(seed: int) -> None:
    torch.manual_seed(seed)


def dump_json(path, obj) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def load_json(path):
    with open(path) as f:
        return json.load(f)


def library_versions() -> dict:
    from . import __version__

    return {
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "numpy": np.__version__,
        "torch": torch.__version__,
        "strokeforge": __version__,
    }


def iter_batches(n: int, batch_size: int, rng: np.random.Generator | None = None,
                 drop_last: bool = False):
    """Yield index arrays over range(n), shuffled when an rng is given."""
    order = np.arange(n)
    if rng is not None:
        rng.shuffle(order)
    for start in range(0, n, batch_size):
        batch = order[start:start + batch_size]
        if drop_last and batch.shape[0] < batch_size:
            return
        yield batch


def images_to_tensor(images_u8: np.ndarray) -> torch.Tensor:
    """uint8 (N,H,W,3) to float32 NCHW in [0,1]."""
    t = torch.from_numpy(np.ascontiguousarray(images_u8))
    return t.permute(0, 3, 1, 2).to(torch.float32) / 255.0


def laplacian_energy(images: np.ndarray) -> np.ndarray:
    """Mean |4-neighbor Laplacian| per image; high-frequency texture proxy.

    images: (N, H, W, 3) float in [0, 1].
    """
    x = np.asarray(images, dtype=np.float64)
    lap = (
        4.0 * x[:, 1:-1, 1:-1]
        - x[:, :-2, 1:-1]
        - x[:, 2:, 1:-1]
        - x[:, 1:-1, :-2]
        - x[:, 1:-1, 2:]
    )
    return np.abs(lap).mean(axis=(1, 2, 3))
