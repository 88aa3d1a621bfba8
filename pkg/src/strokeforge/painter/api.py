"""Painter checkpoints, batched inference, evaluation and sweeps."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..actions import ACTION_DIM, Action, sample_action, sample_discrete_action
from ..common import dump_json, laplacian_energy
from ..dataset import float_to_uint8
from ..oracle import OracleConfig, ink_mass, render_stroke, render_stroke_discrete
from .nets import PainterNet

HIGH_TEXTURE_BRUSH_SIZE = 0.7


@dataclass
class PainterCheckpoint:
    """A trained painter: metadata plus the mapper+decoder module."""

    kind: str
    action_dim: int
    canvas_size: int
    latent_dim: int
    config: dict
    dataset_fingerprint: str
    module: PainterNet
    history: dict = field(default_factory=dict)

    def metadata(self) -> dict:
        return {
            "kind": self.kind,
            "action_dim": self.action_dim,
            "canvas_size": self.canvas_size,
            "latent_dim": self.latent_dim,
            "config": self.config,
            "dataset_fingerprint": self.dataset_fingerprint,
        }


def save_painter(ckpt: PainterCheckpoint, path) -> None:
    """Write weights (.pt) and a JSON metadata sidecar next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {"meta": ckpt.metadata(), "state": ckpt.module.state_dict(),
         "history": ckpt.history},
        path,
    )
    dump_json(path.with_suffix(path.suffix + ".json"), ckpt.metadata())


def load_painter(path) -> PainterCheckpoint:
    blob = torch.load(path, map_location="cpu", weights_only=False)
    meta = blob["meta"]
    module = PainterNet(meta["action_dim"], meta["latent_dim"], meta["canvas_size"])
    module.load_state_dict(blob["state"])
    module.eval()
    for p in module.parameters():
        p.requires_grad_(False)
    return PainterCheckpoint(
        kind=meta["kind"],
        action_dim=meta["action_dim"],
        canvas_size=meta["canvas_size"],
        latent_dim=meta["latent_dim"],
        config=meta["config"],
        dataset_fingerprint=meta["dataset_fingerprint"],
        module=module,
        history=blob.get("history", {}),
    )


def paint(ckpt: PainterCheckpoint, actions):
    """Render a batch of actions with the painter.

    Tensor input stays in the autograd graph (NCHW output); numpy/Action
    input is rendered under no_grad and returned as (N, H, W, 3) float
    arrays (or a single (H, W, 3) image for a single action).
    """
    if isinstance(actions, torch.Tensor):
        if actions.shape[-1] != ckpt.action_dim:
            raise ValueError(
                f"action dim {actions.shape[-1]} != checkpoint dim {ckpt.action_dim}"
            )
        squeeze = actions.ndim == 1
        if squeeze:
            actions = actions[None]
        module = ckpt.module
        if actions.dtype != next(module.parameters()).dtype:
            actions = actions.to(next(module.parameters()).dtype)
        out = module(actions)
        return out[0] if squeeze else out

    if isinstance(actions, Action):
        arr = actions.to_array()[None]
        return paint_numpy(ckpt, arr)[0]
    arr = np.asarray(actions, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None]
    out = paint_numpy(ckpt, arr)
    return out[0] if squeeze else out


def paint_numpy(ckpt: PainterCheckpoint, actions: np.ndarray,
                batch_size: int = 128) -> np.ndarray:
    """No-grad batched inference; actions (N, action_dim) -> (N, H, W, 3)."""
    if actions.shape[-1] != ckpt.action_dim:
        raise ValueError(
            f"action dim {actions.shape[-1]} != checkpoint dim {ckpt.action_dim}"
        )
    outs = []
    dtype = next(ckpt.module.parameters()).dtype
    with torch.no_grad():
        for start in range(0, actions.shape[0], batch_size):
            batch = torch.from_numpy(
                np.ascontiguousarray(actions[start:start + batch_size])
            ).to(dtype)
            # NCHW -> NHWC float64, matching the oracle's convention
            img = ckpt.module(batch).permute(0, 2, 3, 1).double().numpy()
            outs.append(img)
    return np.concatenate(outs, axis=0)


@dataclass
class PainterMetrics:
    n: int
    mse: float
    blank_mse: float
    mse_high_texture: float
    blank_mse_high_texture: float
    n_high_texture: int
    laplacian_painter_high_texture: float
    laplacian_oracle_high_texture: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _sample_eval_set(ckpt: PainterCheckpoint, cfg: OracleConfig, n: int):
    """Fresh (action, noise-free oracle stroke) pairs for evaluation."""
    clean = dataclasses.replace(cfg, noise_scale=0.0)
    actions = np.empty((n, ckpt.action_dim), dtype=np.float64)
    strokes = np.empty((n, cfg.canvas_size, cfg.canvas_size, 3), dtype=np.float64)
    for i in range(n):
        rng = np.random.default_rng(cfg.seed + i)
        if ckpt.action_dim == ACTION_DIM:
            act = sample_action(rng)
            actions[i] = act.to_array()
            strokes[i] = render_stroke(act, clean)
        else:
            dv = sample_discrete_action(rng)
            actions[i] = dv.to_array()
            strokes[i] = render_stroke_discrete(dv, clean)
    return actions, strokes


def _high_texture_mask(actions: np.ndarray) -> np.ndarray:
    mask = actions[:, 2] > HIGH_TEXTURE_BRUSH_SIZE
    if actions.shape[1] > ACTION_DIM:
        mask &= actions[:, ACTION_DIM] == 0.0
    return mask


def evaluate_painter(ckpt: PainterCheckpoint, cfg: OracleConfig, n: int,
                     out_dir=None) -> PainterMetrics:
    """Painter-vs-oracle fidelity over n fresh actions.

    Reports overall pixel MSE, the blank-canvas baseline, the same pair on
    the high-texture subset (brush_size > 0.7), and the mean Laplacian
    high-frequency energy of painter vs oracle strokes on that subset.
    Writes a side-by-side oracle/painter pair grid when out_dir is given.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if cfg.canvas_size != ckpt.canvas_size:
        raise ValueError("oracle canvas_size must match the painter")
    actions, oracle_imgs = _sample_eval_set(ckpt, cfg, n)
    painted = paint_numpy(ckpt, actions)

    sq = (painted - oracle_imgs) ** 2
    blank_sq = (1.0 - oracle_imgs) ** 2
    mse = float(sq.mean())
    blank_mse = float(blank_sq.mean())

    mask = _high_texture_mask(actions)
    if mask.any():
        mse_ht = float(sq[mask].mean())
        blank_ht = float(blank_sq[mask].mean())
        lap_p = float(laplacian_energy(painted[mask]).mean())
        lap_o = float(laplacian_energy(oracle_imgs[mask]).mean())
    else:
        mse_ht = blank_ht = lap_p = lap_o = float("nan")

    metrics = PainterMetrics(
        n=n, mse=mse, blank_mse=blank_mse,
        mse_high_texture=mse_ht, blank_mse_high_texture=blank_ht,
        n_high_texture=int(mask.sum()),
        laplacian_painter_high_texture=lap_p,
        laplacian_oracle_high_texture=lap_o,
    )
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        grid = pair_grid(oracle_imgs, painted, max_pairs=24)
        from ..canvas import save_png

        save_png(out_dir / "pairs_grid.png", grid)
        dump_json(out_dir / "metrics.json", metrics.as_dict())
    return metrics


def pair_grid(left: np.ndarray, right: np.ndarray, max_pairs: int = 24,
              cols: int = 4, pad: int = 2) -> np.ndarray:
    """Grid of (left | right) image pairs, matching side-by-side layouts."""
    n = min(left.shape[0], max_pairs)
    h, w = left.shape[1:3]
    rows = (n + cols - 1) // cols
    pair_w = 2 * w + pad
    grid = np.ones((rows * (h + pad) - pad, cols * (pair_w + 2 * pad) - 2 * pad, 3))
    for i in range(n):
        r, c = divmod(i, cols)
        y = r * (h + pad)
        x = c * (pair_w + 2 * pad)
        grid[y:y + h, x:x + w] = left[i]
        grid[y:y + h, x + w + pad:x + pair_w] = right[i]
    return grid


@dataclass
class SweepResult:
    values: np.ndarray
    images: np.ndarray      # (steps, H, W, 3)
    ink_masses: np.ndarray  # (steps,)
    strip: np.ndarray       # (H, steps*W, 3)


def action_sweep(ckpt: PainterCheckpoint, base, dim: int, steps: int) -> SweepResult:
    """Paint the base action while one dimension sweeps 0 -> 1.

    Returns the per-step images, their ink masses, and a horizontal strip
    for report artifacts.
    """
    if isinstance(base, Action):
        base = base.to_array()
    base = np.asarray(base, dtype=np.float64).reshape(-1)
    if base.shape[0] != ckpt.action_dim:
        raise ValueError(f"base action dim {base.shape[0]} != {ckpt.action_dim}")
    if not (0 <= dim < ckpt.action_dim):
        raise ValueError(f"dim {dim} outside 0..{ckpt.action_dim - 1}")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    values = np.linspace(0.0, 1.0, steps) if steps > 1 else np.array([0.0])
    batch = np.tile(base, (steps, 1))
    batch[:, dim] = values
    images = paint_numpy(ckpt, batch)
    masses = np.array([ink_mass(img) for img in images])
    strip = np.concatenate(list(images), axis=1)
    return SweepResult(values=values, images=images, ink_masses=masses, strip=strip)


def blank_action_batch(action_dim: int, rng: np.random.Generator, n: int) -> np.ndarray:
    """Actions with zero pressure (trivially blank strokes), random otherwise."""
    batch = rng.uniform(size=(n, action_dim))
    batch[:, 0] = 0.0
    batch[:, 1] = 0.0
    if action_dim > ACTION_DIM:
        batch[:, ACTION_DIM] = 0.0
        batch[:, 0:3] = np.round(batch[:, 0:3] * 9) / 9
    return batch


def save_strip_png(path, result: SweepResult) -> None:
    from ..canvas import save_png

    save_png(path, result.strip)
    meta = {
        "values": [float(v) for v in result.values],
        "ink_masses": [float(m) for m in result.ink_masses],
    }
    dump_json(Path(path).with_suffix(".json"), meta)


def render_with_oracle(actions: np.ndarray, cfg: OracleConfig) -> np.ndarray:
    """Re-render painter-space actions with the reference oracle."""
    actions = np.asarray(actions, dtype=np.float64)
    out = np.empty((actions.shape[0], cfg.canvas_size, cfg.canvas_size, 3))
    for i, vec in enumerate(actions):
        out[i] = render_stroke(np.clip(vec[:ACTION_DIM], 0.0, 1.0), cfg)
    return out


def quantized(images: np.ndarray) -> np.ndarray:
    """8-bit round trip, for byte-level comparisons."""
    return float_to_uint8(images)
