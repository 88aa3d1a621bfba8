"""Torch counterparts of the canvas operations, for use in training graphs.

Same math as :mod:`strokeforge.canvas` (matte from white, source-over,
feathered stitching) on NCHW tensors, differentiable everywhere the matte
division is above the epsilon threshold.
"""

from __future__ import annotations

import torch

from .canvas import MATTE_EPS, GridSpec, stitch_weights


def alpha_from_white(stroke: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """(alpha, ink) of a white-backed stroke batch, shapes (N,1,H,W)/(N,3,H,W)."""
    alpha = (1.0 - stroke).amax(dim=1, keepdim=True)
    safe = alpha.clamp_min(MATTE_EPS)
    ink = 1.0 - (1.0 - stroke) / safe
    ink = torch.where(alpha > MATTE_EPS, ink, torch.ones_like(ink))
    return alpha, ink


def composite(canvas: torch.Tensor, stroke: torch.Tensor) -> torch.Tensor:
    """Source-over composite, (N,3,H,W) in [0,1]."""
    if canvas.shape != stroke.shape:
        raise ValueError(f"shape mismatch: {canvas.shape} vs {stroke.shape}")
    alpha, ink = alpha_from_white(stroke)
    return (1.0 - alpha) * canvas + alpha * ink


def white_canvas(n: int, size: int, *, dtype=torch.float32, device=None) -> torch.Tensor:
    return torch.ones(n, 3, size, size, dtype=dtype, device=device)


def stitch(tiles: torch.Tensor, spec: GridSpec) -> torch.Tensor:
    """Blend (rows*cols, 3, tile, tile) tiles into (3, H, W) with feathering."""
    if tiles.shape[0] != spec.rows * spec.cols:
        raise ValueError(f"expected {spec.rows * spec.cols} tiles, got {tiles.shape[0]}")
    weights = torch.as_tensor(
        stitch_weights(spec), dtype=tiles.dtype, device=tiles.device
    )
    h, w = spec.output_shape
    out = tiles.new_zeros(3, h, w)
    t = spec.tile_size
    k = 0
    for r in range(spec.rows):
        for c in range(spec.cols):
            y, x = r * spec.stride, c * spec.stride
            out[:, y:y + t, x:x + t] = out[:, y:y + t, x:x + t] + weights[r, c] * tiles[k]
            k += 1
    return out
