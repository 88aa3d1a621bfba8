"""Canvas compositing: matte extraction, stroke layering, tile stitching.

Painters emit strokes on a white background, so the alpha matte of a
stroke is recovered from its deviation from white and composited
source-over.  One stroke on a blank canvas therefore reproduces the
painter output exactly.  Overlapping tiles are blended with separable
linear feathering so large canvases can be assembled from 64x64 outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

MATTE_EPS = 1e-6


def new_canvas(height: int, width: int) -> np.ndarray:
    """All-white float canvas."""
    return np.ones((height, width, 3), dtype=np.float64)


def alpha_from_white(stroke: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Recover (alpha, ink) of a stroke painted on white.

    alpha(p) = max over channels of (1 - stroke); ink is the color the
    stroke would have at full opacity.  Where alpha <= MATTE_EPS the ink
    is defined as white so the matte stays bounded.
    """
    stroke = np.asarray(stroke, dtype=np.float64)
    alpha = np.max(1.0 - stroke, axis=-1)
    safe = np.maximum(alpha, MATTE_EPS)
    ink = 1.0 - (1.0 - stroke) / safe[..., None]
    ink = np.where(alpha[..., None] > MATTE_EPS, ink, 1.0)
    return alpha, ink


def composite(canvas: np.ndarray, stroke: np.ndarray) -> np.ndarray:
    """Source-over composite of a white-backed stroke onto a canvas."""
    canvas = np.asarray(canvas, dtype=np.float64)
    if canvas.shape != stroke.shape:
        raise ValueError(f"shape mismatch: canvas {canvas.shape} vs stroke {stroke.shape}")
    alpha, ink = alpha_from_white(stroke)
    a = alpha[..., None]
    return (1.0 - a) * canvas + a * ink


@dataclass(frozen=True)
class GridSpec:
    """Overlapping tile grid; output side = tile + (n-1)*stride per axis."""

    tile_size: int
    rows: int
    cols: int
    overlap_fraction: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.overlap_fraction < 1.0):
            raise ValueError("overlap_fraction must be in [0, 1)")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        stride = self.tile_size * (1.0 - self.overlap_fraction)
        if abs(stride - round(stride)) > 1e-9 or round(stride) < 1:
            raise ValueError(
                f"tile_size*(1-overlap_fraction) must be a positive integer, got {stride}"
            )

    @property
    def stride(self) -> int:
        return int(round(self.tile_size * (1.0 - self.overlap_fraction)))

    @property
    def overlap_px(self) -> int:
        return self.tile_size - self.stride

    @property
    def output_shape(self) -> tuple[int, int]:
        h = self.tile_size + (self.rows - 1) * self.stride
        w = self.tile_size + (self.cols - 1) * self.stride
        return h, w


def _feather_profile(tile: int, overlap: int, ramp_lo: bool, ramp_hi: bool) -> np.ndarray:
    """1-D blend weight: linear 0->1 ramps across overlap bands, 1 elsewhere."""
    w = np.ones(tile, dtype=np.float64)
    if overlap > 0:
        ramp = (np.arange(overlap) + 0.5) / overlap
        if ramp_lo:
            w[:overlap] = np.minimum(w[:overlap], ramp)
        if ramp_hi:
            w[tile - overlap:] = np.minimum(w[tile - overlap:], ramp[::-1])
    return w


def stitch_weights(spec: GridSpec) -> np.ndarray:
    """Normalized per-tile weight maps, shape (rows, cols, tile, tile).

    At every output pixel the weights of the tiles covering it sum to 1.
    """
    t, v = spec.tile_size, spec.overlap_px
    raw = np.zeros((spec.rows, spec.cols, t, t), dtype=np.float64)
    for r in range(spec.rows):
        wy = _feather_profile(t, v, ramp_lo=r > 0, ramp_hi=r < spec.rows - 1)
        for c in range(spec.cols):
            wx = _feather_profile(t, v, ramp_lo=c > 0, ramp_hi=c < spec.cols - 1)
            raw[r, c] = wy[:, None] * wx[None, :]
    total = np.zeros(spec.output_shape, dtype=np.float64)
    for r in range(spec.rows):
        for c in range(spec.cols):
            y, x = r * spec.stride, c * spec.stride
            total[y:y + t, x:x + t] += raw[r, c]
    for r in range(spec.rows):
        for c in range(spec.cols):
            y, x = r * spec.stride, c * spec.stride
            raw[r, c] /= total[y:y + t, x:x + t]
    return raw


def stitch(tiles, spec: GridSpec) -> np.ndarray:
    """Blend a rows*cols list/array of tiles into one feathered canvas."""
    tiles = np.asarray(tiles, dtype=np.float64)
    if tiles.shape[0] != spec.rows * spec.cols and tiles.shape[:2] != (spec.rows, spec.cols):
        raise ValueError(f"expected {spec.rows}x{spec.cols} tiles, got {tiles.shape}")
    tiles = tiles.reshape(spec.rows, spec.cols, spec.tile_size, spec.tile_size, 3)
    weights = stitch_weights(spec)
    out = np.zeros(spec.output_shape + (3,), dtype=np.float64)
    t = spec.tile_size
    for r in range(spec.rows):
        for c in range(spec.cols):
            y, x = r * spec.stride, c * spec.stride
            out[y:y + t, x:x + t] += weights[r, c][..., None] * tiles[r, c]
    return out


def save_png(path, image: np.ndarray) -> None:
    """Write a float [0,1] image as 8-bit PNG (round half up)."""
    arr = np.floor(np.clip(np.asarray(image), 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    if arr.ndim == 2:
        arr = np.repeat(arr[..., None], 3, axis=-1)
    Image.fromarray(arr, mode="RGB").save(path)


def load_png(path) -> np.ndarray:
    """Read a PNG into a float (H, W, 3) image in [0,1]."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return arr / 255.0
