"""Reference brushstroke rasterizer (the "stroke oracle").

Stands in for a real painting program: non-differentiable, optionally
non-deterministic, and fully specified so rendered ground truth is
reproducible.  A stroke is a train of antialiased circular dabs stamped
along a quadratic Bezier path on a white canvas.

Rendering model
---------------
* path:      B(t) = (1-t)^2 P0 + 2(1-t)t P1 + t^2 P2, points in [0,1]^2
             mapped to pixel coordinates by multiplying with canvas_size.
* pressure:  p(t) = (1-t) * start_pressure + t * end_pressure.
* dab radius r(t) = min_radius_px + (max_radius_px - min_radius_px)
                    * brush_size * p(t).
* dab ink:   the action color quantized to 8 bits, stamped source-over
             with opacity p(t).
* antialias: per-pixel coverage is a 1px linear ramp on the signed
             distance from the pixel center to the disc edge,
             cov = clip(r + 0.5 - d, 0, 1).
* spacing:   consecutive dab centers are dab_spacing_factor * r(t) apart
             along the arc, approximated by thinning a dense uniform-t
             sampling of the curve (OVERSAMPLE points).
* noise:     if noise_scale > 0, each dab center is jittered by a normal
             with std noise_scale px and its radius scaled by
             (1 + N(0, noise_scale)), clamped at 0; the generator is
             seeded from cfg.seed so renders stay reproducible.

With noise_scale = 0 the render is a pure function of (action, cfg).
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass

import numpy as np

from .actions import ACTION_DIM, Action, DiscreteAction, clip_action

OVERSAMPLE = 1024


@dataclass(frozen=True)
class OracleConfig:
    """Canvas and dab-model parameters for the reference rasterizer."""

    canvas_size: int = 64
    dab_spacing_factor: float = 0.5
    max_radius_px: float = 8.0
    min_radius_px: float = 0.5
    noise_scale: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.canvas_size < 8:
            raise ValueError("canvas_size must be >= 8")
        if not (self.max_radius_px > self.min_radius_px > 0):
            raise ValueError("require max_radius_px > min_radius_px > 0")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")


def quantize_color(color: np.ndarray) -> np.ndarray:
    """Snap a float color in [0,1] to the 8-bit grid (round half up)."""
    return np.floor(np.asarray(color, dtype=np.float64) * 255.0 + 0.5) / 255.0


def bezier_points(points: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Evaluate a quadratic Bezier with 3x2 control points at parameters ts."""
    t = ts[:, None]
    p0, p1, p2 = points[0], points[1], points[2]
    return (1 - t) ** 2 * p0 + 2 * (1 - t) * t * p1 + t**2 * p2


def stamp_dab(canvas: np.ndarray, cx: float, cy: float, radius: float,
              color: np.ndarray, opacity: float) -> None:
    """Composite one antialiased disc onto the canvas in place.

    Coordinates are continuous pixel positions; pixel (row i, col j) has
    its center at (j + 0.5, i + 0.5).
    """
    if radius <= 0.0 or opacity <= 0.0:
        return
    h, w = canvas.shape[:2]
    x_lo = max(int(np.floor(cx - radius - 1.0)), 0)
    x_hi = min(int(np.ceil(cx + radius + 1.0)), w - 1)
    y_lo = max(int(np.floor(cy - radius - 1.0)), 0)
    y_hi = min(int(np.ceil(cy + radius + 1.0)), h - 1)
    if x_lo > x_hi or y_lo > y_hi:
        return
    ys = np.arange(y_lo, y_hi + 1, dtype=np.float64) + 0.5
    xs = np.arange(x_lo, x_hi + 1, dtype=np.float64) + 0.5
    dist = np.hypot(xs[None, :] - cx, ys[:, None] - cy)
    cov = np.clip(radius + 0.5 - dist, 0.0, 1.0)
    alpha = (opacity * cov)[:, :, None]
    region = canvas[y_lo:y_hi + 1, x_lo:x_hi + 1]
    region *= 1.0 - alpha
    region += alpha * color[None, None, :]


def _dab_schedule(action: Action, cfg: OracleConfig):
    """Dab centers, radii and opacities along the stroke before jitter."""
    pts = bezier_points(action.control_points, np.linspace(0.0, 1.0, OVERSAMPLE))
    pts_px = pts * cfg.canvas_size
    seg = np.hypot(np.diff(pts_px[:, 0]), np.diff(pts_px[:, 1]))
    arclen = np.concatenate([[0.0], np.cumsum(seg)])

    ts = np.linspace(0.0, 1.0, OVERSAMPLE)
    pressures = (1 - ts) * action.start_pressure + ts * action.end_pressure
    radii = cfg.min_radius_px + (
        cfg.max_radius_px - cfg.min_radius_px
    ) * action.brush_size * pressures

    idx = [0]
    last_s = 0.0
    for i in range(1, OVERSAMPLE):
        if arclen[i] - last_s >= cfg.dab_spacing_factor * radii[i]:
            idx.append(i)
            last_s = arclen[i]
    idx = np.asarray(idx)
    return pts_px[idx], radii[idx], pressures[idx]


def render_stroke(action, cfg: OracleConfig) -> np.ndarray:
    """Render one brushstroke on a white canvas.

    Returns an (H, W, 3) float64 image in [0, 1].  Deterministic
    bit-for-bit when noise_scale == 0 or for a fixed cfg.seed.
    """
    if not isinstance(action, Action):
        action = clip_action(action)
    else:
        action = clip_action(action.to_array())  # validates finiteness/range

    canvas = np.ones((cfg.canvas_size, cfg.canvas_size, 3), dtype=np.float64)
    centers, radii, opacities = _dab_schedule(action, cfg)

    if cfg.noise_scale > 0:
        rng = np.random.default_rng(cfg.seed)
        centers = centers + rng.normal(0.0, cfg.noise_scale, size=centers.shape)
        radii = radii * np.maximum(0.0, 1.0 + rng.normal(0.0, cfg.noise_scale, size=radii.shape))

    color = quantize_color(action.color)
    for (cx, cy), r, a in zip(centers, radii, opacities):
        stamp_dab(canvas, cx, cy, r, color, a)
    return canvas


def render_stroke_discrete(dv: DiscreteAction, cfg: OracleConfig) -> np.ndarray:
    """Render the discrete action variant.

    Size and pressures are snapped to the 10-level grid before rendering;
    a lifted brush yields an untouched white canvas.
    """
    if not isinstance(dv, DiscreteAction):
        raise TypeError("render_stroke_discrete expects a DiscreteAction")
    if dv.lift:
        return np.ones((cfg.canvas_size, cfg.canvas_size, 3), dtype=np.float64)
    return render_stroke(dv.snapped(), cfg)


def ink_mass(image: np.ndarray) -> float:
    """Total darkening of a white canvas: sum over pixels of 1 - min channel."""
    return float(np.sum(1.0 - np.min(image, axis=-1)))


class ExternalOracle:
    """Adapter for a plug-in painting program.

    The external program must read 12 little-endian float32 action
    components on stdin and emit one raw H*W*3 RGB byte frame on stdout.
    Any executable honoring that contract can replace the built-in oracle.
    """

    def __init__(self, command: list[str], canvas_size: int = 64):
        self.command = list(command)
        self.canvas_size = int(canvas_size)

    def render(self, action) -> np.ndarray:
        if isinstance(action, Action):
            arr = action.to_array()
        else:
            arr = clip_action(action).to_array()
        payload = arr.astype("<f4").tobytes()
        n_bytes = self.canvas_size * self.canvas_size * 3
        proc = subprocess.run(
            self.command, input=payload, stdout=subprocess.PIPE, check=True
        )
        frame = proc.stdout
        if len(frame) != n_bytes:
            raise ValueError(
                f"external oracle returned {len(frame)} bytes, expected {n_bytes}"
            )
        img = np.frombuffer(frame, dtype=np.uint8).reshape(
            self.canvas_size, self.canvas_size, 3
        )
        return img.astype(np.float64) / 255.0


__all__ = [
    "ACTION_DIM",
    "OracleConfig",
    "render_stroke",
    "render_stroke_discrete",
    "stamp_dab",
    "bezier_points",
    "quantize_color",
    "ink_mass",
    "ExternalOracle",
]
