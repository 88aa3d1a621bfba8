"""Brushstroke action space.

A single brushstroke is controlled by 12 parameters in [0, 1]: start/end
pressure, brush size, RGB color, and three control points of a quadratic
Bezier curve in normalized canvas coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ACTION_DIM = 12

ACTION_FIELDS = (
    "start_pressure",
    "end_pressure",
    "brush_size",
    "color_r",
    "color_g",
    "color_b",
    "x0",
    "y0",
    "x1",
    "y1",
    "x2",
    "y2",
)

# Discrete variant: pressures and brush size snap to an even 10-level grid,
# plus a binary lift flag appended as a 13th component.
N_LEVELS = 10
LIFT_DIM = ACTION_DIM
DISCRETE_ACTION_DIM = ACTION_DIM + 1


@dataclass(frozen=True)
class Action:
    """One brushstroke: pressures, size, color, quadratic Bezier points."""

    start_pressure: float
    end_pressure: float
    brush_size: float
    color_r: float
    color_g: float
    color_b: float
    x0: float
    y0: float
    x1: float
    y1: float
    x2: float
    y2: float

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in ACTION_FIELDS], dtype=np.float64)

    @classmethod
    def from_array(cls, arr) -> "Action":
        arr = np.asarray(arr, dtype=np.float64).reshape(-1)
        if arr.shape[0] != ACTION_DIM:
            raise ValueError(f"expected {ACTION_DIM} components, got {arr.shape[0]}")
        return cls(*(float(v) for v in arr))

    @property
    def color(self) -> np.ndarray:
        return np.array([self.color_r, self.color_g, self.color_b], dtype=np.float64)

    @property
    def control_points(self) -> np.ndarray:
        """3x2 array of (x, y) points: start, control, end."""
        return np.array(
            [[self.x0, self.y0], [self.x1, self.y1], [self.x2, self.y2]],
            dtype=np.float64,
        )


def clip_action(raw) -> Action:
    """Clamp 12 raw reals into the valid action box [0, 1]^12.

    Raises ValueError on non-finite components.
    """
    arr = np.asarray(raw, dtype=np.float64).reshape(-1)
    if arr.shape[0] != ACTION_DIM:
        raise ValueError(f"expected {ACTION_DIM} components, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite action component")
    return Action.from_array(np.clip(arr, 0.0, 1.0))


def sample_action(rng: np.random.Generator) -> Action:
    """Draw an action with every component i.i.d. uniform in [0, 1]."""
    return Action.from_array(rng.uniform(0.0, 1.0, size=ACTION_DIM))


@dataclass(frozen=True)
class DiscreteAction:
    """Discrete action variant: leveled size/pressures plus a lift flag.

    Levels index an even grid over [0, 1] (level k maps to k/9).  A lifted
    brush produces no stroke regardless of the other fields.
    """

    base: Action
    brush_size_level: int
    start_pressure_level: int
    end_pressure_level: int
    lift: int

    def __post_init__(self):
        for name in ("brush_size_level", "start_pressure_level", "end_pressure_level"):
            lvl = getattr(self, name)
            if not (0 <= int(lvl) < N_LEVELS):
                raise ValueError(f"{name}={lvl} outside 0..{N_LEVELS - 1}")
        if self.lift not in (0, 1):
            raise ValueError(f"lift flag must be 0 or 1, got {self.lift}")

    def snapped(self) -> Action:
        """Continuous action with size/pressures snapped to the level grid."""
        arr = self.base.to_array()
        arr[0] = level_to_value(self.start_pressure_level)
        arr[1] = level_to_value(self.end_pressure_level)
        arr[2] = level_to_value(self.brush_size_level)
        return Action.from_array(arr)

    def to_array(self) -> np.ndarray:
        """13-component vector: snapped 12-layout plus the lift flag."""
        return np.concatenate([self.snapped().to_array(), [float(self.lift)]])


def level_to_value(level: int) -> float:
    """Map a discrete level 0..9 to its continuous value k/9."""
    level = int(level)
    if not (0 <= level < N_LEVELS):
        raise ValueError(f"level {level} outside 0..{N_LEVELS - 1}")
    return level / (N_LEVELS - 1)


def sample_discrete_action(rng: np.random.Generator) -> DiscreteAction:
    """Uniform draw over the discrete variant of the action space."""
    base = sample_action(rng)
    return DiscreteAction(
        base=base,
        brush_size_level=int(rng.integers(0, N_LEVELS)),
        start_pressure_level=int(rng.integers(0, N_LEVELS)),
        end_pressure_level=int(rng.integers(0, N_LEVELS)),
        lift=int(rng.integers(0, 2)),
    )
