"""strokeforge: differentiable neural painters over a dab-based stroke oracle."""

from .actions import (
    ACTION_DIM,
    ACTION_FIELDS,
    Action,
    DiscreteAction,
    clip_action,
    sample_action,
)
from .canvas import GridSpec, alpha_from_white, composite, stitch
from .oracle import OracleConfig, ink_mass, render_stroke, render_stroke_discrete

__version__ = "0.1.0"

__all__ = [
    "ACTION_DIM",
    "ACTION_FIELDS",
    "Action",
    "DiscreteAction",
    "clip_action",
    "sample_action",
    "OracleConfig",
    "render_stroke",
    "render_stroke_discrete",
    "ink_mass",
    "GridSpec",
    "alpha_from_white",
    "composite",
    "stitch",
    "__version__",
]
