from .api import (
    PainterCheckpoint,
    PainterMetrics,
    SweepResult,
    action_sweep,
    evaluate_painter,
    load_painter,
    paint,
    paint_numpy,
    save_painter,
)
from .gan import GanPainterConfig, train_gan_painter
from .nets import PainterNet, PairCritic
from .vae import VaePainterConfig, train_vae_painter

__all__ = [
    "PainterCheckpoint",
    "PainterMetrics",
    "SweepResult",
    "action_sweep",
    "evaluate_painter",
    "load_painter",
    "paint",
    "paint_numpy",
    "save_painter",
    "GanPainterConfig",
    "train_gan_painter",
    "PainterNet",
    "PairCritic",
    "VaePainterConfig",
    "train_vae_painter",
]
