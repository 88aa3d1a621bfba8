"""Binary (action, stroke) dataset files for painter training.

NPDS format, little-endian:
    header: magic "NPDS" | version u32 = 1 | count u64 | action_dim u32
            | height u32 | width u32 | flags u32 (bit0 = discrete)
    record: action_dim float32 + height*width*3 uint8 (row-major RGB)

Continuous datasets use action_dim = 12.  Discrete datasets append the
lift flag as a 13th component (action_dim = 13, flags bit0 set) with the
leveled fields already snapped to their grid values.

Record i of a generation run is reproducible in isolation: both its
action draw and its render jitter are seeded with cfg.seed + i, so the
work can be sharded across workers without changing the output.
"""

from __future__ import annotations

import dataclasses
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .actions import (
    ACTION_DIM,
    DISCRETE_ACTION_DIM,
    sample_action,
    sample_discrete_action,
)
from .oracle import OracleConfig, render_stroke, render_stroke_discrete

MAGIC = b"NPDS"
VERSION = 1
_HEADER = struct.Struct("<4sIQIIII")
FLAG_DISCRETE = 1


@dataclass(frozen=True)
class DatasetInfo:
    count: int
    action_dim: int
    height: int
    width: int
    discrete: bool

    @property
    def record_size(self) -> int:
        return 4 * self.action_dim + self.height * self.width * 3


def float_to_uint8(img: np.ndarray) -> np.ndarray:
    """[0,1] float image to uint8, rounding half up."""
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def uint8_to_float(img: np.ndarray) -> np.ndarray:
    return img.astype(np.float32) / 255.0


def _pack_header(info: DatasetInfo) -> bytes:
    flags = FLAG_DISCRETE if info.discrete else 0
    return _HEADER.pack(
        MAGIC, VERSION, info.count, info.action_dim, info.height, info.width, flags
    )


def write_dataset(path, actions: np.ndarray, images: np.ndarray, discrete: bool = False) -> DatasetInfo:
    """Write actions (n, action_dim float) and images (n, H, W, 3) to NPDS."""
    actions = np.asarray(actions, dtype=np.float32)
    if images.dtype != np.uint8:
        images = float_to_uint8(images)
    n, h, w, c = images.shape
    if c != 3 or actions.shape[0] != n:
        raise ValueError("actions/images shape mismatch")
    info = DatasetInfo(count=n, action_dim=actions.shape[1], height=h, width=w, discrete=discrete)
    with open(path, "wb") as f:
        f.write(_pack_header(info))
        for i in range(n):
            f.write(actions[i].astype("<f4").tobytes())
            f.write(images[i].tobytes())
    return info


def read_info(path) -> DatasetInfo:
    with open(path, "rb") as f:
        raw = f.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, count, action_dim, height, width, flags = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    return DatasetInfo(
        count=count,
        action_dim=action_dim,
        height=height,
        width=width,
        discrete=bool(flags & FLAG_DISCRETE),
    )


def load_dataset(path) -> tuple[DatasetInfo, np.ndarray, np.ndarray]:
    """Load a full dataset: (info, actions float32 (n,d), images uint8 (n,H,W,3))."""
    info = read_info(path)
    n, d, h, w = info.count, info.action_dim, info.height, info.width
    record = info.record_size
    actions = np.empty((n, d), dtype=np.float32)
    images = np.empty((n, h, w, 3), dtype=np.uint8)
    with open(path, "rb") as f:
        f.seek(_HEADER.size)
        blob = f.read(n * record)
    if len(blob) != n * record:
        raise ValueError(f"{path}: truncated records")
    for i in range(n):
        off = i * record
        actions[i] = np.frombuffer(blob, dtype="<f4", count=d, offset=off)
        images[i] = np.frombuffer(
            blob, dtype=np.uint8, count=h * w * 3, offset=off + 4 * d
        ).reshape(h, w, 3)
    return info, actions, images


def generate_dataset(n: int, cfg: OracleConfig, out_path, discrete: bool = False) -> DatasetInfo:
    """Sample n actions, render them with the oracle, and write an NPDS file."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    dim = DISCRETE_ACTION_DIM if discrete else ACTION_DIM
    info = DatasetInfo(
        count=n, action_dim=dim, height=cfg.canvas_size, width=cfg.canvas_size,
        discrete=discrete,
    )
    with open(out_path, "wb") as f:
        f.write(_pack_header(info))
        for i in range(n):
            rng = np.random.default_rng(cfg.seed + i)
            cfg_i = dataclasses.replace(cfg, seed=cfg.seed + i)
            if discrete:
                dv = sample_discrete_action(rng)
                img = render_stroke_discrete(dv, cfg_i)
                vec = dv.to_array()
            else:
                act = sample_action(rng)
                img = render_stroke(act, cfg_i)
                vec = act.to_array()
            f.write(vec.astype("<f4").tobytes())
            f.write(float_to_uint8(img).tobytes())
    return info


def fingerprint(path, chunk_size: int = 1 << 20) -> str:
    """sha256 of a file, for checkpoint metadata and run manifests."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        while True:
            chunk = f.read(chunk_size)
            if not chunk:
                break
            h.update(chunk)
    return h.hexdigest()
