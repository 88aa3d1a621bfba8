"""Desk-scale image sets: synthetic digits, procedural shape classes, loaders.

Everything is generated in-repo so the training pipelines run without
external downloads.  Loaders also accept user data: a directory of PNGs
(optionally labeled by `class_<k>/` subdirectories) or IDX-format digit
archives.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .canvas import load_png

N_CLASSES = 10


def _dejavu(size: int) -> ImageFont.FreeTypeFont:
    from matplotlib import font_manager

    path = font_manager.findfont("DejaVu Sans")
    return ImageFont.truetype(path, size)


def synth_digits(n_per_class: int, size: int = 64, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Black-on-white digit images with random affine jitter.

    Returns (images (N, size, size, 3) float in [0,1], labels (N,) int),
    shuffled, deterministic in the seed.
    """
    rng = np.random.default_rng(seed)
    images = []
    labels = []
    for digit in range(N_CLASSES):
        for _ in range(n_per_class):
            scale = rng.uniform(0.75, 1.05)
            font = _dejavu(int(size * 0.82 * scale))
            img = Image.new("L", (size, size), 255)
            draw = ImageDraw.Draw(img)
            text = str(digit)
            x0, y0, x1, y1 = draw.textbbox((0, 0), text, font=font)
            tx = (size - (x1 - x0)) / 2 - x0 + rng.uniform(-4, 4)
            ty = (size - (y1 - y0)) / 2 - y0 + rng.uniform(-4, 4)
            ink = int(rng.uniform(0, 60))
            draw.text((tx, ty), text, fill=ink, font=font)
            img = img.rotate(rng.uniform(-12, 12), resample=Image.BILINEAR,
                             fillcolor=255)
            arr = np.asarray(img, dtype=np.float64) / 255.0
            images.append(np.repeat(arr[..., None], 3, axis=-1))
            labels.append(digit)
    images = np.stack(images)
    labels = np.asarray(labels, dtype=np.int64)
    order = rng.permutation(len(labels))
    return images[order], labels[order]


SHAPE_CLASS_NAMES = (
    "disc", "ring", "hbar", "vbar", "diag", "cross",
    "dots", "triangle", "arc", "stripes",
)


def _shape_canvas(size: int):
    img = Image.new("L", (size, size), 255)
    return img, ImageDraw.Draw(img)


def synth_shapes(n_per_class: int, size: int = 64, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Procedural 10-class drawing set for the desk classifier zoo.

    Classes are simple geometric figures with jittered pose, scale, stroke
    width and gray level, rendered black-on-white like stroke paintings.
    """
    rng = np.random.default_rng(seed)
    images = []
    labels = []
    for cls in range(N_CLASSES):
        for _ in range(n_per_class):
            img, draw = _shape_canvas(size)
            s = size
            cx = s / 2 + rng.uniform(-0.08, 0.08) * s
            cy = s / 2 + rng.uniform(-0.08, 0.08) * s
            r = rng.uniform(0.22, 0.34) * s
            ink = int(rng.uniform(0, 70))
            w = max(2, int(rng.uniform(0.05, 0.1) * s))
            name = SHAPE_CLASS_NAMES[cls]
            if name == "disc":
                draw.ellipse([cx - r, cy - r, cx + r, cy + r], fill=ink)
            elif name == "ring":
                draw.ellipse([cx - r, cy - r, cx + r, cy + r], outline=ink, width=w)
            elif name == "hbar":
                draw.rectangle([cx - r, cy - w, cx + r, cy + w], fill=ink)
            elif name == "vbar":
                draw.rectangle([cx - w, cy - r, cx + w, cy + r], fill=ink)
            elif name == "diag":
                draw.line([cx - r, cy - r, cx + r, cy + r], fill=ink, width=2 * w)
            elif name == "cross":
                draw.line([cx - r, cy, cx + r, cy], fill=ink, width=w)
                draw.line([cx, cy - r, cx, cy + r], fill=ink, width=w)
            elif name == "dots":
                rad = max(2, int(0.06 * s))
                for gy in np.linspace(cy - r, cy + r, 3):
                    for gx in np.linspace(cx - r, cx + r, 3):
                        draw.ellipse([gx - rad, gy - rad, gx + rad, gy + rad], fill=ink)
            elif name == "triangle":
                pts = [(cx, cy - r), (cx - r, cy + r), (cx + r, cy + r)]
                draw.polygon(pts, outline=ink, width=w)
            elif name == "arc":
                box = [cx - r, cy - r, cx + r, cy + r]
                start = rng.uniform(0, 90)
                draw.arc(box, start=start, end=start + 200, fill=ink, width=w)
            elif name == "stripes":
                gap = max(4, int(0.2 * s))
                off = int(rng.uniform(0, gap))
                for x in range(-s, 2 * s, gap):
                    draw.line([x + off, 0, x + off + s // 2, s], fill=ink, width=w)
            arr = np.asarray(img.rotate(rng.uniform(-8, 8), resample=Image.BILINEAR,
                                        fillcolor=255), dtype=np.float64) / 255.0
            images.append(np.repeat(arr[..., None], 3, axis=-1))
            labels.append(cls)
    images = np.stack(images)
    labels = np.asarray(labels, dtype=np.int64)
    order = rng.permutation(len(labels))
    return images[order], labels[order]


def save_image_dir(out_dir, images: np.ndarray, labels: np.ndarray) -> None:
    """Write images as class_<k>/<i>.png, the layout the loaders ingest."""
    out_dir = Path(out_dir)
    counters = {}
    for img, label in zip(images, labels):
        cls_dir = out_dir / f"class_{int(label)}"
        cls_dir.mkdir(parents=True, exist_ok=True)
        i = counters.get(int(label), 0)
        counters[int(label)] = i + 1
        arr = np.floor(np.clip(img, 0, 1) * 255 + 0.5).astype(np.uint8)
        Image.fromarray(arr, mode="RGB").save(cls_dir / f"{i:05d}.png")


def _resize(img: np.ndarray, size: int) -> np.ndarray:
    if img.shape[0] == size and img.shape[1] == size:
        return img
    arr = np.floor(np.clip(img, 0, 1) * 255 + 0.5).astype(np.uint8)
    pil = Image.fromarray(arr, mode="RGB").resize((size, size), Image.BILINEAR)
    return np.asarray(pil, dtype=np.float64) / 255.0


def load_image_dir(path, size: int = 64) -> tuple[np.ndarray, np.ndarray | None]:
    """Load a directory of PNGs, resized to the painter resolution.

    `class_<k>/` subdirectories supply labels; a flat directory yields
    labels=None.
    """
    path = Path(path)
    class_dirs = sorted(p for p in path.iterdir() if p.is_dir() and p.name.startswith("class_"))
    images = []
    labels = []
    if class_dirs:
        for d in class_dirs:
            label = int(d.name.split("_", 1)[1])
            for f in sorted(d.glob("*.png")):
                images.append(_resize(load_png(f), size))
                labels.append(label)
        if not images:
            raise ValueError(f"no PNGs under {path}")
        return np.stack(images), np.asarray(labels, dtype=np.int64)
    files = sorted(path.glob("*.png"))
    if not files:
        raise ValueError(f"no PNGs under {path}")
    for f in files:
        images.append(_resize(load_png(f), size))
    return np.stack(images), None


def _open_maybe_gz(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_idx_images(path, size: int = 64) -> np.ndarray:
    """Read an IDX3 image archive (the standard digit-set format)."""
    with _open_maybe_gz(path) as f:
        magic, n, rows, cols = struct.unpack(">IIII", f.read(16))
        if magic != 0x803:
            raise ValueError(f"{path}: not an IDX3 image file (magic {magic:#x})")
        raw = np.frombuffer(f.read(n * rows * cols), dtype=np.uint8)
    raw = raw.reshape(n, rows, cols).astype(np.float64) / 255.0
    # digit archives are white-on-black; painters draw dark-on-white
    raw = 1.0 - raw
    out = np.empty((n, size, size, 3))
    for i in range(n):
        out[i] = _resize(np.repeat(raw[i][..., None], 3, axis=-1), size)
    return out


def load_idx_labels(path) -> np.ndarray:
    with _open_maybe_gz(path) as f:
        magic, n = struct.unpack(">II", f.read(8))
        if magic != 0x801:
            raise ValueError(f"{path}: not an IDX1 label file (magic {magic:#x})")
        return np.frombuffer(f.read(n), dtype=np.uint8).astype(np.int64)


def split_by_index(n: int, held_out_fraction: float = 0.2) -> tuple[np.ndarray, np.ndarray]:
    cut = max(1, int(round(n * (1.0 - held_out_fraction))))
    cut = min(cut, n - 1) if n > 1 else 1
    return np.arange(cut), np.arange(cut, n)
