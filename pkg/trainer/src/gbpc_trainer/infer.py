"""Whole-image inference and color recombination.

The network is fully convolutional, so images of any size run
directly, no tiling.  Luma comes from the checkpoint; output chroma
is the saliency-weighted average of the two sources' chroma, each
pixel weighted by its distance from the neutral value 128, falling
back to neutral where both sources are achromatic.  Grayscale inputs
produce a grayscale PNG.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .color import quantize, rgb_to_ycbcr, ycbcr_to_rgb
from .model import FewShotFusionNet
from .train import _atomic_write_bytes, load_checkpoint

__all__ = ["DecodeError", "fuse_planes", "fuse_chroma", "fuse_images"]


class DecodeError(ValueError):
    """An input image could not be decoded."""


def _load_image(path):
    """Decode to (rgb array or None, luma plane 0..255 float, is_color)."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"input image not found: {p}")
    try:
        with Image.open(p) as img:
            img.load()
            is_color = img.mode not in ("1", "L", "I", "I;16", "F")
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"cannot decode {p}: {exc}") from exc
    y, cb, cr = rgb_to_ycbcr(rgb)
    return (cb, cr) if is_color else None, y, is_color


def fuse_planes(model: FewShotFusionNet, a: np.ndarray,
                b: np.ndarray) -> np.ndarray:
    """Fuse two 0..255 luma planes; returns a 0..255 float plane."""
    a = np.asarray(a, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"luma planes must match, got {a.shape} vs {b.shape}")
    stack = torch.from_numpy(np.stack([a, b]) / 255.0).unsqueeze(0)
    with torch.no_grad():
        fused = model(stack)[0, 0].numpy()
    return fused.astype(np.float64) * 255.0


def fuse_chroma(ca: np.ndarray, cb: np.ndarray) -> np.ndarray:
    """Saliency-weighted chroma: weight each source by |C - 128|."""
    ca = np.asarray(ca, dtype=np.float64)
    cb = np.asarray(cb, dtype=np.float64)
    wa = np.abs(ca - 128.0)
    wb = np.abs(cb - 128.0)
    den = wa + wb
    fused = np.where(den > 0.0, (ca * wa + cb * wb) / np.where(den > 0, den, 1.0),
                     128.0)
    return fused


def fuse_images(checkpoint, path_a, path_b, out_path) -> Path:
    """Fuse two image files into a PNG next to the given path.

    Accepts a checkpoint path or an already loaded model.  Color is
    emitted when either source carries chroma.
    """
    if isinstance(checkpoint, FewShotFusionNet):
        model = checkpoint
    else:
        model, _ = load_checkpoint(checkpoint)

    chroma_a, y_a, color_a = _load_image(path_a)
    chroma_b, y_b, color_b = _load_image(path_b)
    if y_a.shape != y_b.shape:
        raise ValueError(
            f"image sizes differ: {y_a.shape[::-1]} vs {y_b.shape[::-1]}")

    fused_y = fuse_planes(model, y_a, y_b)
    out_path = Path(out_path)
    if not (color_a or color_b):
        image = Image.fromarray(quantize(fused_y), mode="L")
    else:
        neutral = np.full_like(fused_y, 128.0)
        cb_a, cr_a = chroma_a if chroma_a is not None else (neutral, neutral)
        cb_b, cr_b = chroma_b if chroma_b is not None else (neutral, neutral)
        rgb = ycbcr_to_rgb(fused_y, fuse_chroma(cb_a, cb_b),
                           fuse_chroma(cr_a, cr_b))
        image = Image.fromarray(quantize(rgb), mode="RGB")

    buf = io.BytesIO()
    image.save(buf, format="PNG")
    _atomic_write_bytes(out_path, buf.getvalue())
    return out_path
