"""Minimal full-range BT.601 color transforms for inference output.

Self-contained on purpose: the trainer talks to the prior toolkit
only through files, so it carries its own copy of the standard
luma/chroma conversion.  Arrays are float64 planes; quantization to
uint8 happens once at export with round-half-even.
"""

from __future__ import annotations

import numpy as np

__all__ = ["rgb_to_ycbcr", "ycbcr_to_rgb", "quantize"]


def rgb_to_ycbcr(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(H, W, 3) RGB in 0..255 to full-range (y, cb, cr) float planes."""
    arr = np.asarray(rgb, dtype=np.float64)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return y, cb, cr


def ycbcr_to_rgb(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> np.ndarray:
    """Full-range (y, cb, cr) float planes to an (H, W, 3) float RGB."""
    y = np.asarray(y, dtype=np.float64)
    cb = np.asarray(cb, dtype=np.float64) - 128.0
    cr = np.asarray(cr, dtype=np.float64) - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    return np.stack([r, g, b], axis=-1)


def quantize(plane: np.ndarray) -> np.ndarray:
    """Round to nearest (half to even) and clip into 0..255 uint8."""
    return np.clip(np.rint(np.asarray(plane, dtype=np.float64)),
                   0, 255).astype(np.uint8)
