"""Synthetic inputs and the prior-toolkit CLI wrapper for the tests."""

from __future__ import annotations

import shutil
import subprocess
import sys

import numpy as np
from PIL import Image

GBPC = [shutil.which("gbpc")] if shutil.which("gbpc") else [
    sys.executable, "-m", "gbpc.cli"]


def run_gbpc(*args):
    proc = subprocess.run([*GBPC, *map(str, args)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def write_pair(directory, stem, seed, size=32):
    """Two structured grayscale planes saved as PNGs; returns their paths."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(float)
    a = np.clip(120 + 80 * np.sin(xx / 5.0 + seed)
                + rng.normal(0, 8, (size, size)), 0, 255).astype(np.uint8)
    b = np.clip(100 + 90 * np.cos(yy / 7.0 + seed)
                + rng.normal(0, 8, (size, size)), 0, 255).astype(np.uint8)
    path_a = directory / f"{stem}_a.png"
    path_b = directory / f"{stem}_b.png"
    Image.fromarray(a, "L").save(path_a)
    Image.fromarray(b, "L").save(path_b)
    return path_a, path_b
