"""Manifest-driven patch corpus loading.

Reads the fusion dataset exactly as the prior toolkit emits it: a
JSONL manifest whose first line is the header (schema 1) followed by
one entry per patch, with relative paths to the two source patches,
the composed prior PNG and its JSON sidecar carrying the per-patch
(r_pos, r_bnd, gated) coefficients.

Few-shot corpora are small, so everything is loaded eagerly into
float32 tensors.  The n_shot limit keeps only the patches of the
first n distinct source pairs in manifest order; coefficient
overrides replace every sidecar (r_pos, r_bnd) with one of the fixed
ablation settings.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from PIL import Image

MANIFEST_SCHEMA = 1
OVERRIDES = ((1.0, 0.0), (0.5, 0.5), (0.0, 1.0))

__all__ = ["OVERRIDES", "ManifestError", "FusionPatchDataset",
           "load_manifest"]


class ManifestError(ValueError):
    """The manifest is missing, malformed or from an unknown schema."""


def load_manifest(path) -> tuple[dict, list[dict]]:
    """Read a JSONL manifest as (header, entries)."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"manifest not found: {p}")
    lines = [line for line in p.read_text().splitlines() if line.strip()]
    if not lines:
        raise ManifestError(f"manifest {p} is empty")
    try:
        header = json.loads(lines[0])
        entries = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {p} is not JSONL: {exc}") from exc
    if header.get("schema") != MANIFEST_SCHEMA:
        raise ManifestError(
            f"manifest {p} has schema {header.get('schema')!r}, "
            f"expected {MANIFEST_SCHEMA}")
    if not entries:
        raise ManifestError(f"manifest {p} lists no patches")
    return header, entries


def _load_plane(path: Path) -> torch.Tensor:
    """A grayscale PNG as a (1, H, W) float32 tensor in [0, 1]."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"), dtype=np.float32) / 255.0
    return torch.from_numpy(arr).unsqueeze(0)


class FusionPatchDataset:
    """All patches of a manifest as stacked tensors.

    Attributes
    ----------
    a, b, prior : (N, 1, H, W) float32 tensors in [0, 1].
    r_pos, r_bnd : (N,) float32 coefficient vectors.
    gated : (N,) bool tensor.
    pair_ids : list of the source pair id per patch.
    """

    def __init__(self, manifest_path, n_shot: int | None = None,
                 override: tuple[float, float] | None = None):
        if override is not None:
            override = (float(override[0]), float(override[1]))
            if override not in OVERRIDES:
                raise ValueError(
                    f"override must be one of {OVERRIDES}, got {override}")
        if n_shot is not None and n_shot < 1:
            raise ValueError("n_shot must be at least 1")

        self.header, entries = load_manifest(manifest_path)
        root = Path(manifest_path).parent

        if n_shot is not None:
            keep_ids = []
            for entry in entries:
                if entry["pair_id"] not in keep_ids:
                    keep_ids.append(entry["pair_id"])
                if len(keep_ids) == n_shot:
                    break
            keep = set(keep_ids)
            entries = [e for e in entries if e["pair_id"] in keep]

        planes_a, planes_b, priors, r_pos, r_bnd, gated = [], [], [], [], [], []
        self.pair_ids = []
        for entry in entries:
            planes_a.append(_load_plane(root / entry["patch_a"]))
            planes_b.append(_load_plane(root / entry["patch_b"]))
            priors.append(_load_plane(root / entry["prior"]))
            sidecar = json.loads((root / entry["sidecar"]).read_text())
            if override is not None:
                r_pos.append(override[0])
                r_bnd.append(override[1])
            else:
                r_pos.append(float(sidecar["r_pos"]))
                r_bnd.append(float(sidecar["r_bnd"]))
            gated.append(bool(sidecar["gated"]))
            self.pair_ids.append(entry["pair_id"])

        self.a = torch.stack(planes_a)
        self.b = torch.stack(planes_b)
        self.prior = torch.stack(priors)
        self.r_pos = torch.tensor(r_pos, dtype=torch.float32)
        self.r_bnd = torch.tensor(r_bnd, dtype=torch.float32)
        self.gated = torch.tensor(gated, dtype=torch.bool)
        self.override = override
        self.n_shot = n_shot

    def __len__(self) -> int:
        return self.a.shape[0]
