"""Few-shot training under the sample-adaptive loss.

One configuration object in, one checkpoint plus a per-epoch loss
curve out.  Every batch draws its (r_pos, r_bnd) coefficients from
the patches' own sidecars (or a fixed ablation override), so each
sample is optimized against its own prior structure.  Kernel parity
against the fixture dump is checked before the first step; training
never starts on drifted kernels.

Determinism: all randomness flows from one torch.Generator seeded by
the config, data is preloaded (no worker nondeterminism), and the
model's initialization is reseeded, so reruns of the same config
produce identical loss curves within framework guarantees.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch

from .data import FusionPatchDataset
from .model import FewShotFusionNet, PARAM_BUDGET, param_count
from .ops import adaptive_loss
from .parity import DEFAULT_ATOL, ensure_parity

__all__ = ["TrainConfig", "TrainResult", "train", "save_checkpoint",
           "load_checkpoint"]


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run needs, recorded into the checkpoint."""

    manifest: str
    fixtures: str
    out_dir: str
    epochs: int = 100
    lr: float = 1e-3
    batch_size: int = 16
    seed: int = 0
    override: tuple | None = None
    use_pos: bool = True
    use_bnd: bool = True
    use_laplacian: bool = True
    n_shot: int | None = None
    parity_atol: float = DEFAULT_ATOL

    def __post_init__(self):
        if self.epochs <= 0:
            raise ValueError("epochs must be positive")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be at least 1")


@dataclass(frozen=True)
class TrainResult:
    checkpoint_path: Path
    curve_path: Path
    epoch_losses: list = field(default_factory=list)
    parity_report: object = None


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_checkpoint(path: Path, model: FewShotFusionNet,
                    config: TrainConfig) -> None:
    """Serialize weights plus full provenance, atomically."""
    payload = {
        "state_dict": model.state_dict(),
        "param_count": param_count(model),
        "optimizer": "adam",
        "config": asdict(config),
    }
    buf = io.BytesIO()
    torch.save(payload, buf)
    _atomic_write_bytes(Path(path), buf.getvalue())


def load_checkpoint(path) -> tuple[FewShotFusionNet, dict]:
    """Rebuild the model in eval mode; returns (model, payload)."""
    payload = torch.load(path, map_location="cpu", weights_only=False)
    model = FewShotFusionNet()
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload


def train(config: TrainConfig, on_batch=None) -> TrainResult:
    """Run the few-shot loop; emits checkpoint.pt and loss_curve.csv.

    `on_batch(epoch, batch_index, parts)` is called after each forward
    pass with the batch's LossParts, before the optimizer step; tests
    and ablation studies hook it to observe per-term behaviour.
    """
    parity_report = ensure_parity(config.fixtures, config.parity_atol)
    dataset = FusionPatchDataset(config.manifest, n_shot=config.n_shot,
                                 override=config.override)
    n = len(dataset)

    torch.manual_seed(config.seed)
    model = FewShotFusionNet()
    if param_count(model) > PARAM_BUDGET:
        raise AssertionError(
            f"model has {param_count(model)} parameters, "
            f"budget {PARAM_BUDGET}")
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    sampler = torch.Generator().manual_seed(config.seed)

    epoch_losses = []
    for epoch in range(1, config.epochs + 1):
        order = torch.randperm(n, generator=sampler)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            stack = torch.cat([dataset.a[idx], dataset.b[idx]], dim=1)
            out = model(stack)
            parts = adaptive_loss(
                out, dataset.prior[idx], dataset.a[idx], dataset.b[idx],
                dataset.r_pos[idx], dataset.r_bnd[idx],
                use_pos=config.use_pos, use_bnd=config.use_bnd,
                use_laplacian=config.use_laplacian)
            if on_batch is not None:
                on_batch(epoch, start // config.batch_size, parts)
            loss = parts.total
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.detach().item() * idx.shape[0]
        epoch_losses.append(total / n)

    out_dir = Path(config.out_dir)
    checkpoint_path = out_dir / "checkpoint.pt"
    curve_path = out_dir / "loss_curve.csv"
    save_checkpoint(checkpoint_path, model, config)

    text = io.StringIO()
    writer = csv.writer(text)
    writer.writerow(["epoch", "mean_loss"])
    for epoch, value in enumerate(epoch_losses, 1):
        writer.writerow([epoch, repr(value)])
    _atomic_write_bytes(curve_path, text.getvalue().encode())

    return TrainResult(checkpoint_path, curve_path, epoch_losses,
                       parity_report)
