"""The few-shot fusion network.

Four 3x3 convolution layers at 16 hidden channels with plain ReLU
nonlinearities and a final 1x1 projection, 7,281 parameters total,
well under the 20,000-parameter budget.  No attention, normalization
or other regularization modules.  Replicate padding keeps the network
fully convolutional and size-preserving, so whole images of any size
at least 3x3 run directly.

The projection bias starts at 0.5 so initial outputs sit mid-range,
away from the [0, 1] clamp where gradients vanish.
"""

from __future__ import annotations

import torch
from torch import nn

HIDDEN_CHANNELS = 16
PARAM_BUDGET = 20_000

__all__ = ["FewShotFusionNet", "PARAM_BUDGET", "param_count"]


class FewShotFusionNet(nn.Module):
    """Two stacked source luma planes in, one fused luma plane out."""

    def __init__(self, hidden: int = HIDDEN_CHANNELS):
        super().__init__()
        conv = lambda cin, cout: nn.Conv2d(cin, cout, 3, padding=1,
                                           padding_mode="replicate")
        self.features = nn.Sequential(
            conv(2, hidden), nn.ReLU(),
            conv(hidden, hidden), nn.ReLU(),
            conv(hidden, hidden), nn.ReLU(),
            conv(hidden, hidden), nn.ReLU(),
        )
        self.project = nn.Conv2d(hidden, 1, 1)
        with torch.no_grad():
            self.project.bias.fill_(0.5)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """(B, 2, H, W) source stack to (B, 1, H, W) fused luma in [0, 1]."""
        if x.dim() != 4 or x.shape[1] != 2:
            raise ValueError(
                f"expected a (B, 2, H, W) source stack, got {tuple(x.shape)}")
        return torch.clamp(self.project(self.features(x)), 0.0, 1.0)


def param_count(model: nn.Module) -> int:
    """Total number of parameters, trainable or not."""
    return sum(p.numel() for p in model.parameters())
