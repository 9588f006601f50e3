"""Few-shot fusion CNN trained under the granular-ball adaptive loss.

Consumes the prior toolkit's outputs strictly through its files: the
JSONL dataset manifest with PNG/JSON patch sidecars, and the kernel
parity fixtures its `kernels` subcommand emits.
"""

__version__ = "0.1.0"

from .color import quantize, rgb_to_ycbcr, ycbcr_to_rgb
from .data import OVERRIDES, FusionPatchDataset, ManifestError, load_manifest
from .infer import DecodeError, fuse_chroma, fuse_images, fuse_planes
from .model import PARAM_BUDGET, FewShotFusionNet, param_count
from .ops import (LAPLACIAN_KERNEL, SOBEL_GX, SOBEL_GY, LossParts,
                  adaptive_loss, gaussian_window, l1, laplacian, sobel, ssim)
from .parity import (COMPONENTS, DEFAULT_ATOL, CaseReport, ParityError,
                     ParityReport, ensure_parity, kernel_parity)
from .train import (TrainConfig, TrainResult, load_checkpoint,
                    save_checkpoint, train)

__all__ = [
    "__version__",
    "quantize", "rgb_to_ycbcr", "ycbcr_to_rgb",
    "OVERRIDES", "FusionPatchDataset", "ManifestError", "load_manifest",
    "DecodeError", "fuse_chroma", "fuse_images", "fuse_planes",
    "PARAM_BUDGET", "FewShotFusionNet", "param_count",
    "SOBEL_GX", "SOBEL_GY", "LAPLACIAN_KERNEL", "LossParts",
    "adaptive_loss", "gaussian_window", "l1", "laplacian", "sobel", "ssim",
    "COMPONENTS", "DEFAULT_ATOL", "CaseReport", "ParityError", "ParityReport",
    "ensure_parity", "kernel_parity",
    "TrainConfig", "TrainResult", "load_checkpoint", "save_checkpoint",
    "train",
]
