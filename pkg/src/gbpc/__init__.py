"""Granular-ball pixel computing for multimodal image fusion.

The package composes fusion priors by evolving granular balls over the
luminance axis of a registered image pair, derives per-pixel source
weights and domain-ratio loss coefficients from the resulting decision
domains, and ships the surrounding tooling: signal kernels and the
adaptive loss, fusion quality metrics, dataset generation and a CLI.
"""

__version__ = "0.1.0"

from .engine import (BACKEND, BND, POS, DomainAssignment, EngineConfig,
                     GranularBall, MetaGranularBall, Universe,
                     build_universe, coarse_equivalent, evolve,
                     fine_equivalent)
from .imaging import (ChromaPlanes, DecodeError, DimensionMismatch,
                      ImagePair, LumaPlane, extract_patches, load_luma,
                      load_pair, patch_grid_shape, resize_to_cap)
from .kernels import (LossBreakdown, gaussian_window, l1, laplacian,
                      loss_total, reference_fixtures, sobel, ssim)
from .metrics import MetricReport, compute_report, entropy
from .prior import (DEFAULT_M, PriorResult, WeightMap, bnd_weight,
                    compose_prior, domain_ratios, gbpc, load_sidecar,
                    modality_gate, pos_weight, save_prior, weight_maps)
from .dataset import build_dataset, load_manifest, sweep

__all__ = [name for name in dir() if not name.startswith("_")]
