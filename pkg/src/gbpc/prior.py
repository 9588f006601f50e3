"""Fusion prior composition from a granular-ball domain assignment.

Each pixel blends its two source luminances with convex weights driven
by the pixel's label:

* BND pixels weight by distinguishability inside the recorded ball:
  with D = max(L_A, L_B) and L = max(|D - (mu - r)|, |D - (mu + r)|),
  the brighter element takes w = L / (2 r) and the partner 1 - w; ties
  resolve toward B taking w.  A zero-radius ball degenerates to equal
  weights.
* POS pixels give the brighter element the constant separable weight
  2 k / (2 k + 1), derived from the evolution geometry: separated
  elements sit at least 2 k Delta_d apart relative to a Delta_d
  within-ball spread.

A modality guard handles near-unimodal pairs: when the separable pixel
ratio dr_pos reaches the threshold M (inclusive), both domain-ratio
coefficients collapse to 0.5 and POS pixel weights reset to 0.5; BND
weights keep their evidence.  The composed prior stays in real
arithmetic; quantization to 8 bits happens only at file export.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import (BND, POS, DomainAssignment, EngineConfig, GranularBall,
                     MetaGranularBall, build_universe, evolve)
from .imaging import ImagePair, LumaPlane, atomic_write_text, save_luma_png

DEFAULT_M = 0.95

__all__ = [
    "DEFAULT_M",
    "WeightMap",
    "PriorResult",
    "bnd_weight",
    "pos_weight",
    "domain_ratios",
    "modality_gate",
    "weight_maps",
    "compose_prior",
    "gbpc",
    "save_prior",
    "load_sidecar",
]


@dataclass(frozen=True)
class WeightMap:
    """Per-pixel convex weights for the two sources; w_a + w_b = 1."""

    w_a: np.ndarray
    w_b: np.ndarray


@dataclass(frozen=True)
class PriorResult:
    """Composed prior plus the coefficients the loss needs downstream.

    `prior` is the real-valued blend (float64, 0..255 scale); use
    `prior_plane()` for the 8-bit export view.  (r_pos, r_bnd) are the
    domain-ratio coefficients after the modality gate, `gated` records
    whether the gate fired.
    """

    prior: np.ndarray
    r_pos: float
    r_bnd: float
    gated: bool
    dr_pos: float
    dr_bnd: float
    config: EngineConfig
    m: float
    weights: WeightMap
    trace: list | None = None

    def prior_plane(self) -> LumaPlane:
        """Prior rounded to nearest into an 8-bit plane."""
        return LumaPlane(np.clip(np.rint(self.prior), 0, 255).astype(np.uint8))


def pos_weight(config: EngineConfig) -> float:
    """Separable-pixel weight for the brighter element, 2k / (2k + 1).

    Written 1 - delta_d / (2 k delta_d + delta_d): separated elements
    disagree by at least 2 k delta_d while the within-ball spread is at
    most delta_d, so the brighter element is trusted in proportion.
    """
    dd = config.delta_d
    return 1.0 - dd / (2.0 * config.k * dd + dd)


def bnd_weight(mg: MetaGranularBall, ball: GranularBall) -> tuple[float, float]:
    """Indistinguishable-pixel weights (w_a, w_b) inside `ball`.

    The farther the brighter element D sits from the ball boundary it
    is closest to the center of, the more it dominates: L measures D's
    distance to the farther boundary and w = L / (2 r) normalizes by
    the diameter.  r = 0 collapses to (0.5, 0.5).
    """
    if ball.r == 0:
        return (0.5, 0.5)
    d = float(max(mg.l_a, mg.l_b))
    lo_edge = ball.mu - ball.r
    hi_edge = ball.mu + ball.r
    l = max(abs(d - lo_edge), abs(d - hi_edge))
    w = l / (2.0 * ball.r)
    if mg.l_a > mg.l_b:
        return (w, 1.0 - w)
    return (1.0 - w, w)


def domain_ratios(assignment: DomainAssignment) -> tuple[float, float]:
    """Pixel fractions (dr_pos, dr_bnd) of the two labels.

    Counts are pixel-weighted: every coordinate carries one meta ball,
    so a value pair shared by many pixels counts once per pixel.
    dr_bnd is defined as 1 - dr_pos so the partition law holds exactly
    in floating point.
    """
    pos_balls = assignment.ball_labels == POS
    n_pos = int(assignment.universe.counts[pos_balls].sum())
    dr_pos = n_pos / assignment.universe.n_pixels
    return dr_pos, 1.0 - dr_pos


def modality_gate(dr_pos: float, dr_bnd: float,
                  m: float = DEFAULT_M) -> tuple[float, float, bool]:
    """Collapse the coefficients to (0.5, 0.5) when dr_pos >= m.

    A pair that is almost everywhere separable behaves like a single
    modality; the gate neutralizes the domain-ratio preference instead
    of amplifying it.  The threshold is inclusive.
    """
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"gate threshold must lie in [0, 1], got {m}")
    if dr_pos >= m:
        return 0.5, 0.5, True
    return dr_pos, dr_bnd, False


def weight_maps(pair: ImagePair, assignment: DomainAssignment,
                gated: bool = False) -> WeightMap:
    """Per-pixel source weights for a whole assignment, vectorized.

    Equivalent to calling bnd_weight / pos_weight pixel by pixel; when
    `gated`, POS pixels fall back to 0.5 while BND pixels keep their
    distinguishability weights.
    """
    uni = assignment.universe
    la = uni.pair_la.astype(np.float64)
    lb = uni.pair_lb.astype(np.float64)
    mu = assignment.ball_mu
    r = assignment.ball_r

    d = np.maximum(la, lb)
    lo_edge = mu - r
    hi_edge = mu + r
    l = np.maximum(np.abs(d - lo_edge), np.abs(d - hi_edge))
    with np.errstate(divide="ignore", invalid="ignore"):
        w_bnd = np.where(r > 0, l / (2.0 * r), 0.5)

    w_pos = 0.5 if gated else pos_weight(assignment.config)
    bright = np.where(assignment.ball_labels == POS, w_pos, w_bnd)
    ball_w_a = np.where(la > lb, bright, 1.0 - bright)
    ball_w_b = 1.0 - ball_w_a

    inv = uni.inverse
    return WeightMap(ball_w_a[inv], ball_w_b[inv])


def compose_prior(pair: ImagePair, assignment: DomainAssignment,
                  m: float = DEFAULT_M) -> PriorResult:
    """Blend the pair into a prior using the assignment's weights."""
    dr_pos, dr_bnd = domain_ratios(assignment)
    r_pos, r_bnd, gated = modality_gate(dr_pos, dr_bnd, m)
    weights = weight_maps(pair, assignment, gated=gated)
    a = pair.a.data.astype(np.float64)
    b = pair.b.data.astype(np.float64)
    prior = weights.w_a * a + weights.w_b * b
    return PriorResult(prior, r_pos, r_bnd, gated, dr_pos, dr_bnd,
                       assignment.config, m, weights)


def gbpc(pair: ImagePair, config: EngineConfig | None = None,
         m: float = DEFAULT_M, collect_trace: bool = False) -> PriorResult:
    """Universe -> evolution -> composition, the whole prior pipeline."""
    if config is None:
        config = EngineConfig()
    assignment = evolve(build_universe(pair), config,
                        collect_trace=collect_trace)
    result = compose_prior(pair, assignment, m)
    if collect_trace:
        result = dataclasses.replace(result, trace=assignment.trace)
    return result


def sidecar_payload(result: PriorResult) -> dict:
    return {
        "r_pos": result.r_pos,
        "r_bnd": result.r_bnd,
        "gated": result.gated,
        "k": result.config.k,
        "delta_d": result.config.delta_d,
        "m": result.m,
    }


def save_prior(result: PriorResult, png_path: str | Path) -> Path:
    """Write the 8-bit prior PNG plus its JSON sidecar atomically.

    The sidecar sits next to the PNG with a .json suffix and carries
    exactly the keys downstream training consumes: r_pos, r_bnd, gated,
    k, delta_d, m.  Returns the sidecar path.
    """
    png_path = Path(png_path)
    save_luma_png(result.prior_plane(), png_path)
    sidecar = png_path.with_suffix(".json")
    atomic_write_text(sidecar, json.dumps(sidecar_payload(result),
                                          sort_keys=True) + "\n")
    return sidecar


def load_sidecar(path: str | Path) -> dict:
    """Read a prior sidecar back; validates the key set."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    expected = {"r_pos", "r_bnd", "gated", "k", "delta_d", "m"}
    missing = expected - payload.keys()
    if missing:
        raise ValueError(f"sidecar {path} missing keys: {sorted(missing)}")
    return payload
