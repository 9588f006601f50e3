"""Differentiation kernels, SSIM and the adaptive fusion loss.

All kernels operate on planes normalized to [0, 1].  Gradients use the
classic 3x3 Sobel pair with replicate border padding; the magnitude is
sqrt((Gx * I)^2 + (Gy * I)^2).  The Laplacian is the 4-neighbour
stencil, signed, also replicate-padded.  SSIM is the windowed original:
11x11 Gaussian, sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1.0,
valid-mode windows, mean over the map.

The total loss against a composed prior is

    L = (1 - SSIM(out, prior))
        + r_pos * L1(sobel(out), sobel(prior))
        + r_bnd * L1(sobel(out), sobel(a) + sobel(b))
        + L1(laplacian(out), laplacian(a) + laplacian(b))

with L1 the mean absolute difference and (r_pos, r_bnd) the gated
domain-ratio coefficients.  The source Sobel sum is used unclamped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve as _ndconvolve
from scipy.signal import convolve2d as _convolve2d

from .imaging import LumaPlane
from .prior import PriorResult

SOBEL_GX = np.array([[-1.0, 0.0, 1.0],
                     [-2.0, 0.0, 2.0],
                     [-1.0, 0.0, 1.0]])
SOBEL_GY = np.array([[-1.0, -2.0, -1.0],
                     [0.0, 0.0, 0.0],
                     [1.0, 2.0, 1.0]])
LAPLACIAN_KERNEL = np.array([[0.0, 1.0, 0.0],
                             [1.0, -4.0, 1.0],
                             [0.0, 1.0, 0.0]])

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

__all__ = [
    "SOBEL_GX",
    "SOBEL_GY",
    "LAPLACIAN_KERNEL",
    "LossBreakdown",
    "sobel",
    "laplacian",
    "gaussian_window",
    "ssim",
    "l1",
    "loss_total",
    "reference_fixtures",
]


def _as_plane(img) -> np.ndarray:
    """Coerce a LumaPlane or array to a float64 2-D plane."""
    if isinstance(img, LumaPlane):
        return img.normalized()
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D plane, got shape {arr.shape}")
    return arr


def sobel(img) -> np.ndarray:
    """Sobel gradient magnitude with replicate border padding."""
    plane = _as_plane(img)
    gx = _ndconvolve(plane, SOBEL_GX, mode="nearest")
    gy = _ndconvolve(plane, SOBEL_GY, mode="nearest")
    return np.sqrt(gx * gx + gy * gy)


def laplacian(img) -> np.ndarray:
    """Signed 4-neighbour Laplacian with replicate border padding."""
    return _ndconvolve(_as_plane(img), LAPLACIAN_KERNEL, mode="nearest")


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 2-D Gaussian window (separable outer product)."""
    half = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    g /= g.sum()
    return np.outer(g, g)


def ssim(x, y) -> float:
    """Structural similarity between two [0, 1] planes.

    Valid-mode windowing: only full 11x11 windows contribute, so inputs
    must be at least 11x11.  Identical inputs give exactly 1.0.
    """
    a = _as_plane(x)
    b = _as_plane(y)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(
            f"plane {a.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    win = gaussian_window()
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2

    mu_a = _convolve2d(a, win, mode="valid")
    mu_b = _convolve2d(b, win, mode="valid")
    mu_aa = mu_a * mu_a
    mu_bb = mu_b * mu_b
    mu_ab = mu_a * mu_b
    var_a = _convolve2d(a * a, win, mode="valid") - mu_aa
    var_b = _convolve2d(b * b, win, mode="valid") - mu_bb
    cov = _convolve2d(a * b, win, mode="valid") - mu_ab

    num = (2.0 * mu_ab + c1) * (2.0 * cov + c2)
    den = (mu_aa + mu_bb + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def l1(x, y) -> float:
    """Mean absolute difference between two planes."""
    a = _as_plane(x)
    b = _as_plane(y)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)))


@dataclass(frozen=True)
class LossBreakdown:
    """Adaptive loss components; l_total = l_ssim + l_pos + l_bnd."""

    l_ssim: float
    l_pos: float
    l_bnd: float

    @property
    def l_total(self) -> float:
        return self.l_ssim + self.l_pos + self.l_bnd


def loss_total(out, prior: PriorResult | np.ndarray, a, b,
               r_pos: float | None = None,
               r_bnd: float | None = None) -> LossBreakdown:
    """Adaptive loss of a fused plane against prior and sources.

    Parameters
    ----------
    out, a, b : LumaPlane or [0, 1] plane arrays.
    prior : PriorResult (coefficients read from it, prior rescaled from
        its 0..255 real values) or a [0, 1] plane, in which case r_pos
        and r_bnd must be given.
    """
    if isinstance(prior, PriorResult):
        prior_plane = prior.prior / 255.0
        r_pos = prior.r_pos if r_pos is None else r_pos
        r_bnd = prior.r_bnd if r_bnd is None else r_bnd
    else:
        prior_plane = _as_plane(prior)
        if r_pos is None or r_bnd is None:
            raise ValueError("r_pos and r_bnd are required with a raw prior plane")

    out_p = _as_plane(out)
    a_p = _as_plane(a)
    b_p = _as_plane(b)

    sob_out = sobel(out_p)
    l_ssim = 1.0 - ssim(out_p, prior_plane)
    l_pos = r_pos * l1(sob_out, sobel(prior_plane))
    l_bnd = (r_bnd * l1(sob_out, sobel(a_p) + sobel(b_p))
             + l1(laplacian(out_p), laplacian(a_p) + laplacian(b_p)))
    return LossBreakdown(l_ssim, l_pos, l_bnd)


def _smooth_field(rng: np.random.Generator, size: int) -> np.ndarray:
    """A seeded [0, 1] plane with both low-frequency structure and noise."""
    from scipy.ndimage import gaussian_filter

    base = gaussian_filter(rng.random((size, size)), sigma=3.0)
    base = base + 0.15 * rng.random((size, size))
    lo, hi = base.min(), base.max()
    if hi > lo:
        base = (base - lo) / (hi - lo)
    return base


def reference_fixtures(size: int = 32, n_cases: int = 20, seed: int = 7) -> dict:
    """Frozen kernel/loss fixtures for cross-implementation parity.

    Every case carries its input planes, coefficients and this module's
    outputs (Sobel and Laplacian maps of `out`, SSIM against the prior,
    and the loss breakdown) so a reimplementation can be checked
    end-to-end without sharing code.  Case 0 is all-constant (every
    expectation exactly zero except SSIM = 1), case 1 is a vertical
    step edge, the rest are seeded smooth random fields.
    """
    if size < SSIM_WINDOW:
        raise ValueError(f"fixture size must be >= {SSIM_WINDOW}")
    if n_cases < 2:
        raise ValueError("need at least the constant and step cases")
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(n_cases):
        if i == 0:
            name = "constant"
            out = prior = a = b = np.full((size, size), 0.5)
            r_pos, r_bnd = 0.5, 0.5
        elif i == 1:
            name = "step_edge"
            step = np.zeros((size, size))
            step[:, size // 2:] = 1.0
            out = prior = a = b = step
            r_pos, r_bnd = 0.5, 0.5
        else:
            name = f"random_{i:02d}"
            a = _smooth_field(rng, size)
            b = _smooth_field(rng, size)
            prior = np.clip(0.5 * a + 0.5 * b
                            + 0.05 * rng.standard_normal((size, size)), 0.0, 1.0)
            out = np.clip(prior + 0.08 * rng.standard_normal((size, size)),
                          0.0, 1.0)
            r_pos = float(rng.uniform(0.0, 1.0))
            r_bnd = 1.0 - r_pos
        breakdown = loss_total(out, prior, a, b, r_pos=r_pos, r_bnd=r_bnd)
        cases.append({
            "name": name,
            "r_pos": r_pos,
            "r_bnd": r_bnd,
            "out": out.tolist(),
            "prior": prior.tolist(),
            "a": a.tolist(),
            "b": b.tolist(),
            "expected": {
                "sobel_out": sobel(out).tolist(),
                "laplacian_out": laplacian(out).tolist(),
                "ssim_out_prior": ssim(out, prior),
                "l_ssim": breakdown.l_ssim,
                "l_pos": breakdown.l_pos,
                "l_bnd": breakdown.l_bnd,
                "l_total": breakdown.l_total,
            },
        })
    return {
        "schema": 1,
        "size": size,
        "seed": seed,
        "ssim": {"window": SSIM_WINDOW, "sigma": SSIM_SIGMA,
                 "k1": SSIM_K1, "k2": SSIM_K2},
        "cases": cases,
    }
