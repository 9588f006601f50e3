"""Fusion quality metrics over (fused, source A, source B) triples.

All metrics run on the 0..255 luminance scale.  Histogram metrics (EN,
MI) use 256 one-level bins, base-2 logs and the 0 log 0 = 0 convention.
Correlation metrics return 0 for a zero-variance operand instead of
NaN.  PSNR averages the two MSEs before the log and reports +inf for a
bit-exact double match.  VIF is intentionally not computed; reports
carry an explicit marker so downstream tables do not silently treat a
blank as a value.

Qabf is the gradient-preservation measure built from Sobel strength and
orientation agreement, with the published sigmoid calibration
(0.9994, -15, 0.5) for strength and (0.9879, -22, 0.8) for orientation
and unit strength-weight exponents.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve as _ndconvolve

from .imaging import LumaPlane
from .kernels import SOBEL_GX, SOBEL_GY

VIF_MARKER = "not computed"
METRIC_COLUMNS = ("EN", "MI", "PSNR", "SD", "AG", "CC", "SCD", "Qabf")

# Qabf sigmoid calibration: (ceiling, slope, midpoint).
QABF_STRENGTH = (0.9994, -15.0, 0.5)
QABF_ORIENTATION = (0.9879, -22.0, 0.8)

__all__ = [
    "METRIC_COLUMNS",
    "VIF_MARKER",
    "MetricReport",
    "entropy",
    "mutual_information",
    "psnr_fusion",
    "standard_deviation",
    "average_gradient",
    "correlation_coefficient",
    "sum_of_correlation_differences",
    "edge_preservation_q",
    "compute_report",
    "reports_to_csv",
    "report_to_json",
]


def _as_u8(img) -> np.ndarray:
    if isinstance(img, LumaPlane):
        return img.data
    arr = np.asarray(img)
    if arr.dtype != np.uint8 or arr.ndim != 2:
        raise ValueError("metrics expect uint8 2-D planes")
    return arr


def entropy(img) -> float:
    """Shannon entropy of the 256-bin intensity histogram, in bits."""
    counts = np.bincount(_as_u8(img).ravel(), minlength=256)
    p = counts / counts.sum()
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def _mi_pair(x: np.ndarray, y: np.ndarray) -> float:
    joint = np.bincount((x.astype(np.int32) * 256 + y.astype(np.int32)).ravel(),
                        minlength=65536).reshape(256, 256)
    p = joint / joint.sum()
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    outer = np.outer(px, py)
    mask = p > 0
    return float(np.sum(p[mask] * np.log2(p[mask] / outer[mask])))


def mutual_information(fused, a, b) -> float:
    """MI(F, A) + MI(F, B) from 256 x 256 joint histograms."""
    f = _as_u8(fused)
    return _mi_pair(f, _as_u8(a)) + _mi_pair(f, _as_u8(b))


def psnr_fusion(fused, a, b) -> float:
    """10 log10(255^2 / mean(MSE_FA, MSE_FB)); +inf when both MSEs are 0."""
    f = _as_u8(fused).astype(np.float64)
    mse_a = float(np.mean((f - _as_u8(a).astype(np.float64)) ** 2))
    mse_b = float(np.mean((f - _as_u8(b).astype(np.float64)) ** 2))
    mse = (mse_a + mse_b) / 2.0
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


def standard_deviation(img) -> float:
    """Population standard deviation of the fused plane."""
    return float(np.std(_as_u8(img).astype(np.float64)))


def average_gradient(img) -> float:
    """Mean forward-difference gradient magnitude over interior pixels.

    AG = mean(sqrt(dx^2 + dy^2) / sqrt(2)) on the (H-1) x (W-1) region
    where both forward differences exist.
    """
    f = _as_u8(img).astype(np.float64)
    if f.shape[0] < 2 or f.shape[1] < 2:
        return 0.0
    dx = f[:, 1:] - f[:, :-1]
    dy = f[1:, :] - f[:-1, :]
    grad = np.sqrt(dx[:-1, :] ** 2 + dy[:, :-1] ** 2) / math.sqrt(2.0)
    return float(np.mean(grad))


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(np.sum(xc * xc)) * float(np.sum(yc * yc)))
    if denom == 0.0:
        return 0.0
    return float(np.sum(xc * yc)) / denom


def correlation_coefficient(fused, a, b) -> float:
    """Mean of Pearson(F, A) and Pearson(F, B); zero-variance terms are 0."""
    f = _as_u8(fused).astype(np.float64)
    return (_pearson(f, _as_u8(a).astype(np.float64))
            + _pearson(f, _as_u8(b).astype(np.float64))) / 2.0


def sum_of_correlation_differences(fused, a, b) -> float:
    """SCD = corr(F - B, A) + corr(F - A, B)."""
    f = _as_u8(fused).astype(np.float64)
    af = _as_u8(a).astype(np.float64)
    bf = _as_u8(b).astype(np.float64)
    return _pearson(f - bf, af) + _pearson(f - af, bf)


def _sobel_parts(plane: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = _ndconvolve(plane, SOBEL_GX, mode="nearest")
    gy = _ndconvolve(plane, SOBEL_GY, mode="nearest")
    g = np.sqrt(gx * gx + gy * gy)
    # atan of the component ratio; a vanishing gx is nudged so the
    # orientation degenerates to +-pi/2 instead of NaN.
    alpha = np.arctan(gy / np.where(gx == 0.0, 1e-10, gx))
    return g, alpha


def _edge_agreement(g_src, a_src, g_f, a_f):
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(g_src > g_f,
                         np.divide(g_f, g_src, out=np.zeros_like(g_f),
                                   where=g_src != 0),
                         np.divide(g_src, g_f, out=np.zeros_like(g_src),
                                   where=g_f != 0))
    angle = 1.0 - np.abs(a_src - a_f) * (2.0 / math.pi)
    cg, kg, sg = QABF_STRENGTH
    ca, ka, sa = QABF_ORIENTATION
    qg = cg / (1.0 + np.exp(kg * (ratio - sg)))
    qa = ca / (1.0 + np.exp(ka * (angle - sa)))
    return qg * qa


def edge_preservation_q(fused, a, b) -> float:
    """Qabf: gradient strength and orientation transfer from both sources.

    Per-pixel agreements Q_af, Q_bf are weighted by the source gradient
    strengths (unit exponent) and pooled jointly.  Symmetric under
    source swap; a pair of zero-gradient sources scores 0.
    """
    f = _as_u8(fused).astype(np.float64)
    g_f, a_f = _sobel_parts(f)
    g_a, al_a = _sobel_parts(_as_u8(a).astype(np.float64))
    g_b, al_b = _sobel_parts(_as_u8(b).astype(np.float64))
    q_af = _edge_agreement(g_a, al_a, g_f, a_f)
    q_bf = _edge_agreement(g_b, al_b, g_f, a_f)
    denom = float(np.sum(g_a + g_b))
    if denom == 0.0:
        return 0.0
    return float(np.sum(q_af * g_a + q_bf * g_b)) / denom


@dataclass(frozen=True)
class MetricReport:
    """One evaluation row; field order matches the emitted column order."""

    pair_id: str
    method: str
    en: float
    mi: float
    psnr: float
    sd: float
    ag: float
    cc: float
    scd: float
    qabf: float

    def values(self) -> tuple[float, ...]:
        return (self.en, self.mi, self.psnr, self.sd, self.ag, self.cc,
                self.scd, self.qabf)


def compute_report(fused, a, b, pair_id: str = "", method: str = "") -> MetricReport:
    """Evaluate the full metric battery on one triple."""
    return MetricReport(
        pair_id=pair_id,
        method=method,
        en=entropy(fused),
        mi=mutual_information(fused, a, b),
        psnr=psnr_fusion(fused, a, b),
        sd=standard_deviation(fused),
        ag=average_gradient(fused),
        cc=correlation_coefficient(fused, a, b),
        scd=sum_of_correlation_differences(fused, a, b),
        qabf=edge_preservation_q(fused, a, b),
    )


def reports_to_csv(reports) -> str:
    """Render reports as CSV with the fixed metric column order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("pair_id", "method") + METRIC_COLUMNS)
    for rep in reports:
        writer.writerow((rep.pair_id, rep.method)
                        + tuple(repr(v) for v in rep.values()))
    return buf.getvalue()


def report_to_json(report: MetricReport) -> str:
    """One report as a JSON object, VIF marked as not computed.

    An infinite PSNR is rendered as the string "inf" to keep the output
    strict JSON.
    """
    payload = {"pair_id": report.pair_id, "method": report.method}
    payload.update((k, v if math.isfinite(v) else "inf")
                   for k, v in zip(METRIC_COLUMNS, report.values()))
    payload["VIF"] = VIF_MARKER
    return json.dumps(payload, sort_keys=False)
