"""Kernel parity against the prior toolkit's fixture dumps.

The prior toolkit's `kernels` subcommand writes a JSON file of cases,
each carrying its input planes, coefficients, and that side's Sobel /
Laplacian / SSIM / loss outputs.  This module replays every case
through the differentiable kernels in float64 and reports the largest
absolute error per component.  Training refuses to start unless every
component of every case agrees within the tolerance, so a drift in
either implementation is caught before it can shape a checkpoint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

from .ops import adaptive_loss, laplacian, sobel, ssim

DEFAULT_ATOL = 1e-4
COMPONENTS = ("sobel_out", "laplacian_out", "ssim_out_prior",
              "l_ssim", "l_pos", "l_bnd", "l_total")

__all__ = ["DEFAULT_ATOL", "COMPONENTS", "ParityError", "CaseReport",
           "ParityReport", "kernel_parity", "ensure_parity"]


class ParityError(RuntimeError):
    """A fixture component disagreed beyond tolerance."""


@dataclass(frozen=True)
class CaseReport:
    """Max absolute error per component for one fixture case."""

    name: str
    errors: dict
    atol: float

    @property
    def ok(self) -> bool:
        return all(err <= self.atol for err in self.errors.values())

    def failures(self) -> list[str]:
        return [f"{self.name}/{comp}: {err:.3e} > {self.atol:g}"
                for comp, err in self.errors.items() if err > self.atol]


@dataclass(frozen=True)
class ParityReport:
    """Parity outcome over a whole fixture file."""

    fixtures: str
    atol: float
    cases: list

    @property
    def ok(self) -> bool:
        return all(case.ok for case in self.cases)

    def failures(self) -> list[str]:
        return [line for case in self.cases for line in case.failures()]


def _plane(values) -> torch.Tensor:
    return torch.tensor(values, dtype=torch.float64)


def _replay_case(case: dict, atol: float) -> CaseReport:
    out = _plane(case["out"])
    prior = _plane(case["prior"])
    a = _plane(case["a"])
    b = _plane(case["b"])
    expected = case["expected"]

    parts = adaptive_loss(out, prior, a, b, case["r_pos"], case["r_bnd"])
    l_bnd = parts.l_bnd_sobel + parts.l_bnd_lap
    errors = {
        "sobel_out": float((sobel(out)[0, 0]
                            - _plane(expected["sobel_out"])).abs().max()),
        "laplacian_out": float((laplacian(out)[0, 0]
                                - _plane(expected["laplacian_out"])).abs().max()),
        "ssim_out_prior": abs(float(ssim(out, prior)[0])
                              - expected["ssim_out_prior"]),
        "l_ssim": abs(float(parts.l_ssim) - expected["l_ssim"]),
        "l_pos": abs(float(parts.l_pos) - expected["l_pos"]),
        "l_bnd": abs(float(l_bnd) - expected["l_bnd"]),
        "l_total": abs(float(parts.total) - expected["l_total"]),
    }
    return CaseReport(case["name"], errors, atol)


def kernel_parity(fixtures_path, atol: float = DEFAULT_ATOL) -> ParityReport:
    """Replay every fixture case and report per-component max errors."""
    p = Path(fixtures_path)
    if not p.exists():
        raise FileNotFoundError(f"parity fixtures not found: {p}")
    try:
        payload = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParityError(f"fixtures {p} are not valid JSON: {exc}") from exc
    if payload.get("schema") != 1 or "cases" not in payload:
        raise ParityError(f"fixtures {p} have an unknown layout")
    cases = [_replay_case(case, atol) for case in payload["cases"]]
    return ParityReport(str(p), atol, cases)


def ensure_parity(fixtures_path, atol: float = DEFAULT_ATOL) -> ParityReport:
    """kernel_parity that raises a named failure on any disagreement."""
    report = kernel_parity(fixtures_path, atol)
    if not report.ok:
        raise ParityError("kernel parity failed: "
                          + "; ".join(report.failures()))
    return report
