"""Closed-form element counts for the batch engines.

The counts model the thin-sample regime (interior sample bond extent 1)
with a shared core of uniform bond V over L sites and batch size B:

* the per-site fused chain the EC engine materializes,
* the transfer-matrix chain a left-right stacked-network sweep
  materializes, whose matrices are (B*V)-by-(B*V),
* the running intermediates either sweep carries.

All arithmetic is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engines import EngineStats, Method
from .errors import DimensionError, RegimeError


@dataclass(frozen=True)
class CostParams:
    sites: int
    batch: int
    core_bond: int
    input_bond: int = 1
    output_dim: int = 1  # extent of the output leg, 1 when absent
    phys_dim: int = 3

    def __post_init__(self) -> None:
        for name in ("sites", "batch", "core_bond", "input_bond", "output_dim", "phys_dim"):
            if getattr(self, name) < 1:
                raise DimensionError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True)
class CostReport:
    method: Method
    chain_elements: int
    intermediate_elements: int

    @property
    def total_elements(self) -> int:
        return self.chain_elements + self.intermediate_elements


def _require_thin(p: CostParams) -> None:
    if p.input_bond != 1:
        raise RegimeError(
            f"closed-form counts hold for input_bond == 1, got {p.input_bond}"
        )


def _intermediates(p: CostParams) -> int:
    return max(p.sites - 2, 0) * p.batch * p.core_bond + p.batch * p.output_dim


def estimate_ec(p: CostParams) -> CostReport:
    """Elements of the fused per-site chain plus sweep intermediates."""
    _require_thin(p)
    chain = (
        (p.sites - 1) * p.batch * p.core_bond**2
        + p.batch * p.core_bond * p.output_dim
        + p.batch * p.core_bond
    )
    return CostReport(Method.EC, chain, _intermediates(p))


def estimate_btn_sweep(p: CostParams) -> CostReport:
    """Elements of the stacked transfer chain plus sweep intermediates."""
    _require_thin(p)
    chain = (
        (p.sites - 1) * p.batch**2 * p.core_bond**2
        + p.batch**2 * p.input_bond * p.core_bond * p.output_dim
        + p.batch * p.core_bond
    )
    return CostReport(Method.BTN, chain, _intermediates(p))


@dataclass(frozen=True)
class EstimateCheck:
    measured_peak: int
    predicted_elements: int
    ratio: float
    low: float
    high: float
    passed: bool


def check_estimate(
    stats: EngineStats, report: CostReport, low: float = 0.5, high: float = 2.0
) -> EstimateCheck:
    """Compare a measured engine peak against the closed-form count."""
    predicted = report.total_elements
    ratio = stats.peak_elements / predicted
    return EstimateCheck(
        measured_peak=stats.peak_elements,
        predicted_elements=predicted,
        ratio=ratio,
        low=low,
        high=high,
        passed=low <= ratio <= high,
    )
