"""Self-check suites: stacking correctness and engine agreement.

Three suites, each over a seeded deterministic grid:

* stack oracle: brute-force expansion of stacked chains slices back
  into the original inputs,
* block structure: every materialized stacked site is exactly zero off
  its per-input blocks,
* engine agreement: all batch engines return the same values on random
  instances, pairwise within tolerance.

The quick scale runs a small sample of each grid; full runs the whole
grid (hundreds of cases, still seconds).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .engines import (
    GREEDY,
    SWEEP_LR,
    contract_btn,
    contract_ec,
    contract_ec_halving,
    contract_loop,
    plan_btn,
)
from .mps import MpsSpec, random_mps
from .stacking import stack_mps, verify_stack_oracle
from .tensor import max_rel_deviation

STACK_GRID_TOL = 1e-10
ENGINE_TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    cases: int
    max_deviation: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        msg = (
            f"{status} {self.name}: {self.cases} cases, "
            f"max deviation {self.max_deviation:.3e} (tol {self.tolerance:.1e})"
        )
        if self.detail:
            msg += f" [{self.detail}]"
        return msg


def _stack_grid(scale: str):
    if scale == "full":
        batches = range(1, 7)
        lengths = range(2, 7)
        bonds = range(1, 4)
        phys = (2, 3)
        seeds = (0, 1, 2)
    else:
        batches = (1, 2, 4)
        lengths = (2, 3, 5)
        bonds = (1, 2)
        phys = (2,)
        seeds = (0,)
    return product(batches, lengths, bonds, phys, seeds)


def _grid_inputs(batch, length, bond, phys, seed):
    return [
        random_mps(MpsSpec(length, phys, bond, seed=(seed, batch, length, bond, phys, b)))
        for b in range(batch)
    ]


def stack_oracle_suite(scale: str = "quick") -> SuiteResult:
    """Dense slices of the stacked chain must reproduce every input."""
    worst = 0.0
    cases = 0
    detail = ""
    for batch, length, bond, phys, seed in _stack_grid(scale):
        inputs = _grid_inputs(batch, length, bond, phys, seed)
        report = verify_stack_oracle(inputs, stack_mps(inputs), rel_tol=STACK_GRID_TOL)
        cases += 1
        if report.max_rel_deviation > worst:
            worst = report.max_rel_deviation
            detail = f"worst at B={batch} L={length} D={bond} k={phys} seed={seed}"
    return SuiteResult(
        "stack-oracle", cases, worst, STACK_GRID_TOL, worst <= STACK_GRID_TOL, detail
    )


def block_structure_suite(scale: str = "quick") -> SuiteResult:
    """Off-block entries of every materialized site must be exactly zero."""
    worst = 0.0
    cases = 0
    detail = ""
    for batch, length, bond, phys, seed in _stack_grid(scale):
        inputs = _grid_inputs(batch, length, bond, phys, seed)
        stacked = stack_mps(inputs)
        for j in range(stacked.num_sites):
            site = stacked.materialize_site(j)
            mask = np.ones(site.shape, dtype=bool)
            for b in range(batch):
                window = (slice(None),) + stacked.block_window(j, b)
                if j == stacked.placement:
                    window = window + (b,)
                mask[window] = False
            off = float(np.max(np.abs(site[mask]))) if mask.any() else 0.0
            cases += 1
            if off > worst:
                worst = off
                detail = f"worst at B={batch} L={length} D={bond} k={phys} site={j}"
    return SuiteResult("block-structure", cases, worst, 0.0, worst <= 0.0, detail)


def _engine_instances(scale: str):
    """Seeded random instance parameters (B, L, V, D, k, O)."""
    count = 50 if scale == "full" else 8
    rng = np.random.default_rng(20240 if scale == "full" else 20241)
    out = []
    for i in range(count):
        batch = int(rng.integers(1, 33 if scale == "full" else 9))
        length = int(rng.integers(2, 21 if scale == "full" else 7))
        core_bond = int(rng.integers(1, 9))
        input_bond = int(rng.integers(1, 4))
        phys = int(rng.integers(1, 5))
        out_dim = 10 if i % 3 == 0 else None
        out.append((batch, length, core_bond, input_bond, phys, out_dim))
    return out


def engine_agreement_suite(scale: str = "quick") -> SuiteResult:
    """All five engine variants agree pairwise on random instances."""
    worst = 0.0
    cases = 0
    detail = ""
    for batch, length, core_bond, input_bond, phys, out_dim in _engine_instances(scale):
        core = random_mps(MpsSpec(length, phys, core_bond, out_dim, seed=(7, cases)))
        samples = [
            random_mps(MpsSpec(length, phys, input_bond, seed=(11, cases, b)))
            for b in range(batch)
        ]
        stacked = stack_mps(samples)
        results = {
            "LP": contract_loop(core, samples).values,
            "BTN_SWEEP": contract_btn(
                core, stacked, plan_btn(core, stacked, SWEEP_LR)
            ).values,
            "BTN_GREEDY": contract_btn(
                core, stacked, plan_btn(core, stacked, GREEDY)
            ).values,
            "EC": contract_ec(core, samples).values,
            "EC_HALVING": contract_ec_halving(core, samples).values,
        }
        names = sorted(results)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                dev = max_rel_deviation(results[a], results[b])
                if dev > worst:
                    worst = dev
                    detail = f"worst {a} vs {b} at case {cases}"
        cases += 1
    return SuiteResult("engine-agreement", cases, worst, ENGINE_TOL, worst <= ENGINE_TOL, detail)


def run_verify(scale: str = "quick", log=print) -> list[SuiteResult]:
    """Run all suites at the given scale; log one line per suite."""
    if scale not in ("quick", "full"):
        raise ValueError(f"scale must be 'quick' or 'full', got {scale!r}")
    results = [
        stack_oracle_suite(scale),
        block_structure_suite(scale),
        engine_agreement_suite(scale),
    ]
    if log is not None:
        for r in results:
            log(r.line())
    return results
