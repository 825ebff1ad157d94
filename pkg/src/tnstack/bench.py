"""Benchmark harness comparing the batch engines across batch sizes.

For every batch size, one shared random core and B random samples are
drawn deterministically from the run seed, each selected method is timed
over warmup plus repeated calls, and a row of medians, minima, peak
element counts and a value checksum is recorded. Rows serialize to a
delimited text format with a pinned header.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from statistics import median
from time import perf_counter

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
from .errors import MemoryGuardError
from .mps import Mps, MpsSpec, random_mps
from .stacking import stack_mps

DEFAULT_BATCH_SIZES = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000)
BENCH_METHODS = ("LP", "BTN_SWEEP", "BTN_GREEDY", "EC", "EC_HALVING")
DEFAULT_ELEMENT_GUARD = 200_000_000
CSV_HEADER = "method,B,median_seconds,min_seconds,peak_elements,checksum,skipped"
SKIP_OOM = "oom_guard"


def default_element_guard() -> int:
    """Element guard, overridable through TNSTACK_MEM_GUARD."""
    raw = os.environ.get("TNSTACK_MEM_GUARD")
    if raw is None:
        return DEFAULT_ELEMENT_GUARD
    return int(raw)


@dataclass
class BenchConfig:
    sites: int = 20
    phys_dim: int = 3
    core_bond: int = 6
    input_bond: int = 1
    output_dim: int | None = None
    batch_sizes: tuple[int, ...] = DEFAULT_BATCH_SIZES
    methods: tuple[str, ...] = BENCH_METHODS
    repeats: int = 5
    warmup: int = 2
    seed: int = 0
    threads: int = 1
    element_guard: int = field(default_factory=default_element_guard)

    def __post_init__(self) -> None:
        self.batch_sizes = tuple(int(b) for b in self.batch_sizes)
        self.methods = tuple(self.methods)
        if not self.batch_sizes:
            raise ValueError("batch_sizes must be non-empty")
        if any(b < 1 for b in self.batch_sizes):
            raise ValueError(f"batch sizes must be >= 1: {self.batch_sizes}")
        if list(self.batch_sizes) != sorted(set(self.batch_sizes)):
            raise ValueError(f"batch sizes must be strictly increasing: {self.batch_sizes}")
        unknown = [m for m in self.methods if m not in BENCH_METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; known: {list(BENCH_METHODS)}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")


@dataclass
class BenchRecord:
    method: str
    batch: int
    median_seconds: float
    min_seconds: float
    peak_elements: int
    checksum: float
    skipped: str = ""


def batch_instances(cfg: BenchConfig, batch: int) -> tuple[Mps, list[Mps]]:
    """Deterministic core and samples for one batch size.

    Sample b of batch size B is seeded by (seed, B, b), so the same
    config always reproduces the same instances bit for bit.
    """
    core = random_mps(
        MpsSpec(cfg.sites, cfg.phys_dim, cfg.core_bond, cfg.output_dim, seed=cfg.seed)
    )
    samples = [
        random_mps(
            MpsSpec(cfg.sites, cfg.phys_dim, cfg.input_bond, None, seed=(cfg.seed, batch, b))
        )
        for b in range(batch)
    ]
    return core, samples


def sweep_site_elements(cfg: BenchConfig, batch: int) -> int:
    """Largest transfer-site size a stacked left-right sweep materializes."""
    return cfg.phys_dim * (batch * cfg.core_bond * cfg.input_bond) ** 2


def _skip_record(method: str, batch: int) -> BenchRecord:
    return BenchRecord(method, batch, float("nan"), float("nan"), 0, float("nan"), SKIP_OOM)


def _bench_one(cfg: BenchConfig, method: str, core: Mps, samples: list[Mps]) -> BenchRecord:
    batch = len(samples)
    if method in ("BTN_SWEEP", "BTN_GREEDY") and (
        sweep_site_elements(cfg, batch) > cfg.element_guard
    ):
        return _skip_record(method, batch)

    def call():
        if method == "LP":
            return contract_loop(core, samples, threads=cfg.threads)
        if method == "EC":
            return contract_ec(core, samples)
        if method == "EC_HALVING":
            return contract_ec_halving(core, samples)
        stacked = stack_mps(samples)
        plan = plan_btn(
            core, stacked, strategy=SWEEP_LR if method == "BTN_SWEEP" else GREEDY
        )
        return contract_btn(core, stacked, plan, element_guard=cfg.element_guard)

    times = []
    try:
        for _ in range(cfg.warmup):
            call()
        result = None
        for _ in range(cfg.repeats):
            t0 = perf_counter()
            result = call()
            times.append(perf_counter() - t0)
    except MemoryGuardError:
        return _skip_record(method, batch)
    checksum = float(np.sum(result.values))
    return BenchRecord(
        method=method,
        batch=batch,
        median_seconds=float(median(times)),
        min_seconds=float(min(times)),
        peak_elements=result.stats.peak_elements,
        checksum=checksum,
    )


def run_bench(cfg: BenchConfig, log=None) -> list[BenchRecord]:
    """Run every configured method over every batch size."""
    records = []
    for batch in cfg.batch_sizes:
        core, samples = batch_instances(cfg, batch)
        for method in cfg.methods:
            rec = _bench_one(cfg, method, core, samples)
            records.append(rec)
            if log is not None:
                log(format_record(rec))
    return records


def _fmt(x: float) -> str:
    return "%.9g" % x


def format_record(r: BenchRecord) -> str:
    return (
        f"{r.method},{r.batch},{_fmt(r.median_seconds)},{_fmt(r.min_seconds)},"
        f"{r.peak_elements},{_fmt(r.checksum)},{r.skipped}"
    )


def emit_csv(records, path) -> None:
    """Write records with the pinned header; floats carry 9 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in records:
            fh.write(format_record(r) + "\n")


def read_csv(path) -> list[BenchRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(
            f"unexpected header {lines[0] if lines else '<empty>'!r}; want {CSV_HEADER!r}"
        )
    records = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"malformed row {line!r}")
        records.append(
            BenchRecord(
                method=parts[0],
                batch=int(parts[1]),
                median_seconds=float(parts[2]),
                min_seconds=float(parts[3]),
                peak_elements=int(parts[4]),
                checksum=float(parts[5]),
                skipped=parts[6],
            )
        )
    return records
