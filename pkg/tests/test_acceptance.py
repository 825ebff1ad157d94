"""Acceptance suite.

One test per acceptance criterion, named test_criterion_<n>_*, each
printing a single PASS/FAIL line. Tolerances are pinned here and do not
scale with the instance.
"""

import numpy as np

from tnstack import (
    BenchConfig,
    CostParams,
    GREEDY,
    MpsSpec,
    SWEEP_LR,
    contract_btn,
    contract_ec,
    estimate_btn_sweep,
    estimate_ec,
    plan_btn,
    random_mps,
    run_bench,
    save_mps_json,
    stack_mps,
)
from tnstack.verify import (
    block_structure_suite,
    engine_agreement_suite,
    stack_oracle_suite,
)


def _criterion(num: int, desc: str, passed: bool, detail: str = "") -> None:
    line = f"[criterion {num}] {'PASS' if passed else 'FAIL'}: {desc}"
    if detail:
        line += f" ({detail})"
    print(line, flush=True)
    assert passed, line


def test_criterion_1_stack_oracle_grid():
    result = stack_oracle_suite("full")
    _criterion(
        1,
        "stacked chains reproduce every input slice on the full grid, "
        "rel tol 1e-10",
        result.passed and result.cases == 6 * 5 * 3 * 2 * 3,
        f"{result.cases} cases, max dev {result.max_deviation:.2e}",
    )


def test_criterion_2_exact_block_structure():
    result = block_structure_suite("full")
    _criterion(
        2,
        "off-block entries of every materialized site are exactly zero",
        result.passed and result.max_deviation == 0.0,
        f"{result.cases} sites checked",
    )


def test_criterion_3_engine_agreement():
    result = engine_agreement_suite("full")
    _criterion(
        3,
        "all five engine variants agree pairwise within 1e-9 on 50 random "
        "instances including output legs",
        result.passed and result.cases == 50,
        f"max dev {result.max_deviation:.2e}",
    )


def test_criterion_4_cost_model_and_measured_ratios():
    ok = True
    details = []
    # closed forms, evaluated independently here as plain arithmetic
    for batch in (10, 100, 1500):
        sites, vbond, out_dim = 21, 50, 10
        ec_chain = (sites - 1) * batch * vbond * vbond + batch * vbond * out_dim + batch * vbond
        btn_chain = (
            (sites - 1) * batch * batch * vbond * vbond
            + batch * batch * vbond * out_dim
            + batch * vbond
        )
        inter = (sites - 2) * batch * vbond + batch * out_dim
        p = CostParams(sites=sites, batch=batch, core_bond=vbond, output_dim=out_dim)
        ec = estimate_ec(p)
        btn = estimate_btn_sweep(p)
        ok &= ec.chain_elements == ec_chain and ec.intermediate_elements == inter
        ok &= btn.chain_elements == btn_chain and btn.intermediate_elements == inter
    ok &= estimate_ec(
        CostParams(sites=21, batch=100, core_bond=50, output_dim=10)
    ).chain_elements == 5_055_000
    ok &= estimate_btn_sweep(
        CostParams(sites=21, batch=100, core_bond=50, output_dim=10)
    ).chain_elements == 505_005_000

    # measured doubling ratios at the benchmark shape with an output leg
    sites, phys, vbond, out_dim = 20, 3, 6, 10
    core = random_mps(MpsSpec(sites, phys, vbond, out_dim, seed=0))

    def _samples(batch):
        return [
            random_mps(MpsSpec(sites, phys, 1, seed=(4, batch, b))) for b in range(batch)
        ]

    ec_peaks = {b: contract_ec(core, _samples(b)).stats.peak_elements for b in (100, 200)}
    ec_ratio = ec_peaks[200] / ec_peaks[100]
    details.append(f"EC ratio {ec_ratio:.3f}")
    ok &= 1.8 <= ec_ratio <= 2.2

    btn_peaks = {}
    for batch in (100, 200):
        stacked = stack_mps(_samples(batch))
        res = contract_btn(core, stacked, plan_btn(core, stacked, SWEEP_LR))
        btn_peaks[batch] = res.stats.peak_elements
    btn_ratio = btn_peaks[200] / btn_peaks[100]
    details.append(f"BTN ratio {btn_ratio:.3f}")
    ok &= 3.5 <= btn_ratio <= 4.5

    _criterion(
        4,
        "closed-form counts exact at L=21 V=50 O=10, measured doubling "
        "ratios: EC in [1.8, 2.2], stacked sweep in [3.5, 4.5]",
        ok,
        ", ".join(details),
    )


def test_criterion_5_scaling_trends():
    cfg = BenchConfig(
        sites=20,
        phys_dim=3,
        core_bond=6,
        input_bond=1,
        batch_sizes=(100, 200, 500, 1000),
        methods=("LP", "EC"),
        repeats=3,
        warmup=1,
        seed=5,
        threads=1,
    )
    records = run_bench(cfg)
    lp = {r.batch: r.median_seconds for r in records if r.method == "LP"}
    ec = {r.batch: r.median_seconds for r in records if r.method == "EC"}
    slope = float(
        np.polyfit(
            np.log10(list(lp.keys())), np.log10(list(lp.values())), 1
        )[0]
    )
    faster = ec[1000] < lp[1000]
    _criterion(
        5,
        "loop engine scales linearly in batch size (log-log slope in "
        "[0.8, 1.2]) and the fused engine beats it at B=1000",
        0.8 <= slope <= 1.2 and faster,
        f"slope {slope:.3f}, EC {ec[1000]:.4f}s vs LP {lp[1000]:.4f}s",
    )


def test_criterion_6_greedy_peak_below_sweep_chain():
    sites, phys, vbond, out_dim, batch = 21, 3, 50, 10, 1000
    core = random_mps(MpsSpec(sites, phys, vbond, out_dim, seed=6))
    samples = [random_mps(MpsSpec(sites, phys, 1, seed=(6, b))) for b in range(batch)]
    stacked = stack_mps(samples)
    plan = plan_btn(core, stacked, GREEDY)
    res = contract_btn(core, stacked, plan)
    predicted_sweep_chain = estimate_btn_sweep(
        CostParams(sites=sites, batch=batch, core_bond=vbond, output_dim=out_dim)
    ).chain_elements
    _criterion(
        6,
        "greedy-planned stacked contraction at B=1000 stays strictly below "
        "the left-right sweep's predicted chain",
        res.stats.peak_elements < predicted_sweep_chain,
        f"measured {res.stats.peak_elements:.3e} vs predicted {predicted_sweep_chain:.3e}",
    )


def test_criterion_7_wide_core_memory_ordering():
    ok = True
    details = []
    for vbond in (500, 1000):
        sites, phys, out_dim, batch = 21, 3, 10, 10
        core = random_mps(MpsSpec(sites, phys, vbond, out_dim, seed=7))
        samples = [
            random_mps(MpsSpec(sites, phys, 1, seed=(7, vbond, b))) for b in range(batch)
        ]
        stacked = stack_mps(samples)
        btn = contract_btn(core, stacked, plan_btn(core, stacked, GREEDY))
        ec = contract_ec(core, samples)
        ok &= btn.stats.peak_elements < ec.stats.peak_elements
        details.append(
            f"V={vbond}: BTN {btn.stats.peak_elements:.2e} < EC {ec.stats.peak_elements:.2e}"
        )
    _criterion(
        7,
        "greedy stacked contraction uses less peak memory than the fused "
        "sweep on wide cores with a thin batch",
        ok,
        "; ".join(details),
    )


def test_criterion_8_determinism(tmp_path):
    spec = MpsSpec(12, 3, 5, output_dim=4, seed=8)
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    save_mps_json(random_mps(spec), p1)
    save_mps_json(random_mps(spec), p2)
    files_equal = p1.read_bytes() == p2.read_bytes()

    cfg = BenchConfig(
        sites=6,
        core_bond=4,
        batch_sizes=(1, 4),
        methods=("LP", "BTN_GREEDY", "EC", "EC_HALVING"),
        repeats=2,
        warmup=1,
        seed=88,
    )
    run1 = run_bench(cfg)
    run2 = run_bench(cfg)
    checks_equal = [r.checksum for r in run1] == [r.checksum for r in run2]
    peaks_equal = [r.peak_elements for r in run1] == [r.peak_elements for r in run2]
    _criterion(
        8,
        "same seed yields byte-identical chain files and bit-identical "
        "benchmark checksums",
        files_equal and checks_equal and peaks_equal,
    )
