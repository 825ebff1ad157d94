"""tnstack: batch contraction of matrix product chains.

Stack B same-length chains into one block-diagonal batched chain, then
contract the whole batch against a shared core with interchangeable
engines: a per-sample loop, a planned contraction of the stacked
network, and fused batched-matmul sweeps. Closed-form element counts, a
benchmark harness with CSV and figure output, and brute-force oracles
for verification round out the package.
"""

from .bench import (
    BENCH_METHODS,
    CSV_HEADER,
    DEFAULT_BATCH_SIZES,
    DEFAULT_ELEMENT_GUARD,
    BenchConfig,
    BenchRecord,
    batch_instances,
    default_element_guard,
    emit_csv,
    read_csv,
    run_bench,
)
from .costmodel import (
    CostParams,
    CostReport,
    EstimateCheck,
    check_estimate,
    estimate_btn_sweep,
    estimate_ec,
)
from .engines import (
    GREEDY,
    SWEEP_LR,
    BatchResult,
    ContractionPlan,
    EngineStats,
    Method,
    PlanStep,
    contract_btn,
    contract_ec,
    contract_ec_halving,
    contract_loop,
    ec_site_units,
    plan_btn,
)
from .errors import (
    DimensionError,
    HalvingFallback,
    MemoryGuardError,
    OracleCapError,
    PlanError,
    RegimeError,
    StackingError,
    TensorAxisError,
    TnstackError,
    WiringError,
)
from .meter import ElementMeter
from .mps import (
    MPS_JSON_VERSION,
    Mps,
    MpsSpec,
    inner_product,
    load_mps_json,
    mps_from_json_dict,
    mps_to_full_tensor,
    mps_to_json_dict,
    random_mps,
    save_mps_json,
)
from .stacking import (
    STACKED_JSON_VERSION,
    StackedMps,
    StackOracleReport,
    StackPlacement,
    load_stacked_json,
    save_stacked_json,
    stack_general_units,
    stack_mps,
    stacked_full_tensor,
    stacked_to_dense_mps,
    verify_stack_oracle,
)
from .tensor import batched_matmul, contract_pair, full_contract, max_rel_deviation
from .verify import SuiteResult, run_verify

__version__ = "0.1.0"

__all__ = [
    "BENCH_METHODS",
    "CSV_HEADER",
    "DEFAULT_BATCH_SIZES",
    "DEFAULT_ELEMENT_GUARD",
    "MPS_JSON_VERSION",
    "STACKED_JSON_VERSION",
    "BatchResult",
    "BenchConfig",
    "BenchRecord",
    "ContractionPlan",
    "CostParams",
    "CostReport",
    "DimensionError",
    "ElementMeter",
    "EngineStats",
    "EstimateCheck",
    "GREEDY",
    "HalvingFallback",
    "MemoryGuardError",
    "Method",
    "Mps",
    "MpsSpec",
    "OracleCapError",
    "PlanError",
    "PlanStep",
    "RegimeError",
    "StackOracleReport",
    "StackPlacement",
    "StackedMps",
    "StackingError",
    "SuiteResult",
    "SWEEP_LR",
    "TensorAxisError",
    "TnstackError",
    "WiringError",
    "batch_instances",
    "batched_matmul",
    "check_estimate",
    "contract_btn",
    "contract_ec",
    "contract_ec_halving",
    "contract_loop",
    "contract_pair",
    "default_element_guard",
    "ec_site_units",
    "emit_csv",
    "estimate_btn_sweep",
    "estimate_ec",
    "full_contract",
    "inner_product",
    "load_mps_json",
    "load_stacked_json",
    "max_rel_deviation",
    "mps_from_json_dict",
    "mps_to_full_tensor",
    "mps_to_json_dict",
    "plan_btn",
    "random_mps",
    "read_csv",
    "run_bench",
    "run_verify",
    "save_mps_json",
    "save_stacked_json",
    "stack_general_units",
    "stack_mps",
    "stacked_full_tensor",
    "stacked_to_dense_mps",
    "verify_stack_oracle",
]
