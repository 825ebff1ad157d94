"""Command line front end.

Exit codes: 0 success, 1 verification or operation failure, 2 usage
error (argparse), 3 I/O or input-format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from .costmodel import CostParams, estimate_btn_sweep, estimate_ec
from .errors import TnstackError
from .mps import load_mps_json, save_mps_json
from .stacking import (
    load_stacked_json,
    save_stacked_json,
    stack_mps,
    stacked_to_dense_mps,
)
from .verify import run_verify


def _comma_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _comma_names(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tnstack",
        description="Stack chains into a batched network and benchmark batch contraction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="time the engines across batch sizes")
    p.add_argument("--L", type=int, default=20, help="number of sites")
    p.add_argument("--V", type=int, default=6, help="core bond extent")
    p.add_argument("--D", type=int, default=1, help="sample bond extent")
    p.add_argument("--k", type=int, default=3, help="physical extent")
    p.add_argument("--O", type=int, default=None, help="output leg extent (default none)")
    p.add_argument("--batches", type=_comma_ints, default=bench_mod.DEFAULT_BATCH_SIZES,
                   help="comma-separated batch sizes")
    p.add_argument("--methods", type=_comma_names, default=bench_mod.BENCH_METHODS,
                   help="comma-separated subset of " + ",".join(bench_mod.BENCH_METHODS))
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--warmup", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="threads for the LP engine")
    p.add_argument("--out", type=Path, default=None, help="write rows to this CSV file")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("--scale", choices=("quick", "full"), default="quick")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("stack", help="stack chain files into one batched chain file")
    p.add_argument("--in", dest="inputs", type=Path, nargs="+", required=True,
                   help="input chain JSON files")
    p.add_argument("--out", type=Path, required=True, help="output stacked JSON file")
    p.add_argument("--placement", type=int, default=None,
                   help="site carrying the batch axis (default: last)")
    p.add_argument("--dense", nargs="?", const="", default=None, metavar="PATH",
                   help="also write the materialized sites as a chain JSON file "
                        "(default path: <out stem>.dense.json)")
    p.set_defaults(func=_cmd_stack)

    p = sub.add_parser("estimate", help="closed-form element counts for a config")
    p.add_argument("--method", choices=("ec", "btn"), required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--V", type=int, required=True)
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--O", type=int, default=1)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("report", help="render figures from a benchmark CSV")
    p.add_argument("--csv", type=Path, required=True, help="CSV written by `tnstack bench`")
    p.add_argument("--out-dir", type=Path, default=None,
                   help="figure directory (default: alongside the CSV)")
    p.add_argument("--stem", type=str, default=None,
                   help="figure filename stem (default: CSV stem)")
    p.set_defaults(func=_cmd_report)
    return parser


def _cmd_bench(args) -> int:
    cfg = bench_mod.BenchConfig(
        sites=args.L,
        phys_dim=args.k,
        core_bond=args.V,
        input_bond=args.D,
        output_dim=args.O,
        batch_sizes=args.batches,
        methods=args.methods,
        repeats=args.repeats,
        warmup=args.warmup,
        seed=args.seed,
        threads=args.threads,
    )
    print(bench_mod.CSV_HEADER)
    records = bench_mod.run_bench(cfg, log=print)
    if args.out is not None:
        bench_mod.emit_csv(records, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _cmd_verify(args) -> int:
    results = run_verify(scale=args.scale, log=print)
    return 0 if all(r.passed for r in results) else 1


def _cmd_stack(args) -> int:
    chains = [load_mps_json(path) for path in args.inputs]
    stacked = stack_mps(chains, placement=args.placement)
    save_stacked_json(stacked, args.out)
    print(f"stacked {stacked.batch} chains of {stacked.num_sites} sites -> {args.out}")
    if args.dense is not None:
        dense_path = Path(args.dense) if args.dense else (
            args.out.with_name(args.out.stem + ".dense.json")
        )
        save_mps_json(stacked_to_dense_mps(stacked), dense_path)
        print(f"wrote dense sites -> {dense_path}")
    return 0


def _cmd_estimate(args) -> int:
    params = CostParams(sites=args.L, batch=args.B, core_bond=args.V, output_dim=args.O)
    report = estimate_ec(params) if args.method == "ec" else estimate_btn_sweep(params)
    print(f"method={args.method}")
    print(f"chain_elements={report.chain_elements}")
    print(f"intermediate_elements={report.intermediate_elements}")
    print(f"total_elements={report.total_elements}")
    return 0


def _cmd_report(args) -> int:
    from .report import render_figures  # matplotlib import deferred until needed

    records = bench_mod.read_csv(args.csv)
    out_dir = args.out_dir if args.out_dir is not None else args.csv.parent
    stem = args.stem if args.stem is not None else args.csv.stem
    for path in render_figures(records, out_dir, stem=stem):
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (json.JSONDecodeError, ValueError) as exc:
        if isinstance(exc, TnstackError):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TnstackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
