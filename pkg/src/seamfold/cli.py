"""Command-line entry points.

Subcommands:

* ``init-matrix``  — build a decision matrix from a demonstration log
* ``run``          — run a seeded closed-loop experiment
* ``report``       — aggregate metrics CSVs into per-step statistics

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    ConfigError,
    DataError,
    ingest_demo_log,
    load_experiment_config,
    report,
    run_experiment,
)
from .policy import save_matrix

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seamfold",
        description="Seam-guided grasp selection experiments on a fold-stack garment simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_init = sub.add_parser("init-matrix", help="build a decision matrix from a demo log")
    p_init.add_argument("demo_log", help="JSONL demonstration trial log")
    p_init.add_argument("--out", default="matrix_init.json", help="output matrix file")

    p_run = sub.add_parser("run", help="run a closed-loop experiment")
    p_run.add_argument(
        "--mode",
        default="sis",
        choices=["sis", "ab-dm", "ab-si", "ab-mi"],
        help="full strategy or one ablation",
    )
    p_run.add_argument("--trials", type=int, default=None, help="number of trials")
    p_run.add_argument("--seed", type=int, default=None, help="experiment seed")
    p_run.add_argument("--matrix", default=None, help="initialized matrix file")
    p_run.add_argument("--outdir", default=None, help="output directory")
    p_run.add_argument("--config", default=None, help="JSON experiment config file")
    p_run.add_argument("--geometry", default=None, help="garment geometry file")
    p_run.add_argument(
        "--include-failures",
        action="store_true",
        default=None,
        help="keep trials with failed grasps in the aggregates",
    )

    p_rep = sub.add_parser("report", help="aggregate metrics CSVs")
    p_rep.add_argument("metrics_csv", nargs="+", help="metrics CSV file(s)")
    p_rep.add_argument("--threshold", type=float, default=0.85, help="success threshold")
    p_rep.add_argument("--out", default=None, help="write aggregate CSV here")
    p_rep.add_argument("--include-failures", action="store_true")
    return parser


def _cmd_init_matrix(args: argparse.Namespace) -> int:
    matrix = ingest_demo_log(args.demo_log, args.out)
    print(f"wrote {args.out}: {len(matrix.cells)} populated cells, T_max={matrix.t_max}")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_experiment_config(
        args.config,
        ablation_mode=args.mode,
        n_trials=args.trials,
        seed=args.seed,
        matrix_path=args.matrix,
        out_dir=args.outdir,
        geometry_path=args.geometry,
        include_failures=args.include_failures,
    )
    result = run_experiment(cfg)
    print(f"mode={cfg.ablation_mode.value} trials={cfg.n_trials} seed={cfg.seed}")
    for agg in result.aggregates:
        print(
            f"step {agg.step}: mean_ncov {agg.mean_ncov:.3f} mean_iou {agg.mean_iou:.3f} "
            f"success_rate {agg.success_rate * 100:.1f}% (n={agg.n})"
        )
    print(f"outputs in {Path(cfg.out_dir).resolve()}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    aggs = report(
        args.metrics_csv,
        threshold=args.threshold,
        include_failures=args.include_failures,
        out_path=args.out,
    )
    for agg in aggs:
        print(
            f"step {agg.step}: mean_ncov {agg.mean_ncov:.3f} mean_iou {agg.mean_iou:.3f} "
            f"success_rate {agg.success_rate * 100:.1f}% (n={agg.n})"
        )
    if args.out:
        print(f"wrote {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "init-matrix":
            return _cmd_init_matrix(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "report":
            return _cmd_report(args)
        parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
