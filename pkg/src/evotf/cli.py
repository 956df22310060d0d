"""Command-line entry point: ``evotf train``, ``evotf grid`` and ``evotf fetch``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .data import SCHEMAS, fetch
from .experiment import (
    ALGORITHMS,
    TRANSFER_FUNCTIONS,
    ExperimentConfig,
    read_config,
    run_experiment,
    run_grid,
    write_tables,
)
from .metaheuristics import DE_VARIANTS

log = logging.getLogger("evotf")

# flag name -> (type, help); shared by `train` and `grid`
_TUNING = {
    "hidden": (int, "hidden nodes (default 5)"),
    "pop": (int, "population size (default 10)"),
    "iters": (int, "iterations, or BP epochs (default 1000)"),
    "seed": (int, "master seed (default 0)"),
    "folds": (int, "cross-validation folds (default 10)"),
    "trial-limit": (int, "ABC abandonment limit (default 100)"),
    "c1": (float, "PSO cognitive coefficient (default 2)"),
    "c2": (float, "PSO social coefficient (default 2)"),
    "c0-max": (float, "PSO initial inertia (default 1)"),
    "c0-min": (float, "PSO final inertia (default 0)"),
    "cr": (float, "DE crossover rate (default 0.9)"),
    "f": (float, "DE scale factor (default 0.7)"),
    "eta": (float, "BP learning rate (default 0.5)"),
    "momentum": (float, "BP momentum (default 0.1)"),
    "bp-restarts": (int, "BP random restarts per fold (default 10)"),
    "jobs": (int, "worker processes (default 1)"),
}

_CONFIG_FIELDS = {
    "hidden",
    "pop",
    "iters",
    "folds",
    "trial_limit",
    "c1",
    "c2",
    "c0_max",
    "c0_min",
    "cr",
    "f",
    "de_variant",
    "eta",
    "momentum",
    "bp_restarts",
    "data_dir",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    # Defaults stay None so `grid` can tell which flags were given explicitly.
    for name, (typ, help_) in _TUNING.items():
        p.add_argument(f"--{name}", type=typ, default=None, help=help_)
    p.add_argument("--de-variant", choices=DE_VARIANTS, default=None, help="DE mutation (default randtobest1)")
    p.add_argument("--trace", action="store_true", default=None, help="write per-fold best-cost traces")
    p.add_argument("--traces-dir", default=None, help="trace directory (default traces)")
    p.add_argument("--out", default=None, help="results directory (default results)")
    p.add_argument("--data-dir", default=None, help="dataset directory (default data)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evotf", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="cross-validate one (dataset, algorithm, transfer function) cell")
    train.add_argument("--dataset", required=True, choices=SCHEMAS)
    train.add_argument("--algo", required=True, choices=ALGORITHMS)
    train.add_argument("--tf", required=True, choices=TRANSFER_FUNCTIONS)
    train.add_argument("--save-model", metavar="PATH", default=None, help="save each fold's network (PATH_foldNN.ext)")
    _add_common(train)

    grid = sub.add_parser("grid", help="run a grid described by a key = value file")
    grid.add_argument("--config", required=True, type=Path)
    grid.add_argument("--datasets", default=None, help="comma-separated override")
    grid.add_argument("--algos", default=None, help="comma-separated override")
    grid.add_argument("--tfs", default=None, help="comma-separated override")
    _add_common(grid)

    fetch_p = sub.add_parser("fetch", help="download the UCI datasets")
    fetch_p.add_argument("--data-dir", default="data")
    fetch_p.add_argument("--no-fallback", action="store_true", help="fail instead of using the scikit-learn copies")
    return parser


def _explicit(args) -> dict:
    """Options the user actually passed, keyed like the config file."""
    out = {}
    for key, value in vars(args).items():
        if value is None or key in ("command", "verbose", "config", "dataset", "algo", "tf", "save_model"):
            continue
        out[key] = value.split(",") if key in ("datasets", "algos", "tfs") else value
    return out


def _split(opts: dict):
    overrides = {k: v for k, v in opts.items() if k in _CONFIG_FIELDS}
    seed = opts.get("seed", 0)
    jobs = opts.get("jobs", 1)
    out = opts.get("out", "results")
    trace_dir = opts.get("traces_dir", "traces") if opts.get("trace") else None
    return overrides, seed, jobs, out, trace_dir


def cmd_train(args) -> int:
    overrides, seed, jobs, out, trace_dir = _split(_explicit(args))
    cfg = ExperimentConfig(args.dataset, args.algo, args.tf, seed=seed, **overrides)
    if trace_dir is not None and cfg.algorithm == "bp":
        log.warning("--trace has no effect for bp")
    row = run_experiment(cfg, jobs=jobs, trace_dir=trace_dir, model_path=args.save_model)
    paths = write_tables([row], out)
    print(f"{cfg.run_name}: mean accuracy {row.mean_accuracy:.4f}, variance {row.variance:.6f} over {row.folds} folds")
    print("fold accuracies: " + " ".join(f"{a:.4f}" for a in row.fold_accuracies))
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_grid(args) -> int:
    opts = read_config(args.config)
    opts.update(_explicit(args))  # CLI flags win over the file
    missing = [k for k in ("datasets", "algos", "tfs") if not opts.get(k)]
    if missing:
        raise ValueError(f"{args.config}: missing {', '.join(missing)}")
    overrides, seed, jobs, out, trace_dir = _split(opts)
    rows, paths = run_grid(opts["datasets"], opts["algos"], opts["tfs"], seed, out, jobs, trace_dir, **overrides)
    for r in rows:
        print(f"{r.dataset:5s} {r.algorithm:3s} {r.function:8s} mean {r.mean_accuracy:.4f} var {r.variance:.6f}")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_fetch(args) -> int:
    for name, source in fetch(SCHEMAS, args.data_dir, allow_fallback=not args.no_fallback).items():
        print(f"{name}: {source}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handler = {"train": cmd_train, "grid": cmd_grid, "fetch": cmd_fetch}[args.command]
    try:
        return handler(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"evotf: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
