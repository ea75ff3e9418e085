"""Command-line entry points.

Subcommands
-----------
* ``fadin simulate --config model.json --out events.csv`` draws one
  realization and writes the event CSV plus its JSON sidecar.
* ``fadin fit --events events.csv --config fit.json --out result.json``
  projects, precomputes and fits; optional debug dumps of the projected
  counts and precomputed tensors.
* ``fadin experiment --spec spec.json --out dir`` runs one study scenario
  and appends its rows to ``<dir>/<scenario>.csv``.
* ``fadin bench --spec bench.json [--out csv]`` runs a timing benchmark and
  prints one row per configuration.

Exit codes: 0 on success, 2 on configuration or input errors, 3 on numeric
or resource failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as fio
from .discretization import DiscreteGrid, dump_counts_csv, project
from .errors import (
    ConfigurationError,
    DataError,
    FadinError,
    NumericError,
    ParameterError,
    ResourceLimitError,
    UnstableModelError,
)
from .experiments import (
    ExperimentSpec,
    bench_gradient_iteration,
    bench_precompute_scaling,
    run_experiment,
)
from .kernels import kernel_from_config
from .precompute import DEFAULT_MEM_CAP_BYTES, precompute
from .simulation import HawkesModel, simulate
from .solver import FitConfig, fit, fit_ll

_CONFIG_ERRORS = (ConfigurationError, ParameterError, DataError, UnstableModelError)
_NUMERIC_ERRORS = (NumericError, ResourceLimitError)

_FIT_KEYS = (
    "max_iter", "step_size", "optimizer", "init", "seed", "clamp_floor",
    "convergence_tol", "rms_decay", "rms_eps", "step_decay", "precompute_method",
)


def _model_from_config(cfg: dict) -> HawkesModel:
    try:
        baseline = np.asarray(cfg["baseline"], dtype=float)
        kernel_rows = cfg["kernels"]
    except KeyError as exc:
        raise ConfigurationError(f"model config is missing key {exc}") from exc
    kernels = [[kernel_from_config(k) for k in row] for row in kernel_rows]
    return HawkesModel(baseline=baseline, kernels=kernels)


def _cmd_simulate(args) -> int:
    cfg = fio.load_json_config(args.config)
    try:
        T = float(cfg["T"])
    except KeyError as exc:
        raise ConfigurationError("simulate config needs a horizon key 'T'") from exc
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    model = _model_from_config(cfg)
    events = simulate(model, T, seed)
    fio.save_events_csv(events, args.out)
    print(f"simulated {events.n_total} events over [0, {T}] -> {args.out}")
    return 0


def _cmd_fit(args) -> int:
    cfg = fio.load_json_config(args.config)
    for key in ("family", "delta", "W"):
        if key not in cfg:
            raise ConfigurationError(f"fit config needs key {key!r}")
    loss_kind = cfg.get("loss", "l2")
    if loss_kind not in ("l2", "ll"):
        raise ConfigurationError(f"loss must be 'l2' or 'll', got {loss_kind!r}")
    events = fio.load_events_csv(args.events)
    grid = DiscreteGrid(delta=float(cfg["delta"]), T=events.T, W=float(cfg["W"]))
    fit_kwargs = {k: cfg[k] for k in _FIT_KEYS if k in cfg}
    if args.seed is not None:
        fit_kwargs["seed"] = args.seed
    if args.mem_cap_bytes is not None:
        fit_kwargs["mem_cap_bytes"] = args.mem_cap_bytes
    fit_cfg = FitConfig(**fit_kwargs)

    if args.dump_counts or args.dump_precompute:
        counts = project(events, grid)
        if args.dump_counts:
            dump_counts_csv(counts, args.dump_counts)
        if args.dump_precompute:
            pre = precompute(
                counts, grid,
                method=fit_cfg.precompute_method,
                mem_cap_bytes=fit_cfg.mem_cap_bytes,
            )
            fio.save_precompute(pre, args.dump_precompute)

    fitter = fit if loss_kind == "l2" else fit_ll
    result = fitter(events, cfg["family"], grid, fit_cfg)
    fio.save_fit_result_json(result, args.out)
    print(
        f"fit {loss_kind} [{result.status}] best_loss={result.best_loss:.6g} "
        f"iters={result.iterations_run} -> {args.out}"
    )
    return 0


def _cmd_experiment(args) -> int:
    data = fio.load_json_config(args.spec)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.threads is not None:
        data["workers"] = args.threads
    spec = ExperimentSpec.from_json_dict(data)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if not spec.output:
            spec.output = str(out_dir / f"{spec.scenario}.csv")
    rows = run_experiment(spec)
    print(f"{spec.scenario}: wrote {len(rows)} rows -> {spec.output or '(memory)'}")
    return 0


def _cmd_bench(args) -> int:
    cfg = fio.load_json_config(args.spec)
    kind = cfg.get("kind")
    if kind == "precompute_scaling":
        rows = bench_precompute_scaling(
            cfg.get("G_values", [10_000, 100_000]),
            delta=cfg.get("delta", 0.01),
            W=cfg.get("W", 1.0),
            repeats=cfg.get("repeats", 5),
            seed=args.seed if args.seed is not None else cfg.get("seed", 0),
            method=cfg.get("method", "dense"),
        )
    elif kind == "gradient_iteration":
        rows = bench_gradient_iteration(
            cfg.get("T_values", [1000.0, 100_000.0]),
            delta=cfg.get("delta", 0.01),
            W=cfg.get("W", 1.0),
            iters=cfg.get("iters", 30),
            seed=args.seed if args.seed is not None else cfg.get("seed", 0),
        )
    else:
        raise ConfigurationError(
            "bench spec needs kind 'precompute_scaling' or 'gradient_iteration'"
        )
    for row in rows:
        print(json.dumps(row))
    if args.out:
        import csv

        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fadin",
        description="Discretized least-squares inference for Hawkes processes",
    )
    parser.add_argument("--seed", type=int, default=None, help="override config seeds")
    parser.add_argument(
        "--threads", type=int, default=None, help="worker processes for experiments"
    )
    parser.add_argument(
        "--mem-cap-bytes",
        type=int,
        default=None,
        help=f"precomputation memory cap (default {DEFAULT_MEM_CAP_BYTES})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate events from a model config")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit a kernel family to an event CSV")
    p_fit.add_argument("--events", required=True)
    p_fit.add_argument("--config", required=True)
    p_fit.add_argument("--out", required=True)
    p_fit.add_argument("--dump-precompute", default=None, metavar="PATH")
    p_fit.add_argument("--dump-counts", default=None, metavar="PATH")
    p_fit.set_defaults(func=_cmd_fit)

    p_exp = sub.add_parser("experiment", help="run a study scenario from a spec")
    p_exp.add_argument("--spec", required=True)
    p_exp.add_argument("--out", default=None, help="output directory for CSV rows")
    p_exp.set_defaults(func=_cmd_experiment)

    p_bench = sub.add_parser("bench", help="run a timing benchmark")
    p_bench.add_argument("--spec", required=True)
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except FadinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
