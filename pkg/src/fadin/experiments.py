"""Scripted synthetic studies and timing benchmarks.

Four scenarios are provided, each emitting one CSV row per (config, rep):

* ``consistency``   — simulate, fit across (T, delta), record parameter errors.
* ``prop2_rate``    — fix each simulated set, fit across delta plus a much
  finer reference delta, and measure how fast the estimates approach the
  reference as delta shrinks (log-log slope).
* ``w_sensitivity`` — truth simulated with an effectively unbounded
  exponential kernel, fitted with increasing support lengths W.
* ``l2_vs_ll``      — least-squares vs discrete log-likelihood on the same
  data, same iteration budget; records errors and wall times per method.

Every run is deterministic given the spec: the seed of each repetition is
spec.seed + 100000 * T_index + rep and is written into the output rows.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .discretization import DiscreteGrid, project
from .errors import ConfigurationError
from .kernels import FAMILIES
from .precompute import precompute
from .simulation import HawkesModel, simulate
from .solver import (
    FitConfig,
    FitResult,
    _grad_eta_from_tensors,
    _grad_mu_from_tensors,
    _grid_tensors,
    _psi_contract,
    fit,
    fit_ll,
    intensity_discrete,
)

SCHEMA_VERSION = 1

SCENARIOS = ("consistency", "prop2_rate", "w_sensitivity", "l2_vs_ll")

CSV_FIELDS = [
    "schema_version", "scenario", "family", "method", "T", "delta", "delta_ref",
    "W", "rep", "seed", "n_events", "converged", "l2_error",
    "err_mu", "err_alpha", "err_m", "err_sigma", "err_u", "err_gamma",
    "precompute_s", "iteration_s", "fit_s",
]

# Univariate synthetic truths used throughout the studies.
DEFAULT_TRUTHS = {
    "truncated_gaussian": {"mu": 0.5, "alpha": 0.8, "m": 0.5, "sigma": 0.3},
    "raised_cosine": {"mu": 0.3, "alpha": 0.8, "u": 0.2, "sigma": 0.3},
    "truncated_exponential": {"mu": 0.3, "alpha": 0.8, "gamma": 5.0},
}

# Slowly decaying exponential truth for the support-length study.
W_SENSITIVITY_TRUTH = {"mu": 1.1, "alpha": 0.8, "gamma": 0.5}

# Two-dimensional raised-cosine model used by the timing benchmarks.
BENCH_2D_BASELINE = (0.1, 0.2)
BENCH_2D_ALPHA = ((1.5, 0.1), (0.1, 1.5))
BENCH_2D_U = ((0.1, 0.3), (0.3, 0.3))
BENCH_2D_SIGMA = ((0.3, 0.25), (0.3, 0.3))


@dataclass
class ExperimentSpec:
    """Declarative description of one study run."""

    scenario: str
    family: str = "truncated_gaussian"
    truth: dict | None = None
    T_values: tuple = (1000.0,)
    deltas: tuple = (0.01,)
    W_values: tuple = (1.0,)
    W: float = 1.0
    sim_W: float = 50.0
    delta_ref: float = 1e-4
    n_reps: int = 10
    seed: int = 0
    output: str | None = None
    workers: int = 1
    fit: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(
                f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}"
            )
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown family {self.family!r}")
        for name in ("T_values", "deltas", "W_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ConfigurationError(f"{name} must be non-empty")
            setattr(self, name, vals)
        if self.n_reps < 1:
            raise ConfigurationError("n_reps must be >= 1")

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExperimentSpec":
        allowed = set(cls.__dataclass_fields__)
        unknown = set(data) - allowed
        if unknown:
            raise ConfigurationError(f"unknown experiment spec keys {sorted(unknown)}")
        return cls(**data)

    def to_json_dict(self) -> dict:
        out = asdict(self)
        for name in ("T_values", "deltas", "W_values"):
            out[name] = list(out[name])
        return out


def _rep_seed(spec: ExperimentSpec, t_idx: int, rep: int) -> int:
    return spec.seed + 100_000 * t_idx + rep


def _fit_config(spec: ExperimentSpec) -> FitConfig:
    return FitConfig(**spec.fit)


def truth_model(family: str, truth: dict | None, W: float) -> HawkesModel:
    """Univariate ground-truth model for a study scenario."""
    cls = FAMILIES[family]
    truth = dict(DEFAULT_TRUTHS[family] if truth is None else truth)
    mu = truth.pop("mu")
    kernel = cls(**truth, W=W)
    return HawkesModel(baseline=np.array([mu]), kernels=[[kernel]])


def truth_vector(family: str, truth: dict | None) -> np.ndarray:
    cls = FAMILIES[family]
    truth = dict(DEFAULT_TRUTHS[family] if truth is None else truth)
    return np.array([truth["mu"], *(truth[n] for n in cls.param_names)])


def _error_columns(family: str, estimate: np.ndarray, target: np.ndarray) -> dict:
    names = ("mu", *FAMILIES[family].param_names)
    sq = (estimate - target) ** 2
    out = {f"err_{n}": float(v) for n, v in zip(names, sq)}
    out["l2_error"] = float(np.linalg.norm(estimate - target))
    return out


def _base_row(spec, **kw) -> dict:
    row = {
        "schema_version": SCHEMA_VERSION,
        "scenario": spec.scenario,
        "family": spec.family,
        "method": "l2",
    }
    row.update(kw)
    return row


def _result_row(spec, result: FitResult, target: np.ndarray, **kw) -> dict:
    row = _base_row(spec, **kw)
    row.update(_error_columns(spec.family, result.parameter_vector(), target))
    row.update(
        {
            "converged": result.status,
            "precompute_s": round(result.precompute_seconds, 6),
            "iteration_s": round(result.iteration_seconds, 6),
            "fit_s": round(result.total_seconds, 6),
        }
    )
    return row


def append_rows_csv(path, rows) -> None:
    """Append result rows; the header is written once when the file is new."""
    path = Path(path)
    is_new = not path.exists()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        if is_new:
            writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in CSV_FIELDS})


def _finish(spec, rows):
    if spec.output:
        append_rows_csv(spec.output, rows)
    return rows


def _run_tasks(spec, tasks, worker):
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(worker, tasks))
    else:
        chunks = [worker(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


# ---------------------------------------------------------------------------
# consistency sweep
# ---------------------------------------------------------------------------

def _consistency_task(args):
    spec, t_idx, rep = args
    T = spec.T_values[t_idx]
    seed = _rep_seed(spec, t_idx, rep)
    model = truth_model(spec.family, spec.truth, spec.W)
    events = simulate(model, T, seed)
    target = truth_vector(spec.family, spec.truth)
    cfg = _fit_config(spec)
    rows = []
    for delta in spec.deltas:
        grid = DiscreteGrid(delta=delta, T=T, W=spec.W)
        result = fit(events, spec.family, grid, cfg)
        rows.append(
            _result_row(
                spec, result, target,
                T=T, delta=delta, W=spec.W, rep=rep, seed=seed,
                n_events=events.n_total,
            )
        )
    return rows


def run_consistency(spec: ExperimentSpec):
    """Parameter-recovery errors across horizons T and stepsizes delta."""
    tasks = [
        (spec, t_idx, rep)
        for t_idx in range(len(spec.T_values))
        for rep in range(spec.n_reps)
    ]
    return _finish(spec, _run_tasks(spec, tasks, _consistency_task))


def median_errors_by(rows, keys=("T", "delta")):
    """Median l2_error grouped by the given row keys."""
    groups = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(row["l2_error"])
    return {k: float(np.median(v)) for k, v in groups.items()}


# ---------------------------------------------------------------------------
# convergence rate of the discrete estimates toward a fine-grid reference
# ---------------------------------------------------------------------------

def _prop2_task(args):
    spec, rep = args
    T = spec.T_values[0]
    seed = _rep_seed(spec, 0, rep)
    model = truth_model(spec.family, spec.truth, spec.W)
    events = simulate(model, T, seed)
    cfg = _fit_config(spec)
    ref_grid = DiscreteGrid(delta=spec.delta_ref, T=T, W=spec.W)
    ref = fit(events, spec.family, ref_grid, cfg)
    theta_ref = ref.parameter_vector()
    rows = []
    for delta in spec.deltas:
        grid = DiscreteGrid(delta=delta, T=T, W=spec.W)
        result = fit(events, spec.family, grid, cfg)
        rows.append(
            _result_row(
                spec, result, theta_ref,
                T=T, delta=delta, delta_ref=spec.delta_ref, W=spec.W,
                rep=rep, seed=seed, n_events=events.n_total,
            )
        )
    return rows


def run_prop2_rate(spec: ExperimentSpec):
    """Distance of each coarse-grid estimate to a fine-grid reference fit.

    The reference stepsize stands in for the continuous-time estimator;
    the interesting quantity is how the distance scales with delta.
    """
    tasks = [(spec, rep) for rep in range(spec.n_reps)]
    return _finish(spec, _run_tasks(spec, tasks, _prop2_task))


def prop2_slopes(rows) -> list:
    """Per-rep slope of log error against log delta."""
    by_rep = {}
    for row in rows:
        by_rep.setdefault(row["rep"], []).append((row["delta"], row["l2_error"]))
    slopes = []
    for rep, pairs in sorted(by_rep.items()):
        pts = [(math.log(d), math.log(e)) for d, e in pairs if e > 0.0]
        if len(pts) < 2:
            continue
        x = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts])
        slope = float(np.polyfit(x, y, 1)[0])
        slopes.append(slope)
    return slopes


# ---------------------------------------------------------------------------
# sensitivity to the support length W
# ---------------------------------------------------------------------------

def _w_sensitivity_task(args):
    spec, rep = args
    T = spec.T_values[0]
    delta = spec.deltas[0]
    seed = _rep_seed(spec, 0, rep)
    truth = dict(W_SENSITIVITY_TRUTH if spec.truth is None else spec.truth)
    sim_model = truth_model(spec.family, truth, spec.sim_W)
    events = simulate(sim_model, T, seed)
    target = np.array(
        [truth["mu"], *(truth[n] for n in FAMILIES[spec.family].param_names)]
    )
    cfg = _fit_config(spec)
    rows = []
    for W in spec.W_values:
        grid = DiscreteGrid(delta=delta, T=T, W=W)
        result = fit(events, spec.family, grid, cfg)
        rows.append(
            _result_row(
                spec, result, target,
                T=T, delta=delta, W=W, rep=rep, seed=seed,
                n_events=events.n_total,
            )
        )
    return rows


def run_w_sensitivity(spec: ExperimentSpec):
    """Fit quality and cost as the modeled support W grows.

    The data come from a slowly decaying exponential kernel simulated with a
    support long enough to be effectively unbounded, so short fitted supports
    are genuinely misspecified.
    """
    if spec.family != "truncated_exponential":
        raise ConfigurationError("w_sensitivity expects the truncated_exponential family")
    tasks = [(spec, rep) for rep in range(spec.n_reps)]
    return _finish(spec, _run_tasks(spec, tasks, _w_sensitivity_task))


# ---------------------------------------------------------------------------
# least-squares vs discrete log-likelihood
# ---------------------------------------------------------------------------

def _l2_vs_ll_task(args):
    spec, t_idx, rep = args
    T = spec.T_values[t_idx]
    delta = spec.deltas[0]
    seed = _rep_seed(spec, t_idx, rep)
    model = truth_model(spec.family, spec.truth, spec.W)
    events = simulate(model, T, seed)
    target = truth_vector(spec.family, spec.truth)
    cfg = _fit_config(spec)
    grid = DiscreteGrid(delta=delta, T=T, W=spec.W)
    rows = []
    for method, fitter in (("l2", fit), ("ll", fit_ll)):
        result = fitter(events, spec.family, grid, cfg)
        rows.append(
            _result_row(
                spec, result, target,
                method=method, T=T, delta=delta, W=spec.W, rep=rep, seed=seed,
                n_events=events.n_total,
            )
        )
    return rows


def run_l2_vs_ll(spec: ExperimentSpec):
    """Accuracy and wall time of both objectives at the same iteration budget."""
    tasks = [
        (spec, t_idx, rep)
        for t_idx in range(len(spec.T_values))
        for rep in range(spec.n_reps)
    ]
    return _finish(spec, _run_tasks(spec, tasks, _l2_vs_ll_task))


def summarize_l2_vs_ll(rows) -> dict:
    """Per (family, T): median fit times, time ratio, error quartiles, overlap."""
    groups = {}
    for row in rows:
        groups.setdefault((row["family"], row["T"]), {"l2": [], "ll": []})[
            row["method"]
        ].append(row)
    summary = {}
    for key, per_method in groups.items():
        entry = {}
        for method, rws in per_method.items():
            times = [r["fit_s"] for r in rws]
            errs = [r["l2_error"] for r in rws]
            entry[method] = {
                "median_fit_s": float(np.median(times)),
                "err_q25": float(np.percentile(errs, 25)),
                "err_median": float(np.median(errs)),
                "err_q75": float(np.percentile(errs, 75)),
            }
        if entry["l2"]["median_fit_s"] > 0:
            entry["time_ratio"] = entry["ll"]["median_fit_s"] / entry["l2"]["median_fit_s"]
        entry["iqr_overlap"] = not (
            entry["l2"]["err_q75"] < entry["ll"]["err_q25"]
            or entry["ll"]["err_q75"] < entry["l2"]["err_q25"]
        )
        summary[key] = entry
    return summary


# ---------------------------------------------------------------------------
# intensity-error metric and timing benchmarks
# ---------------------------------------------------------------------------

def intensity_l1_error(model_hat, model_true, counts, grid) -> float:
    """Normalized l1 distance between estimated and true discrete intensities."""
    lam_hat = intensity_discrete(model_hat, counts, grid)
    lam_true = intensity_discrete(model_true, counts, grid)
    return float(np.abs(lam_hat - lam_true).sum() / np.abs(lam_true).sum())


def bench_model_2d() -> HawkesModel:
    """Two-process raised-cosine model exercised by the timing benchmarks."""
    cls = FAMILIES["raised_cosine"]
    kernels = [
        [
            cls(
                alpha=BENCH_2D_ALPHA[i][j],
                u=BENCH_2D_U[i][j],
                sigma=BENCH_2D_SIGMA[i][j],
                W=1.0,
            )
            for j in range(2)
        ]
        for i in range(2)
    ]
    return HawkesModel(baseline=np.array(BENCH_2D_BASELINE), kernels=kernels)


def bench_precompute_scaling(
    G_values, delta=0.01, W=1.0, repeats=5, seed=0, method="dense"
):
    """Median precompute wall time per grid size; one row per G."""
    model = bench_model_2d()
    rows = []
    for G in G_values:
        T = G * delta
        events = simulate(model, T, seed)
        grid = DiscreteGrid(delta=delta, T=T, W=W)
        counts = project(events, grid)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            precompute(counts, grid, method=method)
            times.append(time.perf_counter() - t0)
        rows.append(
            {
                "G": int(G),
                "T": T,
                "n_events": events.n_total,
                "median_seconds": float(np.median(times)),
            }
        )
    return rows


def bench_gradient_iteration(T_values, delta=0.01, W=1.0, iters=30, seed=0):
    """Median wall time of one full least-squares gradient evaluation per T."""
    model = bench_model_2d()
    rows = []
    for T in T_values:
        events = simulate(model, T, seed)
        grid = DiscreteGrid(delta=delta, T=T, W=W)
        pre = precompute(project(events, grid), grid)
        times = []
        for _ in range(iters):
            t0 = time.perf_counter()
            phi, dphi = _grid_tensors(model, grid)
            V = _psi_contract(pre, phi)
            _grad_mu_from_tensors(model.baseline, phi, pre, grid)
            _grad_eta_from_tensors(model.baseline, dphi, V, pre, grid)
            times.append(time.perf_counter() - t0)
        rows.append(
            {
                "T": T,
                "G": grid.G,
                "n_events": events.n_total,
                "median_seconds": float(np.median(times)),
            }
        )
    return rows


RUNNERS = {
    "consistency": run_consistency,
    "prop2_rate": run_prop2_rate,
    "w_sensitivity": run_w_sensitivity,
    "l2_vs_ll": run_l2_vs_ll,
}


def run_experiment(spec: ExperimentSpec):
    return RUNNERS[spec.scenario](spec)
