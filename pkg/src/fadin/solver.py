"""Discrete losses, exact gradients, and first-order parameter fitting.

The least-squares route evaluates the loss and all parameter gradients from
the precomputed tensors, so one iteration costs O(p^3 L^2) independent of
the grid size and event count.  The discrete log-likelihood route is kept
deliberately literal: every iteration rebuilds the full discrete intensity
by direct convolution over the grid, so its per-iteration cost grows with G.
That asymmetry is the point of comparing the two.

Both fits share the same driver: plain gradient descent or RMSprop steps
followed by projection onto the feasible set (nonnegative baselines and
amplitudes, floored scale parameters, raised-cosine bumps kept inside the
support).  The best-loss iterate visited is returned.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .discretization import DiscreteGrid, DiscretizedCounts, project
from .errors import (
    ConfigurationError,
    DataError,
    IntensityBarrierError,
    NumericError,
)
from .kernels import FAMILIES, Kernel, discretize_kernel
from .precompute import DEFAULT_MEM_CAP_BYTES, Precomputations, precompute
from .simulation import EventSequences, HawkesModel

OPTIMIZERS = ("rmsprop", "gd")
INITS = ("moment", "random")


# ---------------------------------------------------------------------------
# shared tensor plumbing
# ---------------------------------------------------------------------------

def _grid_tensors(model: HawkesModel, grid: DiscreteGrid):
    """Kernel values (p, p, L) and per-parameter grads (nested (K, L)) on the grid."""
    p, L = model.p, grid.L
    phi = np.empty((p, p, L))
    dphi = [[None] * p for _ in range(p)]
    for i in range(p):
        for j in range(p):
            dk = discretize_kernel(model.kernels[i][j], grid)
            phi[i, j] = dk.values
            dphi[i][j] = dk.grads
    return phi, dphi


def _psi_contract(pre: Precomputations, phi: np.ndarray) -> np.ndarray:
    """V[i, j, tau] = sum_k sum_tau' psi[j, k, tau, tau'] phi[i, k, tau']."""
    p, L = phi.shape[0], phi.shape[2]
    V = phi.reshape(p, p * L) @ pre.psi_flat
    return V.reshape(p, p, L)


def _check_loss_inputs(model: HawkesModel, pre: Precomputations, grid: DiscreteGrid):
    if pre.n_total == 0:
        raise DataError("loss is undefined without events (N_T = 0)")
    if pre.L != grid.L or pre.grid.G != grid.G:
        raise ConfigurationError("precomputations were built on a different grid")
    if model.p != pre.p:
        raise ConfigurationError(
            f"model dimension {model.p} does not match data dimension {pre.p}"
        )


# ---------------------------------------------------------------------------
# least-squares loss and gradients via precomputations
# ---------------------------------------------------------------------------

def loss_l2(model: HawkesModel, pre: Precomputations, grid: DiscreteGrid) -> float:
    """Discrete least-squares loss evaluated from the precomputed tensors."""
    _check_loss_inputs(model, pre, grid)
    phi, _ = _grid_tensors(model, grid)
    value = _loss_l2_from_tensors(model.baseline, phi, pre, grid)
    if not np.isfinite(value):
        raise NumericError(f"least-squares loss is not finite ({value})")
    return value


def _loss_l2_from_tensors(mu, phi, pre, grid, V=None):
    delta = grid.delta
    t_plus = delta * (grid.G + 1)
    if V is None:
        V = _psi_contract(pre, phi)
    n_events = pre.n_events.astype(float)
    lin = 2.0 * delta * float(mu @ np.einsum("ijl,jl->i", phi, pre.phi_g))
    quad = delta * float(np.sum(phi * V))
    data = 2.0 * (float(n_events @ mu) + float(np.sum(phi * pre.phi_ev)))
    return (t_plus * float(mu @ mu) + lin + quad - data) / pre.n_total


def grad_mu(model: HawkesModel, pre: Precomputations, grid: DiscreteGrid) -> np.ndarray:
    """Exact gradient of the least-squares loss w.r.t. the baseline vector."""
    _check_loss_inputs(model, pre, grid)
    phi, _ = _grid_tensors(model, grid)
    return _grad_mu_from_tensors(model.baseline, phi, pre, grid)


def _grad_mu_from_tensors(mu, phi, pre, grid):
    t_plus = grid.delta * (grid.G + 1)
    conv_g = np.einsum("mjl,jl->m", phi, pre.phi_g)
    return (
        2.0 * t_plus * mu - 2.0 * pre.n_events + 2.0 * grid.delta * conv_g
    ) / pre.n_total


def grad_eta(model: HawkesModel, pre: Precomputations, grid: DiscreteGrid) -> list:
    """Exact per-parameter gradients for every kernel; nested (m, l) -> (K,)."""
    _check_loss_inputs(model, pre, grid)
    phi, dphi = _grid_tensors(model, grid)
    V = _psi_contract(pre, phi)
    return _grad_eta_from_tensors(model.baseline, dphi, V, pre, grid)


def _grad_eta_from_tensors(mu, dphi, V, pre, grid):
    p = len(dphi)
    delta = grid.delta
    out = [[None] * p for _ in range(p)]
    for m in range(p):
        for l in range(p):
            rhs = 2.0 * delta * (mu[m] * pre.phi_g[l] + V[m, l]) - 2.0 * pre.phi_ev[m, l]
            out[m][l] = (dphi[m][l] @ rhs) / pre.n_total
    return out


# ---------------------------------------------------------------------------
# direct route: discrete intensity by convolution
# ---------------------------------------------------------------------------

def intensity_discrete(
    model: HawkesModel, counts: DiscretizedCounts, grid: DiscreteGrid
) -> np.ndarray:
    """Discrete intensity on the grid, (p, G+1), by direct convolution."""
    phi, _ = _grid_tensors(model, grid)
    z = counts.to_dense().astype(float)
    return _intensity_from_tensors(model.baseline, phi, z, grid)


def _intensity_from_tensors(mu, phi, z, grid):
    p, G = z.shape[0], grid.G
    lam = np.empty((p, G + 1))
    for i in range(p):
        acc = lam[i]
        acc.fill(float(mu[i]))
        for j in range(p):
            taps = np.concatenate(([0.0], phi[i, j]))
            acc += np.convolve(z[j], taps)[: G + 1]
    return lam


def loss_l2_direct(
    model: HawkesModel, counts: DiscretizedCounts, grid: DiscreteGrid
) -> float:
    """Least-squares loss from the explicit discrete intensity.

    Independent of the precomputation route; the two must agree to float
    accuracy, which the test-suite checks on random instances.
    """
    n_total = counts.n_total
    if n_total == 0:
        raise DataError("loss is undefined without events (N_T = 0)")
    lam = intensity_discrete(model, counts, grid)
    quad = grid.delta * float(np.sum(lam * lam))
    data = 0.0
    for i in range(counts.p):
        data += float(counts.bin_count[i] @ lam[i][counts.bin_index[i]])
    return (quad - 2.0 * data) / n_total


# ---------------------------------------------------------------------------
# discrete negative log-likelihood baseline
# ---------------------------------------------------------------------------

def _ll_value_from_intensity(lam, counts, grid):
    value = grid.delta * float(lam.sum())
    for i in range(counts.p):
        at_bins = lam[i][counts.bin_index[i]]
        if np.any(at_bins <= 0.0):
            raise IntensityBarrierError(
                "nonpositive intensity at an occupied bin; "
                "try a larger baseline initialization"
            )
        value -= float(counts.bin_count[i] @ np.log(at_bins))
    return value


def loss_ll_discrete(
    model: HawkesModel, counts: DiscretizedCounts, grid: DiscreteGrid
) -> float:
    """Negative log-likelihood of the discretized process."""
    if counts.n_total == 0:
        raise DataError("log-likelihood is undefined without events")
    lam = intensity_discrete(model, counts, grid)
    return _ll_value_from_intensity(lam, counts, grid)


def _weighted_lag_sums(z_j, bins, weights, L, chunk_rows=200_000):
    """sum over occupied bins a of weights[a] * z_j[a - tau] for tau = 1..L."""
    taus = np.arange(1, L + 1)
    out = np.zeros(L)
    # only bins below L reach negative lags and need masking
    head = int(np.searchsorted(bins, L))
    if head:
        cols = bins[:head, None] - taus[None, :]
        valid = cols >= 0
        np.clip(cols, 0, None, out=cols)
        out += weights[:head] @ (z_j[cols] * valid)
    for start in range(head, bins.size, chunk_rows):
        rows = bins[start : start + chunk_rows]
        out += weights[start : start + chunk_rows] @ z_j[rows[:, None] - taus[None, :]]
    return out


def grad_ll_discrete(
    model: HawkesModel, counts: DiscretizedCounts, grid: DiscreteGrid
):
    """Gradient of the discrete negative log-likelihood.

    Returns ``(grad_baseline, grad_kernels)`` with the same nesting as
    :func:`grad_eta`.
    """
    if counts.n_total == 0:
        raise DataError("log-likelihood is undefined without events")
    phi, dphi = _grid_tensors(model, grid)
    z = counts.to_dense().astype(float)
    lam = _intensity_from_tensors(model.baseline, phi, z, grid)
    return _grad_ll_from_tensors(lam, dphi, z, counts, grid)


def _count_lag_sums(z, grid):
    """sum_{s=0..G} z_j[s - tau] for tau = 1..L; one cumulative sum per process."""
    cums = np.cumsum(z, axis=1)
    return cums[:, grid.G - grid.L : grid.G][:, ::-1]


def _grad_ll_from_tensors(lam, dphi, z, counts, grid, count_sums=None):
    p, L = counts.p, grid.L
    delta = grid.delta
    t_plus = delta * (grid.G + 1)
    gmu = np.empty(p)
    geta = [[None] * p for _ in range(p)]
    if count_sums is None:
        count_sums = _count_lag_sums(z, grid)
    for m in range(p):
        bins = counts.bin_index[m]
        at_bins = lam[m][bins]
        if np.any(at_bins <= 0.0):
            raise IntensityBarrierError(
                "nonpositive intensity at an occupied bin; "
                "try a larger baseline initialization"
            )
        ratio = counts.bin_count[m] / at_bins
        gmu[m] = t_plus - float(ratio.sum())
        for l in range(p):
            dloss_dphi = delta * count_sums[l] - _weighted_lag_sums(z[l], bins, ratio, L)
            geta[m][l] = dphi[m][l] @ dloss_dphi
    return gmu, geta


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

@dataclass
class FitConfig:
    """First-order solver settings.

    ``step_decay`` optionally anneals the step size as
    step_size / (1 + step_decay * iteration), which tames the terminal
    oscillation of constant-step RMSprop.
    """

    max_iter: int = 800
    step_size: float = 0.02
    optimizer: str = "rmsprop"
    init: str = "moment"
    seed: int = 0
    clamp_floor: float = 1e-4
    convergence_tol: float = 1e-6
    rms_decay: float = 0.99
    rms_eps: float = 1e-8
    step_decay: float = 0.005
    precompute_method: str = "auto"
    mem_cap_bytes: int = DEFAULT_MEM_CAP_BYTES

    def __post_init__(self):
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if self.step_size <= 0.0:
            raise ConfigurationError("step_size must be > 0")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigurationError(f"optimizer must be one of {OPTIMIZERS}")
        if self.init not in INITS:
            raise ConfigurationError(f"init must be one of {INITS}")


@dataclass
class FitResult:
    """Fitted model plus the optimization record."""

    model: HawkesModel
    loss_trace: np.ndarray
    iterations_run: int
    converged: bool
    status: str                 # "converged" | "max_iter" | "diverged"
    best_loss: float
    precompute_seconds: float
    iteration_seconds: float
    total_seconds: float
    config: FitConfig
    family: str

    def parameter_vector(self) -> np.ndarray:
        """Flat (mu, kernel parameters) vector in row-major kernel order."""
        parts = [np.asarray(self.model.baseline, dtype=float)]
        for row in self.model.kernels:
            for k in row:
                parts.append(k.params)
        return np.concatenate(parts)

    def to_json_dict(self) -> dict:
        cfg = {
            k: getattr(self.config, k)
            for k in (
                "max_iter", "step_size", "optimizer", "init", "seed",
                "clamp_floor", "convergence_tol", "rms_decay", "rms_eps",
                "step_decay", "precompute_method",
            )
        }
        return {
            "schema_version": 1,
            "family": self.family,
            "baseline": [float(v) for v in self.model.baseline],
            "kernels": [[k.to_config() for k in row] for row in self.model.kernels],
            "loss_trace": [float(v) for v in self.loss_trace],
            "iterations_run": self.iterations_run,
            "converged": self.converged,
            "status": self.status,
            "best_loss": float(self.best_loss),
            "wall_times": {
                "precompute_seconds": self.precompute_seconds,
                "iteration_seconds": self.iteration_seconds,
                "total_seconds": self.total_seconds,
            },
            "config": cfg,
            "seed": self.config.seed,
        }


def _family_class(family) -> type:
    if isinstance(family, type) and issubclass(family, Kernel):
        return family
    if family in FAMILIES:
        return FAMILIES[family]
    raise ConfigurationError(
        f"unknown kernel family {family!r}; expected one of {sorted(FAMILIES)}"
    )


_MOMENT_SHAPE = {
    "truncated_gaussian": lambda W: (0.5 * W, 0.25 * W),
    "raised_cosine": lambda W: (0.25 * W, 0.25 * W),
    "truncated_exponential": lambda W: (2.0 / W,),
}

_RANDOM_BOXES = {
    # (low, high) multipliers of W (or of 1/W for gamma); alpha box is per 1/p
    "alpha": (0.1, 0.9),
    "m": (0.1, 0.9),
    "sigma": (0.1, 0.4),
    "u": (0.0, 0.45),
    "gamma": (0.5, 8.0),
}


def initial_parameters(
    family_cls, events: EventSequences, grid: DiscreteGrid, cfg: FitConfig
):
    """Starting point: data-scaled baselines plus mid-support kernel shapes.

    Moment init puts mu_i = N_i / ((p+1) T), alpha = 0.5 / p and shape
    parameters at mid-support.  Random init draws each parameter uniformly
    from a fixed box scaled by the support length, with an explicit seed.
    """
    p = events.p
    W = grid.W
    if cfg.init == "moment":
        mu = events.n_events / ((p + 1) * grid.T)
        shape = _MOMENT_SHAPE[family_cls.family](W)
        eta_one = np.array([0.5 / p, *shape])
        eta = np.tile(eta_one, (p, p, 1))
        return mu.astype(float), eta
    rng = np.random.default_rng(cfg.seed)
    mu = events.n_events / ((p + 1) * grid.T) * rng.uniform(0.5, 1.5, size=p)
    K = len(family_cls.param_names)
    eta = np.empty((p, p, K))
    for q, name in enumerate(family_cls.param_names):
        lo, hi = _RANDOM_BOXES[name]
        draw = rng.uniform(lo, hi, size=(p, p))
        if name == "alpha":
            eta[:, :, q] = draw / p
        elif name == "gamma":
            eta[:, :, q] = draw / W
        else:
            eta[:, :, q] = draw * W
    return mu.astype(float), eta


def _build_model(family_cls, mu, eta, W) -> HawkesModel:
    kernels = [
        [family_cls(*eta[i, j], W=W) for j in range(eta.shape[1])]
        for i in range(eta.shape[0])
    ]
    return HawkesModel(baseline=mu.copy(), kernels=kernels)


def _project_theta(family_cls, mu, eta, W, floor):
    mu = np.maximum(mu, 0.0)
    for i in range(eta.shape[0]):
        for j in range(eta.shape[1]):
            eta[i, j] = family_cls.project_params(eta[i, j], W, floor)
    return mu, eta


class _L2Objective:
    """Loss/gradient evaluations backed by the precomputed tensors."""

    def __init__(self, events, grid, cfg):
        counts = project(events, grid)
        pre = precompute(
            counts, grid, method=cfg.precompute_method, mem_cap_bytes=cfg.mem_cap_bytes
        )
        self.pre = pre
        self.grid = grid
        self.setup_seconds = pre.elapsed_seconds

    def value_and_grads(self, model):
        phi, dphi = _grid_tensors(model, self.grid)
        V = _psi_contract(self.pre, phi)
        loss = _loss_l2_from_tensors(model.baseline, phi, self.pre, self.grid, V=V)
        gmu = _grad_mu_from_tensors(model.baseline, phi, self.pre, self.grid)
        geta = _grad_eta_from_tensors(model.baseline, dphi, V, self.pre, self.grid)
        return loss, gmu, geta


class _LLObjective:
    """Literal discrete log-likelihood; every call convolves the full grid."""

    def __init__(self, events, grid, cfg):
        t0 = time.perf_counter()
        self.counts = project(events, grid)
        if self.counts.n_total == 0:
            raise DataError("log-likelihood is undefined without events")
        self.z = self.counts.to_dense().astype(float)
        self.count_sums = _count_lag_sums(self.z, grid)
        self.grid = grid
        self.setup_seconds = time.perf_counter() - t0

    def value_and_grads(self, model):
        phi, dphi = _grid_tensors(model, self.grid)
        lam = _intensity_from_tensors(model.baseline, phi, self.z, self.grid)
        loss = _ll_value_from_intensity(lam, self.counts, self.grid)
        gmu, geta = _grad_ll_from_tensors(
            lam, dphi, self.z, self.counts, self.grid, count_sums=self.count_sums
        )
        return loss, gmu, geta


def _minimize(objective, family_cls, events, grid, cfg) -> FitResult:
    t_total0 = time.perf_counter()
    p = events.p
    K = len(family_cls.param_names)
    mu, eta = initial_parameters(family_cls, events, grid, cfg)
    mu, eta = _project_theta(family_cls, mu, eta, grid.W, cfg.clamp_floor)

    n_params = p + p * p * K
    ms = np.zeros(n_params)
    best_loss = np.inf
    best = (mu.copy(), eta.copy())
    trace = []
    status = "max_iter"
    iters = 0

    t_iter0 = time.perf_counter()
    for it in range(cfg.max_iter):
        iters = it + 1
        model = _build_model(family_cls, mu, eta, grid.W)
        try:
            loss, gmu, geta = objective.value_and_grads(model)
        except IntensityBarrierError:
            status = "diverged"
            break
        g = np.concatenate([gmu] + [geta[m][l] for m in range(p) for l in range(p)])
        trace.append(loss)
        if not np.isfinite(loss) or not np.all(np.isfinite(g)):
            status = "diverged"
            break
        if loss < best_loss:
            best_loss = loss
            best = (mu.copy(), eta.copy())

        lr = cfg.step_size / (1.0 + cfg.step_decay * it)
        if cfg.optimizer == "rmsprop":
            ms = cfg.rms_decay * ms + (1.0 - cfg.rms_decay) * g * g
            # bias-corrected accumulator; otherwise the first steps are
            # 1/sqrt(1 - decay) times too large and can throw the iterate
            ms_hat = ms / (1.0 - cfg.rms_decay ** (it + 1))
            step = lr * g / (np.sqrt(ms_hat) + cfg.rms_eps)
        else:
            step = lr * g
        theta = np.concatenate([mu, eta.ravel()]) - step
        new_mu = theta[:p]
        new_eta = theta[p:].reshape(p, p, K)
        new_mu, new_eta = _project_theta(
            family_cls, new_mu, new_eta, grid.W, cfg.clamp_floor
        )
        delta_max = max(
            float(np.max(np.abs(new_mu - mu))), float(np.max(np.abs(new_eta - eta)))
        )
        mu, eta = new_mu, new_eta
        if delta_max < cfg.convergence_tol:
            status = "converged"
            break
    iter_seconds = (time.perf_counter() - t_iter0) / max(iters, 1)

    if not np.isfinite(best_loss):
        best = (mu, eta)
    model = _build_model(family_cls, best[0], best[1], grid.W)
    return FitResult(
        model=model,
        loss_trace=np.asarray(trace),
        iterations_run=iters,
        converged=status == "converged",
        status=status,
        best_loss=float(best_loss),
        precompute_seconds=objective.setup_seconds,
        iteration_seconds=iter_seconds,
        total_seconds=time.perf_counter() - t_total0,
        config=cfg,
        family=family_cls.family,
    )


def fit(
    events: EventSequences,
    family,
    grid: DiscreteGrid,
    cfg: FitConfig | None = None,
) -> FitResult:
    """Estimate baselines and kernel parameters by the least-squares route.

    Projects the events once, builds the precomputations once, then runs
    first-order updates whose cost does not depend on the event count.
    """
    cfg = cfg or FitConfig()
    family_cls = _family_class(family)
    if events.n_total == 0:
        raise DataError("cannot fit a model without events")
    objective = _L2Objective(events, grid, cfg)
    return _minimize(objective, family_cls, events, grid, cfg)


def fit_ll(
    events: EventSequences,
    family,
    grid: DiscreteGrid,
    cfg: FitConfig | None = None,
) -> FitResult:
    """Baseline estimator minimizing the discrete negative log-likelihood.

    Matches :func:`fit` in interface and constraint handling, but each
    iteration costs O(G L): there is nothing to precompute away.
    """
    cfg = cfg or FitConfig()
    family_cls = _family_class(family)
    if events.n_total == 0:
        raise DataError("cannot fit a model without events")
    objective = _LLObjective(events, grid, cfg)
    return _minimize(objective, family_cls, events, grid, cfg)
