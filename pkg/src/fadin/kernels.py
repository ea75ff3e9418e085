"""Finite-support parametric excitation kernels and their grid discretization.

Three families are provided, all supported on [0, W] and vanishing exactly
outside of it:

* ``TruncatedGaussian``: alpha times a Gaussian density truncated to [0, W].
* ``RaisedCosine``: alpha * (1 + cos(pi (t-u)/sigma - pi)) on [u, u+2*sigma].
* ``TruncatedExponential``: alpha times an exponential density truncated
  to [0, W].

For the truncated-density families the integral over [0, W] equals alpha;
for the raised cosine it is 2*alpha*sigma when the bump fits inside [0, W].

Each family evaluates itself on the regular lag grid tau*delta, tau = 1..L,
and returns closed-form derivatives of every grid value with respect to
every kernel parameter (``discretize_kernel``).  The lag-0 grid value is
deliberately never materialized: discrete convolutions start at tau = 1, so
events never excite their own bin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import ClassVar

import numpy as np
from scipy.special import ndtr

from .errors import ConfigurationError, ParameterError

_SQRT_2PI = math.sqrt(2.0 * math.pi)
# Floor on normalizing constants; keeps evaluations finite when the optimizer
# pushes a location parameter far outside the support.
_DENOM_FLOOR = 1e-290


def _norm_pdf(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


def _norm_cdf_diff(a, b):
    """Phi(b) - Phi(a) computed on the side that avoids cancellation."""
    if a > 0.0:
        return ndtr(-a) - ndtr(-b)
    return ndtr(b) - ndtr(a)


def _as_array(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


@dataclass(frozen=True)
class DiscretizedKernel:
    """Kernel sampled on the lag grid: values[k] = phi((k+1) * delta).

    ``grads[q, k]`` is the derivative of values[k] w.r.t. the q-th kernel
    parameter (same order as ``param_names``).
    """

    values: np.ndarray  # shape (L,)
    grads: np.ndarray   # shape (n_params, L)


class Kernel:
    """Shared behavior of the finite-support parametric families."""

    family: ClassVar[str]
    param_names: ClassVar[tuple]

    def _validate_common(self):
        if not (self.W > 0.0) or not math.isfinite(self.W):
            raise ParameterError(f"support length W must be positive, got {self.W}")
        if self.alpha < 0.0 or not math.isfinite(self.alpha):
            raise ParameterError(f"alpha must be >= 0, got {self.alpha}")

    @property
    def params(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.param_names], dtype=float)

    def with_params(self, values) -> "Kernel":
        return replace(self, **dict(zip(self.param_names, map(float, values))))

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    def envelope(self, lag):
        """sup of phi over lags >= lag; a valid thinning bound for unimodal phi."""
        lag_arr, scalar = _as_array(lag)
        out = self(np.maximum(lag_arr, self.peak_lag()))
        return float(out) if scalar else out

    def max_value(self) -> float:
        return float(self(self.peak_lag()))

    def to_config(self) -> dict:
        cfg = {"family": self.family, "W": float(self.W)}
        cfg.update({n: float(getattr(self, n)) for n in self.param_names})
        return cfg


@dataclass(frozen=True)
class TruncatedGaussian(Kernel):
    """alpha * N(m, sigma^2) density renormalized on [0, W]."""

    alpha: float = 1.0
    m: float = 0.5
    sigma: float = 0.3
    W: float = 1.0

    family: ClassVar[str] = "truncated_gaussian"
    param_names: ClassVar[tuple] = ("alpha", "m", "sigma")

    def __post_init__(self):
        self._validate_common()
        if not (self.sigma > 0.0):
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if not math.isfinite(self.m):
            raise ParameterError("m must be finite")

    def _denom(self) -> float:
        a = -self.m / self.sigma
        b = (self.W - self.m) / self.sigma
        return max(_norm_cdf_diff(a, b), _DENOM_FLOOR)

    def __call__(self, t):
        t_arr, scalar = _as_array(t)
        inside = (t_arr >= 0.0) & (t_arr <= self.W)
        x = (t_arr - self.m) / self.sigma
        vals = self.alpha * _norm_pdf(x) / (self.sigma * self._denom())
        out = np.where(inside, vals, 0.0)
        return float(out) if scalar else out

    def grad_at(self, t) -> np.ndarray:
        t_arr, _ = _as_array(t)
        inside = (t_arr >= 0.0) & (t_arr <= self.W)
        a = -self.m / self.sigma
        b = (self.W - self.m) / self.sigma
        denom = self._denom()
        x = (t_arr - self.m) / self.sigma
        kappa = _norm_pdf(x) / (self.sigma * denom)
        fa, fb = _norm_pdf(a), _norm_pdf(b)
        dk_dm = kappa / self.sigma * (x - (fa - fb) / denom)
        dk_ds = kappa / self.sigma * (x * x - 1.0 - (a * fa - b * fb) / denom)
        g = np.stack([kappa, self.alpha * dk_dm, self.alpha * dk_ds])
        return np.where(inside, g, 0.0)

    def peak_lag(self) -> float:
        return min(max(self.m, 0.0), self.W)

    @classmethod
    def project_params(cls, values, W, floor):
        alpha, m, sigma = values
        return np.array([max(alpha, 0.0), m, max(sigma, floor)])


@dataclass(frozen=True)
class RaisedCosine(Kernel):
    """alpha * (1 + cos(pi (t-u)/sigma - pi)) on [u, u+2*sigma], 0 elsewhere.

    Evaluation is additionally truncated to [0, W]; the solver keeps
    u + 2*sigma <= W so the whole bump stays inside the modeled support.
    """

    alpha: float = 1.0
    u: float = 0.2
    sigma: float = 0.3
    W: float = 1.0

    family: ClassVar[str] = "raised_cosine"
    param_names: ClassVar[tuple] = ("alpha", "u", "sigma")

    def __post_init__(self):
        self._validate_common()
        if not (self.sigma > 0.0):
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if self.u < 0.0 or not math.isfinite(self.u):
            raise ParameterError(f"u must be >= 0, got {self.u}")

    def _phase(self, t_arr):
        return np.pi * (t_arr - self.u) / self.sigma - np.pi

    def _inside(self, t_arr):
        return (
            (t_arr >= self.u)
            & (t_arr <= self.u + 2.0 * self.sigma)
            & (t_arr >= 0.0)
            & (t_arr <= self.W)
        )

    def __call__(self, t):
        t_arr, scalar = _as_array(t)
        vals = self.alpha * (1.0 + np.cos(self._phase(t_arr)))
        out = np.where(self._inside(t_arr), vals, 0.0)
        return float(out) if scalar else out

    def grad_at(self, t) -> np.ndarray:
        t_arr, _ = _as_array(t)
        phase = self._phase(t_arr)
        sin_p = np.sin(phase)
        d_alpha = 1.0 + np.cos(phase)
        d_u = self.alpha * sin_p * np.pi / self.sigma
        d_sigma = self.alpha * sin_p * np.pi * (t_arr - self.u) / self.sigma**2
        g = np.stack([d_alpha, d_u, d_sigma])
        return np.where(self._inside(t_arr), g, 0.0)

    def peak_lag(self) -> float:
        return min(max(self.u + self.sigma, 0.0), self.W)

    @classmethod
    def project_params(cls, values, W, floor):
        alpha, u, sigma = values
        sigma = min(max(sigma, floor), W / 2.0)
        u = min(max(u, 0.0), W - 2.0 * sigma)
        return np.array([max(alpha, 0.0), u, sigma])


@dataclass(frozen=True)
class TruncatedExponential(Kernel):
    """alpha * Exp(gamma) density renormalized on [0, W]."""

    alpha: float = 1.0
    gamma: float = 1.0
    W: float = 1.0

    family: ClassVar[str] = "truncated_exponential"
    param_names: ClassVar[tuple] = ("alpha", "gamma")

    def __post_init__(self):
        self._validate_common()
        if not (self.gamma > 0.0):
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")

    def _denom(self) -> float:
        # 1 - exp(-gamma W), stable for small gamma
        return max(-math.expm1(-self.gamma * self.W), _DENOM_FLOOR)

    def __call__(self, t):
        t_arr, scalar = _as_array(t)
        inside = (t_arr >= 0.0) & (t_arr <= self.W)
        vals = self.alpha * self.gamma * np.exp(-self.gamma * t_arr) / self._denom()
        out = np.where(inside, vals, 0.0)
        return float(out) if scalar else out

    def grad_at(self, t) -> np.ndarray:
        t_arr, _ = _as_array(t)
        inside = (t_arr >= 0.0) & (t_arr <= self.W)
        denom = self._denom()
        kappa = self.gamma * np.exp(-self.gamma * t_arr) / denom
        dC = self.W * math.exp(-self.gamma * self.W)
        dk_dg = kappa * (1.0 / self.gamma - t_arr - dC / denom)
        g = np.stack([kappa, self.alpha * dk_dg])
        return np.where(inside, g, 0.0)

    def peak_lag(self) -> float:
        return 0.0

    @classmethod
    def project_params(cls, values, W, floor):
        alpha, gamma = values
        return np.array([max(alpha, 0.0), max(gamma, floor)])


FAMILIES = {
    cls.family: cls
    for cls in (TruncatedGaussian, RaisedCosine, TruncatedExponential)
}


def kernel_from_config(cfg: dict) -> Kernel:
    """Build a kernel from a config mapping, e.g. from a CLI JSON file.

    Expected keys: "family" plus the per-family parameters
    (alpha, m, sigma | alpha, u, sigma | alpha, gamma) and "W".
    """
    cfg = dict(cfg)
    family = cfg.pop("family", None)
    if family not in FAMILIES:
        raise ConfigurationError(
            f"unknown kernel family {family!r}; expected one of {sorted(FAMILIES)}"
        )
    cls = FAMILIES[family]
    allowed = set(cls.param_names) | {"W"}
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigurationError(
            f"unexpected keys {sorted(unknown)} for family {family!r}"
        )
    try:
        return cls(**{k: float(v) for k, v in cfg.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad kernel config for {family!r}: {exc}") from exc


def discretize_kernel(kernel: Kernel, grid) -> DiscretizedKernel:
    """Sample the kernel and its parameter gradients on lags delta..L*delta."""
    L = grid.L
    if L < 1:
        raise ConfigurationError(
            f"grid has no lag points on the kernel support (delta={grid.delta} > W={grid.W})"
        )
    lags = grid.delta * np.arange(1, L + 1)
    return DiscretizedKernel(values=kernel(lags), grads=kernel.grad_at(lags))


def _adaptive_simpson(f, a, b, tol, max_depth=40):
    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        mid = 0.5 * (a + b)
        lm, rm = 0.5 * (a + mid), 0.5 * (mid + b)
        flm, frm = f(lm), f(rm)
        left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        if depth <= 0 or abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        return recurse(a, mid, fa, flm, fm, left, 0.5 * tol, depth - 1) + recurse(
            mid, b, fm, frm, fb, right, 0.5 * tol, depth - 1
        )

    return recurse(a, b, fa, fm, fb, whole, tol, max_depth)


def _integration_knots(kernel: Kernel) -> list:
    knots = {0.0, kernel.W}
    if isinstance(kernel, TruncatedGaussian):
        knots.add(min(max(kernel.m, 0.0), kernel.W))
    elif isinstance(kernel, RaisedCosine):
        for t in (kernel.u, kernel.u + kernel.sigma, kernel.u + 2.0 * kernel.sigma):
            knots.add(min(max(t, 0.0), kernel.W))
    return sorted(knots)


def kernel_mass(kernel: Kernel, tol: float = 1e-10) -> float:
    """Integral of phi over [0, W] by adaptive Simpson quadrature.

    Equals alpha for the truncated-density families and 2*alpha*sigma for a
    raised cosine whose bump fits inside [0, W].
    """
    knots = _integration_knots(kernel)
    pieces = [(a, b) for a, b in zip(knots[:-1], knots[1:]) if b > a]
    if not pieces:
        return 0.0
    tol_piece = tol / len(pieces)
    f = lambda t: float(kernel(t))
    return sum(_adaptive_simpson(f, a, b, tol_piece) for a, b in pieces)
