"""Fast discretized least-squares inference for multivariate Hawkes processes.

The pipeline: simulate (or load) event sequences, project them on a regular
grid, precompute the parameter-independent tensors once, then run a
first-order solver whose per-iteration cost does not depend on the number
of events.  Three finite-support kernel families are built in, and a
discrete log-likelihood baseline is included for benchmarking.
"""

from .discretization import DiscreteGrid, DiscretizedCounts, project
from .errors import (
    ConfigurationError,
    DataError,
    FadinError,
    IntensityBarrierError,
    NumericError,
    ParameterError,
    ResourceLimitError,
    UnstableModelError,
)
from .kernels import (
    FAMILIES,
    DiscretizedKernel,
    Kernel,
    RaisedCosine,
    TruncatedExponential,
    TruncatedGaussian,
    discretize_kernel,
    kernel_from_config,
    kernel_mass,
)
from .precompute import Precomputations, precompute
from .simulation import (
    EventSequences,
    HawkesModel,
    compensator_increments,
    intensity_at,
    simulate,
)
from .solver import (
    FitConfig,
    FitResult,
    fit,
    fit_ll,
    grad_eta,
    grad_ll_discrete,
    grad_mu,
    intensity_discrete,
    loss_l2,
    loss_l2_direct,
    loss_ll_discrete,
)
from .experiments import (
    ExperimentSpec,
    run_consistency,
    run_experiment,
    run_l2_vs_ll,
    run_prop2_rate,
    run_w_sensitivity,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DataError",
    "DiscreteGrid",
    "DiscretizedCounts",
    "DiscretizedKernel",
    "EventSequences",
    "ExperimentSpec",
    "FadinError",
    "FAMILIES",
    "FitConfig",
    "FitResult",
    "HawkesModel",
    "IntensityBarrierError",
    "Kernel",
    "NumericError",
    "ParameterError",
    "Precomputations",
    "RaisedCosine",
    "ResourceLimitError",
    "TruncatedExponential",
    "TruncatedGaussian",
    "UnstableModelError",
    "compensator_increments",
    "discretize_kernel",
    "fit",
    "fit_ll",
    "grad_eta",
    "grad_ll_discrete",
    "grad_mu",
    "intensity_at",
    "intensity_discrete",
    "kernel_from_config",
    "kernel_mass",
    "loss_l2",
    "loss_l2_direct",
    "loss_ll_discrete",
    "precompute",
    "project",
    "run_consistency",
    "run_experiment",
    "run_l2_vs_ll",
    "run_prop2_rate",
    "run_w_sensitivity",
    "simulate",
]
