"""Simulate a self-exciting process and check it behaves like one.

The long-run event rate of a stable univariate model is mu / (1 - mass),
and time-rescaling by the compensator turns inter-event gaps into unit
exponentials.
"""

import numpy as np
from scipy.stats import kstest

from fadin import (
    HawkesModel,
    TruncatedExponential,
    compensator_increments,
    intensity_at,
    simulate,
)

mu, alpha, gamma = 1.1, 0.8, 0.5
model = HawkesModel(
    baseline=np.array([mu]),
    kernels=[[TruncatedExponential(alpha=alpha, gamma=gamma, W=10.0)]],
)
print(f"kernel-mass spectral radius: {model.spectral_radius():.3f}")

T = 2000.0
events = simulate(model, T, seed=0)
rate = events.n_total / T
print(f"simulated {events.n_total} events; empirical rate {rate:.3f}")
print(f"branching prediction mu/(1-alpha) = {mu / (1 - alpha):.3f}")

t_probe = events.events[0][100] + 0.05
print(f"intensity shortly after an event: {intensity_at(model, events, 0, t_probe):.3f}")

increments = compensator_increments(model, events, 0, max_events=600)
res = kstest(increments, "expon")
print(f"time-rescaling KS test on {len(increments)} gaps: "
      f"statistic={res.statistic:.4f}, p-value={res.pvalue:.3f}")
