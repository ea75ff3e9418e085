"""Tour of the three finite-support kernel families.

Evaluates each family on and off its support, samples it on a lag grid,
and checks the closed-form integrals against adaptive quadrature.
"""

import numpy as np

from fadin import (
    DiscreteGrid,
    RaisedCosine,
    TruncatedExponential,
    TruncatedGaussian,
    discretize_kernel,
    kernel_mass,
)

kernels = {
    "truncated gaussian": TruncatedGaussian(alpha=0.8, m=0.5, sigma=0.3, W=1.0),
    "raised cosine": RaisedCosine(alpha=0.8, u=0.2, sigma=0.3, W=1.0),
    "truncated exponential": TruncatedExponential(alpha=0.8, gamma=5.0, W=1.0),
}

ts = np.array([-0.5, 0.0, 0.2, 0.5, 0.9, 1.0, 1.5])
print("pointwise values (support is [0, 1]):")
print("  t:", ts)
for name, kern in kernels.items():
    print(f"  {name:22s}", np.round(kern(ts), 4))

print("\nintegral over the support (quadrature):")
for name, kern in kernels.items():
    mass = kernel_mass(kern)
    print(f"  {name:22s} {mass:.10f}")
print("  (alpha for the truncated densities, 2*alpha*sigma for the cosine)")

grid = DiscreteGrid(delta=0.1, T=10.0, W=1.0)
dk = discretize_kernel(kernels["raised cosine"], grid)
print(f"\nraised cosine on the lag grid (delta={grid.delta}, L={grid.L}):")
print("  values:", np.round(dk.values, 4))
print("  d/d u :", np.round(dk.grads[1], 4))
