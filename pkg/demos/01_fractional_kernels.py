"""Fractional powers of lattice difference operators.

The kernel of (-Delta)^alpha on Z is computed from a closed form in Gamma
functions.  Here we print its first entries, confirm them against a direct
Fourier quadrature of the symbol and watch the slow algebraic decay that
makes the operator nonlocal.
"""

import numpy as np

from fraclattice import Family, OperatorSpec, fractional_kernel, kernel_by_fourier

for alpha in (0.25, 0.5, 0.75):
    spec = OperatorSpec(Family.DISCRETE_LAPLACIAN, alpha)
    k = fractional_kernel(spec, 200)
    fourier = np.array([kernel_by_fourier(spec, n) for n in range(6)])
    print(f"alpha = {alpha}")
    print("  K(0..5)          ", np.array2string(k(np.arange(6)), precision=6))
    print("  Fourier check    ", f"{np.max(np.abs(fourier - k(np.arange(6)))):.1e}")
    # off the diagonal the entries decay like |n|^{-1-2 alpha}
    slope = np.log(abs(k(200)) / abs(k(100))) / np.log(2.0)
    print(f"  decay exponent    {slope:.3f} (expected {-1 - 2 * alpha:.3f})")
    print(f"  row sum           {k.mass:.2e}  (the operator kills constants)")

# The one-sided Euler differences give kernels supported on a half line.
for fam in (Family.FORWARD_EULER, Family.BACKWARD_EULER):
    k = fractional_kernel(OperatorSpec(fam, 0.5), 6)
    print(fam.value, "support", k.indices[k.values != 0].min(), "to", k.indices[k.values != 0].max())
