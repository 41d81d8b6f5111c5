"""Heat semigroups generated by fractional lattice operators.

For alpha = 1 the discrete heat kernel is e^{-2t} I_n(2t).  For alpha < 1
the kernel of exp(-t (-Delta)^alpha) comes from subordinating the classical
kernel with a one-sided stable law.  Both routes are computed and compared,
and each kernel is checked to be a probability distribution.
"""

from fraclattice import (
    Family,
    OperatorSpec,
    markov_check,
    semigroup_kernel_closed,
    subordinated_semigroup_kernel,
)
from fraclattice.special_functions import levy_density

t = 1.0
heat = semigroup_kernel_closed(Family.DISCRETE_LAPLACIAN, t, 40)
print("classical heat kernel, t = 1")
print(markov_check(heat, 1e-12))

for alpha in (0.3, 0.6, 0.9):
    res = subordinated_semigroup_kernel(OperatorSpec(Family.DISCRETE_LAPLACIAN, alpha), t,
                                        quad_tol=1e-9, N=40)
    report = markov_check(res.kernel, 1e-6)
    print(f"\nalpha = {alpha}: verdict {report.verdict.value}")
    print(f"  two routes differ by {res.l1_difference:.2e} in l1")
    print(f"  mass defect {res.mass_defect:.2e}, K(0) = {res.kernel(0):.6f}, "
          f"K(40) = {res.kernel(40):.3e}")

# The subordinator density itself, for alpha = 1/2, has a closed form.
print("\nLevy density alpha=1/2 at lambda=1:", levy_density(0.5, 1.0, 1.0))
