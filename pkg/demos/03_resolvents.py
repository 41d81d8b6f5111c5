"""Resolvent families of the time-fractional problem.

The resolvent S(t) solves the Caputo equation of order beta driven by the
lattice generator.  It is a Mittag-Leffler function of the generator, and
it can also be written as an average of heat kernels against a Wright
function.  Both constructions are evaluated below together with the
integral resolvent P(t) and the residual of the defining equation.
"""

import numpy as np

from fraclattice import (
    Family,
    OperatorSpec,
    ResolventParams,
    fractional_kernel,
    l1_norm,
    resolvent_equation_residual,
    resolvent_S_by_subordination,
    resolvent_S_kernel,
    scalar_resolvents,
)
from fraclattice.kernels import Sign

b = fractional_kernel(OperatorSpec(Family.DISCRETE_LAPLACIAN, 0.5, sign=Sign.GENERATOR), 80)
for beta in (0.3, 0.6, 0.9):
    p = ResolventParams(beta, b, rho=1.0, N=40)
    S = resolvent_S_kernel(p, 1.0)
    S_sub = resolvent_S_by_subordination(p, 1.0)
    residual, _ = resolvent_equation_residual(ResolventParams(beta, b, N=40), 1.0)
    print(f"beta = {beta}: S(1)(0) = {S(0):.8f}, mass = {S.mass:.8f}, "
          f"routes differ by {l1_norm(S - S_sub):.1e}, residual {residual:.1e}")

# Without the lattice part the resolvents reduce to scalar Mittag-Leffler functions.
for t in np.linspace(0.0, 3.0, 4):
    s, pval = scalar_resolvents(0.5, 1.0, t)
    print(f"t = {t:.1f}: s_rho = {s:.6f}  p_rho = {pval:.6f}")
