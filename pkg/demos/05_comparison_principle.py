"""Ordered data give ordered solutions.

Two initial states with phi <= psi are evolved under the cubic reaction.
The solutions stay ordered at every grid point.  Then a pair of constant
states is tested as sub- and supersolutions; the iterates started from
them stay between them.
"""

import numpy as np

from fraclattice import (
    SolutionGrid,
    SolverConfig,
    compare_solutions,
    make_model,
    sub_super_check,
)

model = make_model("cubic-bistable-free", a=1.0)
cfg = SolverConfig(N=20, T=1.0, M=32, beta=0.6)
n = cfg.sites
phi = np.where(np.abs(n) <= 3, 0.3, 0.0)
psi = np.where(np.abs(n) <= 6, 0.7, 0.1)
ok, report = compare_solutions(model, phi, psi, cfg)
print(f"u_phi <= u_psi everywhere: {ok} (worst violation {report.worst_violation:.1e})")

shape = (2 * cfg.N + 1, cfg.M + 1)
zero = SolutionGrid(cfg.times, cfg.N, np.zeros(shape))
ceiling = SolutionGrid(cfg.times, cfg.N, np.full(shape, model.gamma))
ok, rep = sub_super_check(model, zero, ceiling, phi, cfg)
print(f"0 and gamma bracket the solution: {ok}, after {rep.iterations} iterations")

ok, rep = sub_super_check(model, zero, zero, phi, cfg)
print(f"0 as a supersolution for positive data: {ok} "
      f"(K(0) exceeds 0 by {rep.super_violation:.2f})")
