"""Fractional-in-time, fractional-in-space evolution on the integer lattice.

Sequences on Z with certified l1 tails (:mod:`.seq_algebra`), the special
functions behind subordination (:mod:`.special_functions`), fractional
difference kernels (:mod:`.kernels`), Markov semigroups
(:mod:`.semigroups`), resolvent families (:mod:`.resolvents`) and the
monotone nonlinear solver (:mod:`.evolution`).
"""

from .evolution import (
    HypothesisError,
    NonConvergenceError,
    NonlinearModel,
    Profile,
    SolutionGrid,
    SolverConfig,
    apply_K_beta,
    compare_solutions,
    linear_solve,
    make_model,
    monotone_solve,
    sub_super_check,
)
from .kernels import (
    Family,
    InvalidSpecError,
    OperatorSpec,
    Sign,
    base_kernel,
    fractional_kernel,
    kernel_by_fourier,
)
from .resolvents import (
    ResolventParams,
    integral_resolvent_P_by_subordination,
    integral_resolvent_P_kernel,
    resolvent_equation_residual,
    resolvent_S_by_subordination,
    resolvent_S_kernel,
    scalar_resolvents,
)
from .semigroups import (
    MarkovReport,
    Verdict,
    markov_check,
    semigroup_kernel_closed,
    semigroup_kernel_general,
    subordinated_semigroup_kernel,
)
from .seq_algebra import LatticeSeq, WindowPolicy, convolve, delta, exp_element, l1_norm
from .special_functions import (
    SeriesControl,
    levy_density,
    mittag_leffler_element,
    mittag_leffler_scalar,
    wright_phi,
)

__version__ = "0.1.0"

__all__ = [
    "Family",
    "HypothesisError",
    "InvalidSpecError",
    "LatticeSeq",
    "MarkovReport",
    "NonConvergenceError",
    "NonlinearModel",
    "OperatorSpec",
    "Profile",
    "ResolventParams",
    "SeriesControl",
    "Sign",
    "SolutionGrid",
    "SolverConfig",
    "Verdict",
    "WindowPolicy",
    "apply_K_beta",
    "base_kernel",
    "compare_solutions",
    "convolve",
    "delta",
    "exp_element",
    "fractional_kernel",
    "integral_resolvent_P_by_subordination",
    "integral_resolvent_P_kernel",
    "kernel_by_fourier",
    "l1_norm",
    "levy_density",
    "linear_solve",
    "make_model",
    "markov_check",
    "mittag_leffler_element",
    "mittag_leffler_scalar",
    "monotone_solve",
    "resolvent_S_by_subordination",
    "resolvent_S_kernel",
    "resolvent_equation_residual",
    "scalar_resolvents",
    "semigroup_kernel_closed",
    "semigroup_kernel_general",
    "sub_super_check",
    "subordinated_semigroup_kernel",
    "wright_phi",
]
