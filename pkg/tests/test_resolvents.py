import math

import numpy as np
import pytest

from fraclattice.kernels import Family, base_generator
from fraclattice.resolvents import (
    ResolventParams,
    integral_resolvent_P_by_subordination,
    integral_resolvent_P_kernel,
    resolvent_equation_residual,
    resolvent_S_by_subordination,
    resolvent_S_kernel,
    scalar_resolvents,
)
from fraclattice.semigroups import semigroup_kernel_general
from fraclattice.seq_algebra import LatticeSeq, WindowPolicy, convolve, delta, l1_norm
from fraclattice.special_functions import mittag_leffler_scalar

HEAT = base_generator(Family.DISCRETE_LAPLACIAN)
ZERO = LatticeSeq(0, [0.0], 0.0, 0.0)


def test_beta_one_is_the_semigroup():
    p = ResolventParams(1.0, HEAT, N=30)
    expo = semigroup_kernel_general(HEAT, 0.8, 1e-15, WindowPolicy.truncate(30))
    assert l1_norm(resolvent_S_kernel(p, 0.8) - expo) < 1e-13
    P = integral_resolvent_P_kernel(p, 0.8)
    assert P.weight == 1.0 and l1_norm(P.kernel - expo) < 1e-13


def test_scalar_generator():
    p = ResolventParams(0.6, ZERO, rho=2.0, N=3)
    t = 1.3
    S = resolvent_S_kernel(p, t)
    assert S(0) == pytest.approx(mittag_leffler_scalar(0.6, 1.0, -2.0 * t ** 0.6), rel=1e-13)
    P = integral_resolvent_P_kernel(p, t).as_kernel()
    assert P(0) == pytest.approx(scalar_resolvents(0.6, 2.0, t)[1], rel=1e-13)


def test_time_zero_is_identity():
    assert resolvent_S_kernel(ResolventParams(0.5, HEAT, N=5), 0.0).equals(delta(0))


def test_zero_generator_subordination():
    p = ResolventParams(0.5, ZERO, N=2)
    assert resolvent_S_by_subordination(p, 1.0)(0) == pytest.approx(1.0, abs=1e-9)
    P = integral_resolvent_P_by_subordination(p, 2.0)
    assert P.as_kernel()(0) == pytest.approx(2.0 ** -0.5 / math.gamma(0.5), rel=1e-8)


@pytest.mark.parametrize("beta", [0.4, 0.7])
def test_dual_representations_agree(frac_laplacian_generator, beta):
    p = ResolventParams(beta, frac_laplacian_generator, N=40)
    S = resolvent_S_kernel(p, 1.0)
    S2 = resolvent_S_by_subordination(p, 1.0)
    assert l1_norm(S - S2) < 1e-6
    assert np.min(S.values) >= -1e-10 and np.min(S2.values) >= -1e-10


def test_positivity_with_rho(frac_laplacian_generator):
    p = ResolventParams(0.6, frac_laplacian_generator, rho=3.0, N=40)
    assert np.min(resolvent_S_kernel(p, 0.7).values) >= -1e-10
    assert np.min(integral_resolvent_P_kernel(p, 0.7).kernel.values) >= -1e-10


def test_mass_identity_and_constants():
    p = ResolventParams(0.5, HEAT, rho=1.5, N=60)
    S = resolvent_S_kernel(p, 1.0)
    expected = mittag_leffler_scalar(0.5, 1.0, -1.5)
    assert S.mass == pytest.approx(expected, rel=1e-13)
    # applied to a constant sequence the kernel acts through its mass
    assert S.sum() == pytest.approx(expected, abs=S.tail + 1e-14)


def test_commutes_with_generator():
    S = resolvent_S_kernel(ResolventParams(0.5, HEAT, N=30), 1.0)
    pol = WindowPolicy.grow(100)
    assert convolve(S, HEAT, pol).equals(convolve(HEAT, S, pol), atol=0.0)


def test_scalar_resolvents():
    S, P = scalar_resolvents(1.0, 2.0, 0.5)
    assert S == pytest.approx(math.exp(-1.0)) and P == pytest.approx(math.exp(-1.0))
    assert scalar_resolvents(0.5, 2.0, 0.0)[0] == 1.0


@pytest.mark.parametrize("t", [0.2, 0.7, 2.0])
def test_scalar_derivative_identity(t):
    beta, rho, h = 0.6, 1.7, 1e-5
    dS = (scalar_resolvents(beta, rho, t + h)[0] - scalar_resolvents(beta, rho, t - h)[0]) / (2 * h)
    assert dS == pytest.approx(-rho * scalar_resolvents(beta, rho, t)[1], rel=1e-4)


def test_resolvent_equation(frac_laplacian_generator):
    res, _ = resolvent_equation_residual(ResolventParams(0.5, frac_laplacian_generator, N=40), 1.0)
    assert res < 1e-5
    res, _ = resolvent_equation_residual(ResolventParams(1.0, HEAT, N=40), 1.0)
    assert res < 1e-8
    res, _ = resolvent_equation_residual(ResolventParams(0.5, ZERO, N=3), 1.0)
    assert res == 0.0


def test_resolvent_equation_detects_a_wrong_order(frac_laplacian_generator):
    # kernels of order 0.5 do not satisfy the equation of order 0.6
    p = ResolventParams(0.5, frac_laplacian_generator, N=40)
    S = resolvent_S_kernel(p, 1.0)
    S_wrong = resolvent_S_kernel(ResolventParams(0.6, frac_laplacian_generator, N=40), 1.0)
    assert l1_norm(S - S_wrong) > 1e-3


def test_invalid_parameters():
    with pytest.raises(ValueError):
        ResolventParams(1.2, HEAT)
    with pytest.raises(ValueError):
        ResolventParams(0.5, HEAT, quad_tol=0.0)
    with pytest.raises(ValueError):
        resolvent_S_by_subordination(ResolventParams(1.0, HEAT), 1.0)
