import math

import numpy as np
import pytest

from fraclattice.kernels import (
    Family,
    InvalidSpecError,
    NAMED_FAMILIES,
    OperatorSpec,
    Sign,
    base_generator,
    base_kernel,
    fractional_kernel,
    kernel_by_fourier,
    symbol,
)
from fraclattice.seq_algebra import LatticeSeq, l1_norm


@pytest.mark.parametrize("family", [Family.DISCRETE_LAPLACIAN, Family.FORWARD_EULER,
                                    Family.BACKWARD_EULER, Family.TWO_STEP_LAPLACIAN])
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_recurrence_matches_fourier_coefficients(family, alpha):
    spec = OperatorSpec(family, alpha)
    k = fractional_kernel(spec, 8)
    for n in (-8, -3, -1, 0, 1, 2, 7):
        assert k(n) == pytest.approx(kernel_by_fourier(spec, n), abs=1e-10)


def test_laplacian_center_value():
    alpha = 0.5
    k = fractional_kernel(OperatorSpec(Family.DISCRETE_LAPLACIAN, alpha), 3)
    assert k(0) == pytest.approx(math.gamma(2 * alpha + 1) / math.gamma(alpha + 1) ** 2, rel=1e-15)


def test_laplacian_is_symmetric_with_zero_mass():
    k = fractional_kernel(OperatorSpec(Family.DISCRETE_LAPLACIAN, 0.4), 30)
    assert np.allclose(k.values, k.values[::-1], rtol=0, atol=0)
    assert k.mass == 0.0
    # the stored sum is exactly balanced by the mass beyond the window
    assert abs(k.sum()) <= k.tail


@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_tail_bound_is_sharp(alpha):
    spec = OperatorSpec(Family.DISCRETE_LAPLACIAN, alpha)
    small, big = fractional_kernel(spec, 20), fractional_kernel(spec, 20000)
    outside = l1_norm(big) - l1_norm(big.restrict(20)) + big.tail
    assert outside <= small.tail <= outside * (1 + 1e-6)


def test_euler_supports():
    fwd = fractional_kernel(OperatorSpec(Family.FORWARD_EULER, 0.5), 5)
    bwd = fractional_kernel(OperatorSpec(Family.BACKWARD_EULER, 0.5), 5)
    assert np.all(fwd.window(5)[6:] == 0) and np.all(bwd.window(5)[:5] == 0)


def test_two_step_vanishes_on_odd_sites():
    k = fractional_kernel(OperatorSpec(Family.TWO_STEP_LAPLACIAN, 0.5), 9)
    odd = np.arange(-9, 10, 2)
    assert np.all(k(odd) == 0) and np.all(k(np.arange(-8, 9, 2)) != 0)


@pytest.mark.parametrize("family", NAMED_FAMILIES)
def test_alpha_one_gives_the_base_operator(family):
    gen = fractional_kernel(OperatorSpec(family, 1.0, sign=Sign.GENERATOR), 4)
    pw = fractional_kernel(OperatorSpec(family, 1.0, sign=Sign.POWER), 4)
    assert gen.equals(base_generator(family), atol=1e-15)
    assert pw.equals(-base_generator(family), atol=1e-15)


def test_generator_form_has_nonnegative_off_diagonal():
    k = fractional_kernel(OperatorSpec(Family.DISCRETE_LAPLACIAN, 0.6, sign=Sign.GENERATOR), 20)
    off = np.delete(k.values, 20)
    assert k(0) < 0 and np.all(off >= 0)


def test_symbol_of_laplacian():
    spec = OperatorSpec(Family.DISCRETE_LAPLACIAN, 1.0)
    theta = np.linspace(-3, 3, 7)
    assert np.allclose(symbol(spec, theta), 2 - 2 * np.cos(theta))


def test_base_kernels_have_zero_mass():
    for fam in NAMED_FAMILIES:
        assert base_kernel(fam).sum() == 0.0


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5, math.nan])
def test_alpha_out_of_range(alpha):
    with pytest.raises(InvalidSpecError):
        OperatorSpec(Family.DISCRETE_LAPLACIAN, alpha)


def test_custom_family_rules():
    b = LatticeSeq.from_dict({-1: 1.0, 0: -1.0})
    with pytest.raises(InvalidSpecError):
        OperatorSpec(Family.CUSTOM)
    with pytest.raises(InvalidSpecError):
        OperatorSpec(Family.DISCRETE_LAPLACIAN, custom_kernel=b)
    spec = OperatorSpec(Family.CUSTOM, 1.0, b, Sign.GENERATOR)
    assert fractional_kernel(spec, 2).equals(b)
    with pytest.raises(InvalidSpecError):
        fractional_kernel(OperatorSpec(Family.CUSTOM, 0.5, b), 2)
