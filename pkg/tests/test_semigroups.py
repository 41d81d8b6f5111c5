import math

import numpy as np
import pytest
from scipy.special import ive

from fraclattice.kernels import NAMED_FAMILIES, Family, OperatorSpec, base_generator
from fraclattice.semigroups import (
    CrossCheckError,
    Verdict,
    constant_preservation,
    markov_check,
    scaled_bessel_i,
    semigroup_kernel_closed,
    semigroup_kernel_general,
    subordinated_semigroup_kernel,
)
from fraclattice.seq_algebra import LatticeSeq, WindowPolicy, l1_norm


@pytest.mark.parametrize("family", NAMED_FAMILIES)
@pytest.mark.parametrize("t", [0.5, 2.0])
def test_closed_forms_match_the_exponential(family, t):
    closed = semigroup_kernel_closed(family, t, 30)
    expo = semigroup_kernel_general(base_generator(family), t, 1e-15, WindowPolicy.truncate(30))
    assert l1_norm(closed - expo) <= max(closed.tail + expo.tail, 1e-13)


def test_heat_kernel_values():
    k = semigroup_kernel_closed(Family.DISCRETE_LAPLACIAN, 1.0, 10)
    assert k(3) == pytest.approx(ive(3, 2.0), rel=1e-14)


def test_transport_directions():
    fwd = semigroup_kernel_closed(Family.FORWARD_EULER, 1.0, 5)
    bwd = semigroup_kernel_closed(Family.BACKWARD_EULER, 1.0, 5)
    assert fwd(-2) == pytest.approx(math.exp(-1) / 2) and fwd(2) == 0.0
    assert bwd(2) == pytest.approx(math.exp(-1) / 2) and bwd(-2) == 0.0


def test_scaled_bessel_far_field():
    x = np.array([1e8, 1e9, 1e12])
    # e^{-x} I_0(x) ~ (2 pi x)^(-1/2) (1 + 1/(8x))
    assert np.allclose(scaled_bessel_i(0, x), (1 + 1 / (8 * x)) / np.sqrt(2 * np.pi * x), rtol=1e-12)


@pytest.mark.parametrize("family", NAMED_FAMILIES)
def test_closed_forms_are_markov(family):
    report = markov_check(semigroup_kernel_closed(family, 1.0, 60), 1e-9)
    assert report.verdict is Verdict.MARKOVIAN
    assert report.min_entry >= 0


def test_non_markov_generator_is_flagged():
    b = LatticeSeq.from_dict({-1: 1.0, 0: -1.5, 1: 1.0})
    k = semigroup_kernel_general(b, 1.0, 1e-15, WindowPolicy.truncate(40))
    report = markov_check(k, 1e-9)
    assert report.verdict is Verdict.MASS
    assert report.mass_defect == pytest.approx(math.expm1(0.5), rel=1e-12)
    assert not constant_preservation(k, 1e-9)


def test_negative_entries_are_flagged():
    report = markov_check(LatticeSeq.from_dict({0: 1.2, 1: -0.2}), 1e-9)
    assert report.verdict is Verdict.NEGATIVE


@pytest.mark.parametrize("alpha", [0.4, 0.8])
def test_subordination_agrees_with_exponential(alpha):
    res = subordinated_semigroup_kernel(OperatorSpec(Family.DISCRETE_LAPLACIAN, alpha), 1.0,
                                        quad_tol=1e-8, N=20)
    assert res.l1_difference < 1e-6
    assert res.mass_defect < 1e-6
    assert markov_check(res.kernel, 1e-6).verdict is Verdict.MARKOVIAN


def test_cross_check_failure_is_raised():
    with pytest.raises(CrossCheckError):
        subordinated_semigroup_kernel(OperatorSpec(Family.DISCRETE_LAPLACIAN, 0.5), 1.0,
                                      N=10, work_N=10, check_tol=1e-12)


def test_subordination_close_to_the_classical_exponent():
    res = subordinated_semigroup_kernel(OperatorSpec(Family.DISCRETE_LAPLACIAN, 0.9), 1.0,
                                        quad_tol=1e-9, N=20)
    assert res.l1_difference < 1e-6 and res.mass_defect < 1e-9
