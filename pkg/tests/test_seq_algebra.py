import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraclattice.seq_algebra import (
    LatticeSeq,
    WindowOverflowError,
    WindowPolicy,
    convolve,
    delta,
    exp_element,
    l1_norm,
    lp_norm,
    power,
    power_table,
    split_diagonal,
    sup_norm,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
seqs = st.builds(
    lambda off, vals: LatticeSeq(off, np.array(vals)),
    st.integers(-5, 5),
    st.lists(finite, min_size=1, max_size=8),
)
GROW = WindowPolicy.grow(1000)


def test_delta_is_the_unit():
    a = LatticeSeq.from_dict({-1: 2.0, 3: -1.0})
    assert convolve(delta(0), a, GROW).equals(a)


def test_shift_by_delta():
    a = LatticeSeq.from_dict({0: 1.0, 1: 2.0})
    b = convolve(delta(3), a, GROW)
    assert b(3) == 1.0 and b(4) == 2.0


@given(seqs, seqs)
def test_convolution_commutes(a, b):
    assert convolve(a, b, GROW).equals(convolve(b, a, GROW), atol=1e-9)


@given(seqs, seqs, seqs)
@settings(max_examples=50)
def test_convolution_associates(a, b, c):
    left = convolve(convolve(a, b, GROW), c, GROW)
    right = convolve(a, convolve(b, c, GROW), GROW)
    assert left.equals(right, atol=1e-8 * (1 + l1_norm(a) * l1_norm(b) * l1_norm(c)))


@given(seqs, seqs)
def test_young_inequality(a, b):
    assert l1_norm(convolve(a, b, GROW)) <= l1_norm(a) * l1_norm(b) * (1 + 1e-12) + 1e-12


@given(seqs, seqs)
def test_fft_path_matches_direct(a, b):
    d = convolve(a, b, GROW)
    f = convolve(a, b, GROW, method="fft")
    assert d.equals(f, atol=1e-9 * (1 + l1_norm(a) * l1_norm(b)))


def test_truncation_moves_mass_to_tail():
    a = LatticeSeq.from_dict({-3: 1.0, 0: 1.0, 3: 1.0})
    c = convolve(a, delta(0), WindowPolicy.truncate(2))
    assert c.sum() == 1.0
    assert c.tail == pytest.approx(2.0)


def test_grow_mode_refuses_oversized_support():
    a = LatticeSeq.from_dict({-5: 1.0, 5: 1.0})
    with pytest.raises(WindowOverflowError):
        convolve(a, a, WindowPolicy.grow(6))


def test_norms():
    a = LatticeSeq.from_dict({0: 3.0, 1: -4.0})
    assert l1_norm(a) == 7.0
    assert lp_norm(a, 2) == pytest.approx(5.0)
    assert sup_norm(a) == lp_norm(a, math.inf) == 4.0


def test_mass_is_multiplicative():
    a = LatticeSeq.from_dict({0: 1.0, 1: 1.0}, mass=2.0)
    assert power(a, 3, GROW).mass == 8.0


def test_split_diagonal():
    d, w = split_diagonal(LatticeSeq.from_dict({-1: 1.0, 0: -2.0, 1: 1.0}))
    assert d == -2.0 and w(0) == 0.0 and w(1) == 1.0


def test_power_table_matches_repeated_convolution():
    w = LatticeSeq.from_dict({-1: 0.5, 2: 0.25})
    P, errs = power_table(w, 6, WindowPolicy.truncate(30))
    for j in range(7):
        assert np.allclose(P[j], power(w, j, GROW).window(30), atol=1e-15)
    assert np.all(errs == 0.0)


def test_exp_of_scalar_multiple_of_delta():
    e = exp_element(delta(0) * -0.7, 2.0, 1e-15, GROW)
    assert e(0) == pytest.approx(math.exp(-1.4), rel=1e-14)


def test_exp_semigroup_property():
    b = LatticeSeq.from_dict({-1: 1.0, 0: -2.0, 1: 1.0}, mass=0.0)
    pol = WindowPolicy.truncate(60)
    lhs = exp_element(b, 1.5, 1e-15, pol)
    rhs = convolve(exp_element(b, 0.5, 1e-15, pol), exp_element(b, 1.0, 1e-15, pol), pol)
    assert l1_norm(lhs - rhs) < 1e-13


def test_exp_tail_bounds_truncation_error():
    b = LatticeSeq.from_dict({-1: 1.0, 0: -2.0, 1: 1.0}, mass=0.0)
    small = exp_element(b, 3.0, 1e-15, WindowPolicy.truncate(6))
    big = exp_element(b, 3.0, 1e-15, WindowPolicy.truncate(80))
    assert l1_norm(big.restrict(6) - small) + (1.0 - big.restrict(6).sum()) <= small.tail + 1e-14


def test_lattice_seq_validation():
    with pytest.raises(ValueError):
        LatticeSeq(0, [math.nan])
    with pytest.raises(ValueError):
        LatticeSeq(0, [1.0], tail=-1.0)
