"""Grid-lattice algebra: order, join/meet, unit norm, infinity conventions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from rieszlab.lattice import (
    DimensionMismatch,
    InfiniteEntryError,
    LatticeElement,
    LatticeError,
    OrderUnit,
    OSequence,
    absolute,
    is_o_sequence,
    join,
    meet,
    order_unit_norm,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def vectors(dim=4):
    return hnp.arrays(np.float64, (dim,), elements=finite_floats).map(LatticeElement.from_values)


def test_construction_and_canonical_form():
    x = LatticeElement.from_values([1.0, -2.0, 3.5])
    assert x.dim == 3
    assert not x.has_infinite
    inf = LatticeElement(np.array([7.0, 1.0]), np.array([True, False]))
    # masked entries are canonicalized, so equality ignores the stored float
    assert inf == LatticeElement(np.array([0.0, 1.0]), np.array([True, False]))
    assert inf.entry(0) == math.inf and inf.entry(1) == 1.0


def test_rejects_bad_shapes_and_values():
    with pytest.raises(LatticeError):
        LatticeElement.from_values(np.zeros((2, 2)))
    with pytest.raises(LatticeError):
        LatticeElement.from_values([np.nan])
    with pytest.raises(LatticeError):
        LatticeElement.from_values([np.inf])
    with pytest.raises(LatticeError):
        LatticeElement.from_values(np.zeros(0))
    with pytest.raises(DimensionMismatch):
        LatticeElement.from_values([1.0]).join(LatticeElement.from_values([1.0, 2.0]))


def test_join_meet_abs_componentwise():
    x = LatticeElement.from_values([1.0, -3.0, 2.0])
    y = LatticeElement.from_values([0.0, 5.0, 2.0])
    assert join(x, y) == LatticeElement.from_values([1.0, 5.0, 2.0])
    assert meet(x, y) == LatticeElement.from_values([0.0, -3.0, 2.0])
    assert absolute(x) == LatticeElement.from_values([1.0, 3.0, 2.0])
    # |x| = x join (-x), exact doubles
    assert absolute(x) == join(x, -x)


def test_zero_times_infinity_is_zero():
    x = LatticeElement(np.array([0.0, 4.0]), np.array([True, False]))
    z = x.scale(0.0)
    assert z == LatticeElement.zeros(2)
    assert not z.has_infinite
    y = LatticeElement.from_values([0.0, 3.0])
    p = x.product(y)
    assert p.entry(0) == 0.0  # inf * 0 = 0 bit-exact
    assert p.entry(1) == 12.0


def test_infinity_arithmetic_rules():
    inf = LatticeElement.infinity(2)
    one = LatticeElement.ones(2)
    assert (inf + one).has_infinite
    assert inf.join(one) == inf
    assert inf.meet(one) == one
    assert one.le(inf) and not inf.le(one)
    assert inf.scale(2.0) == inf
    with pytest.raises(InfiniteEntryError):
        -inf
    with pytest.raises(InfiniteEntryError):
        one - inf
    with pytest.raises(InfiniteEntryError):
        inf.scale(-1.0)
    with pytest.raises(InfiniteEntryError):
        inf.product(LatticeElement.from_values([-1.0, 1.0]))


def test_order_unit_norm_examples():
    e = OrderUnit.ones(2)
    x = LatticeElement.from_values([3.0, -4.0])
    assert order_unit_norm(x, e) == 4.0
    e2 = OrderUnit(LatticeElement.from_values([1.0, 8.0]))
    assert order_unit_norm(x, e2) == 3.0
    inf = LatticeElement.infinity(2)
    assert order_unit_norm(inf, e) == math.inf
    with pytest.raises(LatticeError):
        OrderUnit(LatticeElement.from_values([1.0, 0.0]))


@given(vectors(), vectors())
def test_norm_of_scaled_unit_and_monotonicity(x, y):
    e = OrderUnit.ones(4)
    # |alpha e| has norm |alpha|
    assert order_unit_norm(LatticeElement.from_scalar(2.5, 4), e) == 2.5
    small, big = meet(x.abs(), y.abs()), join(x.abs(), y.abs())
    assert order_unit_norm(small, e) <= order_unit_norm(big, e) + 1e-12


@given(vectors())
def test_norm_bound_equivalence(x):
    """|x| <= alpha e iff the unit norm is <= alpha, and |x| <= norm * e."""
    e = OrderUnit.ones(4)
    nrm = order_unit_norm(x, e)
    assert x.abs().le(e.element.scale(nrm + 1e-9))
    alpha = nrm * 0.99 - 1e-9
    if alpha > 0:
        assert not x.abs().le(e.element.scale(alpha))


@given(vectors(), vectors(), vectors())
@settings(max_examples=200)
def test_join_is_nonexpansive(x, y, z):
    """|x v z - y v z| <= |x - y| entrywise."""
    lhs = (join(x, z) - join(y, z)).abs()
    rhs = (x - y).abs()
    assert lhs.le(rhs)


@given(vectors(), vectors())
def test_lattice_identities(x, y):
    assert join(x, y) + meet(x, y) == x + y
    assert join(x, y).le(x.join(y).join(x))
    assert meet(x, y).le(x)
    assert x.le(join(x, y))


def test_o_sequence_harmonic_accepts():
    u = LatticeElement.ones(3)
    seq = OSequence.harmonic(u, 10_000)
    v = is_o_sequence(seq, tol=1e-3, stride=37)
    assert v.ok and v.first_violation is None
    assert v.final_max == pytest.approx(1e-4)


def test_o_sequence_alternating_rejects_at_two():
    u = LatticeElement.ones(2)
    seq = OSequence(lambda l: u.scale(2.0 if l % 2 == 0 else 1.0), 50)
    v = is_o_sequence(seq, tol=1e-3)
    assert not v.ok
    assert v.first_violation == 2


def test_o_sequence_negative_term_rejected():
    u = LatticeElement.ones(1)
    seq = OSequence(lambda l: u.scale(1.0 / l if l != 5 else -0.1), 20)
    v = is_o_sequence(seq, tol=1.0)
    assert not v.ok and v.first_violation == 5
