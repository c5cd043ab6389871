import math

import numpy as np
import pytest

from rieszlab.measure import (
    Domain,
    Interval,
    MeasureError,
    MeasureSpace,
    as_interval,
    quadrature_reference,
)


def test_interval_basics():
    iv = Interval(0.0, 2.0)
    assert iv.length == 2.0
    assert iv.intersect(Interval(1.0, 3.0)) == Interval(1.0, 2.0)
    assert iv.intersect(Interval(3.0, 4.0)) is None
    assert as_interval((0, 1)) == Interval(0.0, 1.0)
    with pytest.raises(MeasureError):
        Interval(2.0, 1.0)


def test_domain_coords_roundtrip():
    d = Domain.positive_halfline()
    ts = np.array([0.25, 1.0, 7.5])
    assert np.allclose(d.from_coord(d.to_coord(ts)), ts)
    assert d.distance(1.0, math.e) == pytest.approx(1.0)
    with pytest.raises(MeasureError):
        Domain(-1.0, 5.0, "log")


def test_closed_form_measures():
    leb = MeasureSpace.lebesgue_segment(0.0, 1.0)
    assert leb.measure((0.25, 0.75)) == 0.5
    assert leb.measure((0.3, 0.3)) == 0.0
    haar = MeasureSpace.haar_halfline()
    m = 3
    assert haar.measure((math.exp(-m), math.exp(m))) == pytest.approx(2.0 * m, abs=1e-12)
    assert haar.measure((0.0, 1.0)) == math.inf


def test_exhausting_windows():
    haar = MeasureSpace.haar_halfline()
    b2 = haar.exhausting(2)
    assert b2.lo == pytest.approx(math.exp(-2))
    assert b2.hi == pytest.approx(math.exp(2))
    leb = MeasureSpace.lebesgue_line()
    assert leb.exhausting(5) == Interval(-5.0, 5.0)


def test_grid_cells_sum_to_measure():
    haar = MeasureSpace.haar_halfline()
    iv = Interval(math.exp(-2), math.exp(2))
    t, w = haar.grid(iv, 512)
    assert t.size == 512 and np.all(np.diff(t) > 0)
    assert float(w.sum()) == pytest.approx(4.0, abs=1e-9)
    leb = MeasureSpace.lebesgue_segment(0.0, 1.0)
    _, w2 = leb.grid((0.0, 1.0), 128)
    assert float(w2.sum()) == pytest.approx(1.0, abs=1e-12)


def test_midpoint_richardson_accuracy():
    leb = MeasureSpace.lebesgue_segment(0.0, 1.0)
    lin = leb.integrate(lambda t: t, (0.0, 1.0))
    assert lin.scalar() == pytest.approx(0.5, abs=1e-13)
    quad = leb.integrate(lambda t: t * t, (0.0, 1.0))
    assert quad.scalar() == pytest.approx(1.0 / 3.0, abs=1e-10)
    assert quad.error < 1e-8


def test_break_splitting_handles_jumps():
    leb = MeasureSpace.lebesgue_segment(0.0, 2.0)
    step = lambda t: np.where(t < 1.0, 1.0, 3.0)
    res = leb.integrate(step, (0.0, 2.0), breaks=[1.0])
    assert res.scalar() == pytest.approx(4.0, abs=1e-12)


def test_vector_integrand():
    leb = MeasureSpace.lebesgue_segment(0.0, 1.0)
    res = leb.integrate(lambda t: np.stack([t, t * t], axis=-1), (0.0, 1.0))
    assert np.allclose(np.asarray(res.value), [0.5, 1.0 / 3.0], atol=1e-9)


def test_moment_kernel_mass_on_haar():
    # mass of n * t^n restricted to (0, 1) against dt/t is exactly 1
    haar = MeasureSpace.haar_halfline()
    for n in (4, 30):
        fn = lambda t, n=n: np.where(t < 1.0, n * t**n, 0.0)
        res = haar.integrate_unbounded(fn, breaks=[1.0])
        assert not res.diverged
        assert res.scalar() == pytest.approx(1.0, abs=1e-8)


def test_small_ratio_mass_closed_form():
    haar = MeasureSpace.haar_halfline()
    n, delta = 6, 2.0
    fn = lambda t: np.where(t < 1.0, n * t**n, 0.0)
    res = quadrature_reference(fn, (0.0, 1.0 / delta), haar)
    assert res.scalar() == pytest.approx(delta**-n, rel=1e-8)


def test_divergence_flag_for_haar_unit_mass():
    haar = MeasureSpace.haar_halfline()
    res = haar.integrate_unbounded(lambda t: np.ones_like(t), (0.0, 1.0))
    assert res.diverged
    assert res.error == math.inf


def test_tail_extrapolation_bounds_slow_decay():
    line = MeasureSpace.lebesgue_line()
    res = line.integrate_unbounded(lambda t: np.where(t >= 1.0, t**-2.0, 0.0), breaks=[1.0])
    assert not res.diverged
    assert abs(res.scalar() - 1.0) <= res.error
    assert res.error < 0.1


def test_exponential_tail_converges_quickly():
    line = MeasureSpace.lebesgue_line()
    res = line.integrate_unbounded(lambda t: np.where(t >= 0.0, np.exp(-np.clip(t, 0.0, 700.0)), 0.0))
    assert not res.diverged
    assert res.scalar() == pytest.approx(1.0, abs=1e-8)
    assert res.windows < 30


def test_custom_weight_measure_by_quadrature():
    dom = Domain.segment(1.0, 10.0)
    ms = MeasureSpace(dom, weight=lambda t: t**-2.0)
    assert ms.measure((1.0, 2.0)) == pytest.approx(0.5, abs=1e-9)


def test_quadrature_reference_dispatch():
    haar = MeasureSpace.haar_halfline()
    bounded = quadrature_reference(lambda t: np.ones_like(t), (1.0, math.e), haar)
    assert bounded.scalar() == pytest.approx(1.0, abs=1e-10)
    assert bounded.windows == 0
    touching = quadrature_reference(lambda t: t, (0.0, 1.0), haar)
    assert touching.windows > 0
    assert touching.scalar() == pytest.approx(1.0, abs=1e-8)


def test_outside_carrier_is_empty():
    leb = MeasureSpace.lebesgue_segment(0.0, 1.0)
    assert quadrature_reference(lambda t: t, (2.0, 3.0), leb).scalar() == 0.0
