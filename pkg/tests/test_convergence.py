"""Convergence structures: verdicts, averages, filters, upper limits."""

import numpy as np
import pytest

from rieszlab.convergence import (
    ConvergenceError,
    ConvergenceStructure,
    FilterSpec,
    InvalidFilterError,
    LatticeSequence,
    UndefinedAverageError,
    almost_limit,
    cesaro_limit,
    estimate_limit,
    filter_limsup,
    limsup,
    limsup_restriction_gap,
    norm_filter_limsup,
    order_limsup,
    structure_estimate,
)
from rieszlab.lattice import LatticeElement


def seq_from(fn, n, dim=1):
    return LatticeSequence.from_generator(fn, n)


def test_cesaro_alternating_signs():
    n = 10_000
    seq = LatticeSequence.from_reals([(-1.0) ** k for k in range(1, n + 1)])
    est = cesaro_limit(seq, tol=1.0 / n * 10)
    assert abs(est.value.values[0]) <= 1.0 / n
    assert est.verdict.ok


def test_cesaro_even_indicator_half():
    n = 10_000
    seq = LatticeSequence.from_reals([1.0 if k % 2 == 0 else 0.0 for k in range(1, n + 1)])
    est = cesaro_limit(seq, tol=1e-2)
    assert est.value.values[0] == pytest.approx(0.5, abs=1.0 / n)
    assert est.verdict.ok


def test_cesaro_divergent_is_not_true():
    n = 2_000
    seq = LatticeSequence.from_reals(np.arange(1.0, n + 1.0))
    est = cesaro_limit(seq, tol=1e-3)
    assert est.verdict.status == "false"


def test_cesaro_rejects_infinite_terms():
    with pytest.raises(UndefinedAverageError):
        LatticeSequence(np.array([[1.0], [np.inf]]))


def test_almost_periodic_half():
    n = 5_000
    seq = LatticeSequence.from_reals([1.0 if k % 2 == 1 else 0.0 for k in range(1, n + 1)])
    est = almost_limit(seq, offsets=n // 10, tol=1e-2)
    window = n - n // 10
    assert est.value.values[0] == pytest.approx(0.5, abs=1e-6)
    assert est.sup_deviation <= 1.0 / window + 1e-12
    assert est.verdict.ok


def test_almost_divergent_not_true():
    n = 1_000
    seq = LatticeSequence.from_reals(np.arange(1.0, n + 1.0))
    est = almost_limit(seq, offsets=100, tol=1e-3)
    assert est.verdict.status in ("false", "inconclusive")


def test_order_limsup_oscillation_and_decay():
    n = 1_000  # even horizon so the alternating tail ends on +u
    u = np.array([1.0, 2.0])
    seq = LatticeSequence(np.array([((-1.0) ** k) * u for k in range(1, n + 1)]))
    res = order_limsup(seq)
    assert np.allclose(res.value.values, u)
    assert res.tail_bias_caveat  # keeps oscillating
    decay = LatticeSequence(np.array([u / k for k in range(1, n + 1)]))
    res2 = order_limsup(decay)
    assert np.allclose(res2.value.values, u / n)
    assert not res2.tail_bias_caveat


def test_order_limsup_shifted_oscillation():
    n = 500 * 2
    u, v = np.array([2.0, 1.0]), np.array([1.0, 0.5])
    seq = LatticeSequence(np.array([u + ((-1.0) ** k) * v for k in range(1, n + 1)]))
    res = order_limsup(seq)
    # brute-force nested min-max oracle, frozen from a 6-term hand check
    brute = np.min(
        np.array([np.max(seq.matrix[m:], axis=0) for m in range(n)]),
        axis=0,
    )
    assert np.allclose(res.value.values, brute)
    assert np.allclose(res.value.values, u + v)


def test_filter_limsup_cofinite_equals_order():
    n = 200
    seq = LatticeSequence.from_reals([(-1.0) ** k for k in range(1, n + 1)])
    a = filter_limsup(seq, FilterSpec.cofinite()).value
    b = order_limsup(seq).value
    assert a == b
    assert a.values[0] == 1.0


def test_filter_limsup_density_squares():
    n = 1_000_000
    vals = np.zeros(n)
    squares = np.arange(1, int(np.sqrt(n)) + 1) ** 2
    vals[squares - 1] = 1.0
    seq = LatticeSequence(vals[:, None])
    res = filter_limsup(seq, FilterSpec.density(0.99))
    assert res.value.values[0] == 0.0


def test_filter_limsup_explicit_family():
    n = 100
    seq = LatticeSequence.from_reals([1.0 / k for k in range(1, n + 1)])
    fam = FilterSpec.explicit([range(50, 101), range(60, 101), range(50, 90)])
    res = filter_limsup(seq, fam)
    assert res.value.values[0] == pytest.approx(1.0 / 60)
    with pytest.raises(InvalidFilterError):
        filter_limsup(seq, FilterSpec.explicit([(1, 2), (3, 4)]))


def test_norm_filter_limsup_scalarizes():
    n = 400
    seq = LatticeSequence(np.array([[1.0 / k, (-1.0) ** k * 0.5] for k in range(1, n + 1)]))
    val = norm_filter_limsup(seq, FilterSpec.cofinite())
    assert val == pytest.approx(0.5)


def test_estimate_limit_ordinary_true():
    n = 1_000
    x = np.array([2.0, -1.0])
    u = np.array([1.0, 1.0])
    seq = LatticeSequence(np.array([x + u / k for k in range(1, n + 1)]))
    cs = ConvergenceStructure("ordinary", horizon=n, tol=1e-2)
    v = estimate_limit(seq, cs, LatticeElement.from_values(x))
    assert v.ok


def test_estimate_limit_density_vs_cofinite_on_squares():
    n = 1_000_000
    vals = np.zeros(n)
    squares = np.arange(1, int(np.sqrt(n)) + 1) ** 2
    vals[squares - 1] = 1.0
    seq = LatticeSequence(vals[:, None])
    zero = LatticeElement.zeros(1)
    dens = ConvergenceStructure("filter", horizon=n, tol=1e-3, filter=FilterSpec.density(0.99))
    cof = ConvergenceStructure("filter", horizon=n, tol=1e-3, filter=FilterSpec.cofinite())
    assert estimate_limit(seq, dens, zero).ok
    assert estimate_limit(seq, cof, zero).status == "false"


def test_estimate_limit_order_kind_with_regulator():
    n = 2_000
    seq = LatticeSequence.from_reals([3.0 + 1.0 / k for k in range(1, n + 1)])
    cs = ConvergenceStructure("order", horizon=n, tol=1e-2)
    assert estimate_limit(seq, cs, LatticeElement.from_scalar(3.0)).ok
    assert estimate_limit(seq, cs, LatticeElement.from_scalar(3.2)).status == "false"


def test_estimate_limit_almost_and_cesaro_oscillation():
    n = 5_000
    seq = LatticeSequence.from_reals([(-1.0) ** k for k in range(1, n + 1)])
    half = LatticeElement.from_scalar(0.0)
    alm = ConvergenceStructure("almost", horizon=n, tol=1e-2)
    ces = ConvergenceStructure("cesaro", horizon=n, tol=1e-2)
    assert estimate_limit(seq, alm, half).ok
    assert estimate_limit(seq, ces, half).ok
    ordn = ConvergenceStructure("ordinary", horizon=n, tol=1e-2)
    assert estimate_limit(seq, ordn, half).status == "false"


def test_estimate_limit_inconclusive_when_still_shrinking():
    n = 200
    # decays too slowly to pass tol=1e-3 by n=200, but keeps shrinking
    seq = LatticeSequence.from_reals([1.0 / k for k in range(1, n + 1)])
    cs = ConvergenceStructure("ordinary", horizon=n, tol=1e-3)
    v = estimate_limit(seq, cs, LatticeElement.zeros(1))
    assert v.status == "inconclusive"


def test_structure_estimate_matches_known_limits():
    n = 4_000
    x = np.array([1.5, -0.5])
    seq = LatticeSequence(np.array([x + np.array([1.0, -1.0]) / k for k in range(1, n + 1)]))
    for kind in ("ordinary", "order", "relative_uniform", "cesaro", "almost"):
        cs = ConvergenceStructure(kind, horizon=n, tol=1e-2)
        est = structure_estimate(seq, cs)
        assert est.verdict.ok, kind
        assert np.allclose(est.value.values, x, atol=1e-2), kind
    broken = structure_estimate(seq, ConvergenceStructure("broken", horizon=n, tol=1e-2))
    assert np.allclose(broken.value.values, -x, atol=1e-2)


def test_finite_modification_invariance():
    n = 1_000
    base = np.array([5.0 + 2.0 ** (-k) for k in range(1, n + 1)])
    bent = base.copy()
    bent[:10] = 99.0
    cand = LatticeElement.from_scalar(5.0)
    for kind in ("ordinary", "order"):
        cs = ConvergenceStructure(kind, horizon=n, tol=1e-2)
        assert estimate_limit(LatticeSequence.from_reals(base), cs, cand).ok
        assert estimate_limit(LatticeSequence.from_reals(bent), cs, cand).ok


def test_limsup_restriction_gap_density_one_subset():
    n = 10_000
    seq = LatticeSequence.from_reals([2.0 + 1.0 / k for k in range(1, n + 1)])
    cs = ConvergenceStructure("filter", horizon=n, tol=1e-3, filter=FilterSpec.density(0.99))
    squares = np.arange(1, int(np.sqrt(n)) + 1) ** 2
    mask = np.ones(n, dtype=bool)
    mask[squares - 1] = False  # density-one complement of the squares
    out = limsup_restriction_gap(seq, cs, mask)
    assert out["gap"] <= 1e-3


def test_limsup_dispatch_cesaro_and_almost():
    n = 2_000
    seq = LatticeSequence.from_reals([(-1.0) ** k for k in range(1, n + 1)])
    ces = ConvergenceStructure("cesaro", horizon=n, tol=1e-2)
    alm = ConvergenceStructure("almost", horizon=n, tol=1e-2)
    assert abs(limsup(seq, ces).value.values[0]) <= 1e-3
    assert abs(limsup(seq, alm).value.values[0]) <= 1e-2


def test_structure_validation_errors():
    with pytest.raises(ConvergenceError):
        ConvergenceStructure("nope", horizon=100)
    with pytest.raises(ConvergenceError):
        ConvergenceStructure("ordinary", horizon=2)
    with pytest.raises(ConvergenceError):
        ConvergenceStructure("ordinary", horizon=100, tol=0.0)
    with pytest.raises(ConvergenceError):
        ConvergenceStructure("ordinary", horizon=100, filter=FilterSpec.cofinite())
    with pytest.raises(InvalidFilterError):
        FilterSpec.density(0.3)
