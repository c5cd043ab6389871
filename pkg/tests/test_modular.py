import math

import numpy as np
import pytest

from rieszlab.convergence import ConvergenceStructure
from rieszlab.integral import SimpleFunction
from rieszlab.measure import Domain, MeasureError, MeasureSpace
from rieszlab.modular import (
    ConvexPhi,
    Modular,
    convexity_audit,
    jensen_gap,
    jensen_randomized_audit,
    modular_convergence_search,
    orlicz_membership,
)

LEB01 = MeasureSpace.lebesgue_segment(0.0, 1.0)


def lifted_tail_space():
    # weight t^-2 on [1, inf) with log windows, so power tails exhaust geometrically
    return MeasureSpace(Domain(1.0, math.inf, "log"), weight=lambda t: t**-2.0)


def test_shape_builders_and_slopes():
    sq = ConvexPhi.square()
    assert sq(np.array([-2.0, 2.0])).tolist() == [4.0, 4.0]
    assert sq.slope(2.0) == pytest.approx(2.0)
    assert sq.slope_bound(3.0) == pytest.approx(6.0)
    p3 = ConvexPhi.power(3)
    assert p3(np.array([2.0]))[0] == 8.0
    with pytest.raises(ValueError):
        ConvexPhi.power(0.5)
    with pytest.raises(ValueError):
        ConvexPhi("shifted", lambda u: u + 1.0)


def test_numeric_derivative_matches_analytic():
    sq = ConvexPhi.square()
    blind = ConvexPhi("square_blind", lambda u: u * u)
    u = np.linspace(0.1, 3.0, 17)
    assert np.allclose(blind.derivative(u), sq.derivative(u), atol=1e-5)


@pytest.mark.parametrize("phi", [ConvexPhi.square(), ConvexPhi.power(3), ConvexPhi.exp_square()])
def test_convex_shapes_pass_audit(phi):
    rep = convexity_audit(phi)
    assert rep.passed, [c.to_dict() for c in rep.clauses if not c.ok]
    assert len(rep.clauses) == 6


def test_concave_shape_fails_audit():
    rep = convexity_audit(ConvexPhi("sqrt", np.sqrt))
    assert not rep.passed
    assert not rep.clause("support_lines").ok
    assert rep.clause("support_lines").witness is not None
    assert not rep.clause("scaling_sublinear").ok


def test_jensen_gap_closed_form():
    out = jensen_gap(ConvexPhi.square(), lambda t: t, (0.0, 1.0), LEB01)
    assert out["shape_of_mean"] == pytest.approx(0.25, abs=1e-9)
    assert out["mean_of_shape"] == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert out["gap"] == pytest.approx(1.0 / 12.0, abs=1e-9)
    with pytest.raises(MeasureError):
        jensen_gap(ConvexPhi.square(), lambda t: t, (0.0, 0.5), LEB01)


def test_jensen_randomized_audit_holds():
    rep = jensen_randomized_audit(count=200, seed=7)
    assert rep.ok
    assert rep.failures == 0
    assert rep.min_gap >= -rep.tol
    assert len(rep.trials) == 200
    shapes = {t["shape"] for t in rep.trials}
    assert "square" in shapes and any(s.startswith("power_") for s in shapes)
    # same seed, same draws
    again = jensen_randomized_audit(count=200, seed=7)
    assert again.min_gap == rep.min_gap


def test_modular_values():
    rho = Modular(ConvexPhi.square(), LEB01)
    out = rho.evaluate(lambda t: t, (0.0, 1.0))
    assert out.finite
    assert out.value == pytest.approx(1.0 / 3.0, abs=1e-9)
    exact = rho.of_simple(SimpleFunction.indicator((0.0, 0.5), 3.0))
    assert exact.value == 4.5 and exact.error == 0.0


def test_modular_infinite_flag():
    haar = MeasureSpace.haar_halfline()
    rho = Modular(ConvexPhi.square(), haar)
    out = rho.evaluate(lambda t: np.ones_like(t))
    assert not out.finite
    assert out.value == math.inf
    simple = rho.of_simple(SimpleFunction.indicator((0.0, 1.0), 1.0))
    assert not simple.finite


def test_membership_split_scale_fixture():
    # sqrt(log t) against weight t^-2: the scan turns divergent at scale 1
    ms = lifted_tail_space()
    f = lambda t: np.sqrt(np.log(t))
    rep = orlicz_membership(f, ConvexPhi.exp_square(), ms, resolution=2**12)
    assert rep.classification == "finite_for_small_scales"
    assert rep.largest_finite_alpha == pytest.approx(0.5)
    assert rep.vanishing_ok
    for al, r in zip(rep.alphas, rep.rhos):
        if al < 1.0:
            assert r == pytest.approx(al**2 / (1.0 - al**2), abs=1e-6)
        else:
            assert r == math.inf


def test_membership_absolutely_finite():
    f = lambda t: np.where(t < 1.0, 1.0, 0.0)
    rep = orlicz_membership(f, ConvexPhi.square(), LEB01, a=(0.0, 1.0))
    assert rep.classification == "absolutely_finite"
    assert rep.rhos[0] == pytest.approx(16.0, abs=1e-9)


def test_membership_outside():
    ms = MeasureSpace(Domain(1.0, math.inf, "log"), weight="lebesgue")
    rep = orlicz_membership(lambda t: t, ConvexPhi.square(), ms, resolution=2**10)
    assert rep.classification == "outside"
    assert rep.largest_finite_alpha is None


def test_modular_convergence_search_scale_cutoff():
    cs = ConvergenceStructure(kind="ordinary", horizon=16, tol=5e-2)
    fseq = [(lambda n: (lambda t: np.full_like(t, 0.2)))(n) for n in range(1, 17)]
    rep = modular_convergence_search(fseq, lambda t: np.zeros_like(t), ConvexPhi.square(), LEB01, cs, (0.0, 1.0))
    assert rep.best_scale == pytest.approx(1.0)
    assert rep.solidity_ok


def test_modular_convergence_search_null_family():
    cs = ConvergenceStructure(kind="ordinary", horizon=24, tol=5e-2)
    fseq = [(lambda n: (lambda t: t / n**2))(n) for n in range(1, 25)]
    rep = modular_convergence_search(fseq, lambda t: np.zeros_like(t), ConvexPhi.square(), LEB01, cs, (0.0, 1.0))
    assert rep.best_scale == pytest.approx(4.0)
    assert rep.solidity_ok
