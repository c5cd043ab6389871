import math

import numpy as np
import pytest

from rieszlab.stochastic import (
    AdaptedProcess,
    AdaptednessError,
    BrownianEnsemble,
    EnsembleError,
    isometry_check,
    ito_integrate,
    simulate_brownian,
)

GRID = np.linspace(0.0, 1.0, 257)


def ensemble(M=20_000, grid=GRID, seed=7):
    return simulate_brownian(M, grid, seed)


def test_paths_start_at_zero():
    B = ensemble(M=64)
    mat = B.paths()
    assert mat.shape == (64, 257)
    assert np.all(mat[:, 0] == 0.0)


def test_parameter_validation():
    with pytest.raises(EnsembleError):
        simulate_brownian(1, GRID, 0)
    with pytest.raises(EnsembleError):
        simulate_brownian(8, np.array([0.0, 0.1, 0.3]), 0)
    with pytest.raises(EnsembleError):
        simulate_brownian(8, np.array([0.5, 1.0, 1.5]), 0)
    with pytest.raises(EnsembleError):
        simulate_brownian(8, np.array([0.0]), 0)


def test_terminal_variance_matches_horizon():
    B = ensemble()
    v = float(np.var(B.terminal().values, ddof=1))
    assert abs(v - 1.0) <= 3.0 * math.sqrt(2.0 / B.M)


def test_disjoint_increments_uncorrelated():
    B = ensemble()
    mat = B.paths()
    a = mat[:, 64] - mat[:, 0]  # [0, 1/4]
    b = mat[:, 256] - mat[:, 128]  # [1/2, 1]
    corr = float(np.corrcoef(a, b)[0, 1])
    assert abs(corr) <= 3.0 / math.sqrt(B.M)
    # and variances track interval lengths
    assert abs(float(np.var(a, ddof=1)) - 0.25) <= 3.0 * 0.25 * math.sqrt(2.0 / B.M)


def test_seed_determinism():
    one = ensemble(M=512, seed=11).paths()
    two = ensemble(M=512, seed=11).paths()
    other = ensemble(M=512, seed=12).paths()
    assert np.array_equal(one, two)
    assert not np.array_equal(one, other)


def test_blocks_stream_in_fixed_layout():
    B = ensemble(M=2500, seed=3)
    starts = []
    for start, inc in B.iter_blocks():
        starts.append((start, inc.shape))
    assert starts == [(0, (1024, 256)), (1024, (1024, 256)), (2048, (452, 256))]


def test_constant_integrand_reproduces_terminal_exactly():
    B = ensemble(M=4096, seed=5)
    got = ito_integrate(1.0, B)
    assert np.array_equal(got.values, B.terminal().values)


def test_zero_integrand_gives_zero():
    B = ensemble(M=256, seed=2)
    assert np.all(ito_integrate(0.0, B).values == 0.0)


def test_callable_and_array_integrands_agree():
    B = ensemble(M=512, seed=9)
    ramp = lambda t: np.asarray(t, dtype=np.float64)
    a = ito_integrate(ramp, B)
    b = ito_integrate(GRID[:-1].copy(), B)
    assert np.array_equal(a.values, b.values)
    with pytest.raises(EnsembleError):
        ito_integrate(np.ones(100), B)  # wrong step count


def test_step_integrand_centered():
    B = ensemble()
    step = lambda t: np.where(np.asarray(t) < 0.5, 1.0, 2.0)
    out = ito_integrate(step, B).values
    assert abs(float(np.mean(out))) <= 3.0 * float(np.std(out, ddof=1)) / math.sqrt(B.M)


def test_refined_step_table_is_the_same_integral():
    # the same step function written on a finer partition: identical sums
    B = ensemble(M=1024, seed=21)
    t = GRID[:-1]
    coarse = np.where(t < 0.5, 1.0, 3.0)
    refined = np.where(t < 0.25, 1.0, np.where(t < 0.5, 1.0, 3.0))
    assert np.array_equal(ito_integrate(coarse, B).values, ito_integrate(refined, B).values)


def test_adapted_process_runs_and_lookahead_is_refused():
    B = ensemble(M=512, seed=13)
    sign = AdaptedProcess(lambda t, hist: np.where(hist[:, -1] >= 0.0, 1.0, -1.0))
    out = ito_integrate(sign, B)
    assert out.dim == 512 and np.all(np.isfinite(out.values))
    peek = AdaptedProcess(lambda t, hist: hist[:, -1], lookahead=1)
    with pytest.raises(AdaptednessError):
        ito_integrate(peek, B)
    with pytest.raises(EnsembleError):
        isometry_check(sign, B)


def test_isometry_constant_and_ramp():
    B = ensemble()
    one = isometry_check(lambda t: np.ones_like(np.asarray(t, dtype=float)), B)
    assert one.within and one.target == pytest.approx(1.0)
    ramp = isometry_check(lambda t: np.asarray(t, dtype=np.float64), B)
    assert ramp.within
    assert ramp.target == pytest.approx(1.0 / 3.0, abs=1e-5)
    assert ramp.mean_within


def test_isometry_zero_is_exact():
    rep = isometry_check(0.0, ensemble(M=128))
    assert rep.second_moment == 0.0 and rep.target == 0.0 and rep.gap == 0.0
    assert rep.within


def test_save_and_load_roundtrip(tmp_path):
    B = ensemble(M=16, grid=np.linspace(0.0, 2.0, 9), seed=4)
    for name in ("paths.csv", "paths.npz"):
        f = tmp_path / name
        B.save(str(f))
        times, mat = BrownianEnsemble.load_matrix(str(f))
        assert np.array_equal(times, B.grid)
        assert np.array_equal(mat, B.paths())
