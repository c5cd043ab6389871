"""End-to-end acceptance checks.

Each test exercises one headline behavior at its stated tolerance and time
budget and prints a single verdict line, so a plain run reads as a ten-line
scorecard.  Tolerances here are contractual: do not loosen them to make a
failing build pass.
"""

import json
import math
import time

import numpy as np

from rieszlab import cli, fixtures
from rieszlab.axioms import axiom_audit, standard_bank
from rieszlab.convergence import ConvergenceStructure, FilterSpec
from rieszlab.integral import integrate, vitali_audit
from rieszlab.measure import Interval, MeasureSpace, quadrature_reference
from rieszlab.modular import ConvexPhi, Modular, jensen_gap, jensen_randomized_audit
from rieszlab.operators import (
    mellin_apply,
    moment_kernel,
    operator_convergence_experiment,
    shaped_deviation_integral,
    singularity_audit,
)
from rieszlab.stochastic import isometry_check, ito_integrate, simulate_brownian


def _ordinary(horizon, tol=5e-2):
    return ConvergenceStructure(kind="ordinary", horizon=horizon, tol=tol)


def _verdict(capsys, label, ok, elapsed, budget, detail):
    tag = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"\n{tag}  {label}: {detail} ({elapsed:.2f}s, budget {budget:g}s)")


def test_01_kernel_tail_law_and_unit_mass(capsys):
    t0 = time.perf_counter()
    cert = singularity_audit(moment_kernel(1), (2.0,), list(range(1, 31)), _ordinary(30), resolution=2**12)
    elapsed = time.perf_counter() - t0
    masses = np.asarray(cert.masses)
    tails = np.asarray(cert.tails[0])
    refs = 2.0 ** -np.arange(1, 31)
    mass_err = float(np.abs(masses - 1.0).max())
    tail_err = float(np.abs(tails - refs).max())
    ok = cert.passed and mass_err <= 1e-8 and tail_err <= 1e-8 and elapsed < 1.0
    _verdict(capsys, "01 kernel tail law and unit mass", ok, elapsed, 1.0,
             f"worst tail error {tail_err:.2e}, worst mass error {mass_err:.2e}")
    assert cert.passed, cert.failed_clause
    assert tail_err <= 1e-8
    assert mass_err <= 1e-8
    assert elapsed < 1.0


def test_02_constants_reproduced(capsys):
    mf = moment_kernel(1)
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(1, 31):
        for u in (1.0, 2.0, 1.375):
            const = lambda t, u=u: np.full_like(np.asarray(t, dtype=np.float64), u)
            for s in (0.3, 1.0, 5.0):
                worst = max(worst, abs(float(mellin_apply(mf, const, s, n=n)) - u) / abs(u))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 1.0
    _verdict(capsys, "02 constants reproduced, n=1..30", ok, elapsed, 1.0,
             f"worst relative error {worst:.2e}")
    assert worst <= 1e-8
    assert elapsed < 1.0


def test_03_shaped_deviation_law_and_scale_search(capsys):
    mf = moment_kernel(1)
    phi = ConvexPhi.square()
    ramp = fixtures.get("ramp-signal").build()
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(1, 51):
        rho = float(shaped_deviation_integral(mf, ramp["fn"], phi, n, (0.0, 1.0), sigma_breaks=[0.0]))
        worst = max(worst, abs(rho - 1.0 / (2.0 * (n + 1.0))))
    report = operator_convergence_experiment(
        mf, ramp["fn"], "modular", _ordinary(24), list(range(1, 25)),
        ramp["support"], probe=(ramp["support"][0], 4096.0),
        modular=Modular(phi, MeasureSpace.haar_halfline()),
        f_breaks=list(ramp["breaks"]), resolution=2**12,
    )
    elapsed = time.perf_counter() - t0
    best = report.extras["search"]["best_scale"]
    solid = bool(report.extras["search"]["solidity_ok"])
    ok = worst <= 1e-6 and best is not None and best >= 1.0 and solid and elapsed < 10.0
    _verdict(capsys, "03 shaped deviation law 1/(2(n+1)), n=1..50", ok, elapsed, 10.0,
             f"worst error {worst:.2e}, best scale {best}, solidity {solid}")
    assert worst <= 1e-6
    assert best is not None and best >= 1.0
    assert solid
    assert elapsed < 10.0


def test_04_tent_sup_error_decay(capsys):
    tent = fixtures.get("tent-signal").build()
    t0 = time.perf_counter()
    report = operator_convergence_experiment(
        moment_kernel(1), tent["fn"], "uniform", _ordinary(200), list(range(1, 201)),
        tent["support"], f_breaks=list(tent["breaks"]), resolution=2**14,
    )
    elapsed = time.perf_counter() - t0
    errs = np.asarray(report.series, dtype=np.float64)
    decreasing = bool(report.extras["strictly_decreasing_from_second"])
    ok = report.ok and decreasing and errs[-1] < 1e-2 and elapsed < 30.0
    _verdict(capsys, "04 tent sup-error decay to n=200", ok, elapsed, 30.0,
             f"final error {errs[-1]:.2e}, strictly decreasing from n=2: {decreasing}")
    assert report.ok, report.verdict.to_dict()
    assert decreasing
    assert errs[-1] < 1e-2
    assert elapsed < 30.0


def test_05_convergence_axiom_suite(capsys):
    horizon = 50_000
    t0 = time.perf_counter()
    bank = standard_bank(horizon)
    structures = {
        "ordinary": ConvergenceStructure("ordinary", horizon=horizon, tol=5e-3),
        "order": ConvergenceStructure("order", horizon=horizon, tol=5e-3),
        "cesaro": ConvergenceStructure("cesaro", horizon=horizon, tol=5e-3),
        "almost": ConvergenceStructure("almost", horizon=horizon, tol=5e-3),
        "density": ConvergenceStructure("filter", horizon=horizon, tol=5e-3, filter=FilterSpec.density(0.99)),
    }
    reports = {name: axiom_audit(cs, bank) for name, cs in structures.items()}
    broken = axiom_audit(ConvergenceStructure("broken", horizon=horizon, tol=5e-3), bank)
    elapsed = time.perf_counter() - t0
    failed = {name: [c.clause for c in rep.clauses if not c.passed]
              for name, rep in reports.items() if not rep.passed}
    witnesses = [c.witness for c in broken.clauses if not c.passed and c.witness]
    ok = not failed and len(bank) >= 30 and not broken.passed and bool(witnesses) and elapsed < 10.0
    _verdict(capsys, "05 axiom suite on the standard bank", ok, elapsed, 10.0,
             f"{len(structures)} structures clean on {len(bank)} sequences, broken control fails with witness")
    assert len(bank) >= 30
    assert not failed, failed
    assert not broken.passed
    assert witnesses
    assert elapsed < 10.0


def test_06_ladder_integrals_match_quadrature(capsys):
    cs = _ordinary(16, tol=1e-3)
    t0 = time.perf_counter()
    rows = []
    for fx in fixtures.integrand_fixtures():
        p = fx.build()
        da, db = fixtures.integrand_ladders(p)
        ia = integrate(p["fn"], p["support"], p["space"], cs, support=p["support"], deltas=da)
        ib = integrate(p["fn"], p["support"], p["space"], cs, support=p["support"], deltas=db)
        q = quadrature_reference(p["fn"], p["support"], p["space"], breaks=p["breaks"]).value
        va, vb = float(ia.values[0]), float(ib.values[0])
        rows.append((fx.id, abs(va - q), abs(va - vb)))
    elapsed = time.perf_counter() - t0
    worst_q = max(r[1] for r in rows)
    worst_pair = max(r[2] for r in rows)
    ok = len(rows) >= 20 and worst_q <= 1e-4 and worst_pair <= 2e-4 and elapsed < 30.0
    _verdict(capsys, "06 ladder integrals on the 20-function suite", ok, elapsed, 30.0,
             f"worst |ladder-quadrature| {worst_q:.2e}, worst ladder gap {worst_pair:.2e}")
    assert len(rows) >= 20
    bad_q = [r for r in rows if r[1] > 1e-4]
    assert not bad_q, bad_q
    bad_pair = [r for r in rows if r[2] > 2e-4]
    assert not bad_pair, bad_pair
    assert elapsed < 30.0


def test_07_limit_interchange_discrimination(capsys):
    n_max = 1000
    ms = MeasureSpace.lebesgue_segment(0.0, 1.0)
    cs = ConvergenceStructure(kind="ordinary", horizon=n_max, tol=5e-3)
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=np.float64))
    plateau_fx = fixtures.get("shrinking-plateau").build()
    spike_fx = fixtures.get("mass-spike").build()
    t0 = time.perf_counter()
    plateau = [plateau_fx["term"](n) for n in range(1, n_max + 1)]
    spike = [spike_fx["term"](n) for n in range(1, n_max + 1)]
    probes = [Interval(0.0, 1.0 / n) for n in (2**k for k in range(0, int(math.log2(n_max)) + 1))]
    prep = vitali_audit(plateau, zero, (0.0, 1.0), ms, cs)
    srep = vitali_audit(spike, zero, (0.0, 1.0), ms, cs, probes=probes)
    elapsed = time.perf_counter() - t0
    spike_mass_err = float(np.max(np.abs(srep.l1_values - 1.0)))
    ok = (prep.premises_hold and prep.l1_verdict.ok
          and not srep.eac.passed and srep.eac.failing_clause == "small_sets"
          and spike_mass_err <= 1e-6 and elapsed < 5.0)
    _verdict(capsys, "07 limit interchange discrimination", ok, elapsed, 5.0,
             f"plateau vanishes in L1, spike fails {srep.eac.failing_clause}, "
             f"worst spike mass error {spike_mass_err:.2e} over {n_max} terms")
    assert prep.premises_hold
    assert prep.l1_verdict.ok
    assert not srep.eac.passed
    assert srep.eac.failing_clause == "small_sets"
    assert spike_mass_err <= 1e-6
    assert elapsed < 5.0


def test_08_convexity_gap_bounds(capsys):
    ms = MeasureSpace.lebesgue_segment(0.0, 1.0)
    t0 = time.perf_counter()
    closed = jensen_gap(ConvexPhi.square(), lambda t: np.asarray(t, dtype=np.float64), (0.0, 1.0), ms)
    audit = jensen_randomized_audit(count=1000, seed=0)
    elapsed = time.perf_counter() - t0
    closed_err = abs(closed["gap"] - 1.0 / 12.0)
    ok = audit.ok and audit.min_gap >= -1e-6 and closed_err <= 1e-6 and elapsed < 10.0
    _verdict(capsys, "08 convexity gap bounds", ok, elapsed, 10.0,
             f"min gap {audit.min_gap:.2e} over {audit.count} random triples, "
             f"closed-form error {closed_err:.2e}")
    assert audit.ok
    assert audit.min_gap >= -1e-6
    assert closed_err <= 1e-6
    assert elapsed < 10.0


def test_09_brownian_isometry_and_terminal_identity(capsys):
    paths, steps = 100_000, 2048
    grid = np.linspace(0.0, 1.0, steps + 1)
    t0 = time.perf_counter()
    ens = simulate_brownian(paths, grid, seed=7)
    checks = {}
    for fid in ("flat-volatility", "ramp-volatility", "two-level-volatility"):
        p = fixtures.get(fid).build()
        checks[fid] = isometry_check(p["profile"], ens)
    identity_exact = bool(np.array_equal(ito_integrate(1.0, ens).values, ens.terminal().values))
    elapsed = time.perf_counter() - t0
    all_within = all(rep.within for rep in checks.values())
    ok = all_within and identity_exact and elapsed < 30.0
    gaps = ", ".join(f"{fid.split('-')[0]} {abs(rep.gap):.2e} of {rep.band:.2e}" for fid, rep in checks.items())
    _verdict(capsys, "09 stochastic isometry and terminal identity", ok, elapsed, 30.0,
             f"{paths} paths: {gaps}; constant-one integral matches terminal exactly: {identity_exact}")
    for fid, rep in checks.items():
        assert rep.within, (fid, rep.gap, rep.band)
    assert identity_exact
    assert elapsed < 30.0


def test_10_reports_are_deterministic(tmp_path, capsys):
    t0 = time.perf_counter()
    diffs = []
    for experiment, params in (("ito", {"paths": 2048, "steps": 128}), ("jensen", {"count": 300})):
        csvs, jsons = [], []
        for tag in ("a", "b"):
            out = tmp_path / f"{experiment}-{tag}"
            cfg = tmp_path / f"{experiment}-{tag}.json"
            cfg.write_text(json.dumps({"experiment": experiment, "seed": 11, "params": params}))
            assert cli.main(["run", str(cfg), "--out-dir", str(out)]) == 0
            csvs.append((out / f"{experiment}.csv").read_bytes())
            jsons.append(json.loads((out / f"{experiment}.json").read_text()))
        identical = csvs[0] == csvs[1]
        fields = {k for k in set(jsons[0]) | set(jsons[1]) if jsons[0].get(k) != jsons[1].get(k)}
        diffs.append((experiment, identical, fields))
    elapsed = time.perf_counter() - t0
    ok = all(identical and fields <= {"generated_at"} for _, identical, fields in diffs)
    _verdict(capsys, "10 reports are deterministic", ok, elapsed, 30.0,
             "; ".join(f"{e}: csv byte-identical {i}, json differs only in {sorted(f) or 'nothing'}"
                       for e, i, f in diffs))
    for experiment, identical, fields in diffs:
        assert identical, experiment
        assert fields <= {"generated_at"}, (experiment, fields)
    assert elapsed < 30.0
