"""Command-line front end.

Three subcommands:

  run <config.json>   execute one experiment, write a JSON report plus a
                      CSV table (and a PNG when the report carries plot
                      series) into the output directory
  list-fixtures       print the fixture catalog, optionally per module
  plot-data <report>  re-shape a report's plot series into a long-format
                      CSV (series, x, y) on stdout or into a file

Exit codes: 0 when every audited invariant passed, 1 when some failed
(the failing clauses are named on stderr), 2 for configuration, schema,
or parse errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import fixtures, reports
from .axioms import axiom_audit, standard_bank
from .convergence import ConvergenceStructure, FilterSpec
from .integral import SimpleFunction, integrate, vitali_audit
from .measure import Interval, MeasureSpace, quadrature_reference
from .modular import ConvexPhi, Modular, jensen_gap, jensen_randomized_audit
from .operators import (
    KernelFamily,
    UncertifiedKernelError,
    mellin_apply,
    moment_kernel,
    operator_convergence_experiment,
    shaped_deviation_integral,
    singularity_audit,
)
from .stochastic import GENERATOR_NOTE, ito_integrate, isometry_check, simulate_brownian


class SchemaError(ValueError):
    pass


def _ordinary(horizon: int, tol: float = 5e-2) -> ConvergenceStructure:
    return ConvergenceStructure(kind="ordinary", horizon=horizon, tol=tol)


# ---------------------------------------------------------------------------
# experiment runners; each returns a reports.report_payload dict


def _run_moment_tail(ctx: dict) -> dict:
    h, tol = ctx["horizon"], ctx["tol"]
    idx = list(range(1, h + 1))
    cert = singularity_audit(moment_kernel(1), (ctx["delta"],), idx, _ordinary(max(8, h)), resolution=ctx["resolution"])
    refs = float(ctx["delta"]) ** -np.arange(1, h + 1)
    masses = np.asarray(cert.masses, dtype=np.float64)
    tails = np.asarray(cert.tails[0], dtype=np.float64)
    mass_err = np.abs(masses - 1.0)
    tail_err = np.abs(tails - refs)
    rows = [
        (n, masses[i], mass_err[i], tails[i], refs[i], tail_err[i])
        for i, n in enumerate(idx)
    ]
    passed = bool(cert.passed and mass_err.max() <= tol and tail_err.max() <= tol)
    verdicts = {
        "certificate_passed": bool(cert.passed),
        "failed_clause": cert.failed_clause,
        "mass_within_tolerance": bool(mass_err.max() <= tol),
        "tail_law_within_tolerance": bool(tail_err.max() <= tol),
        "clauses": {c.name: bool(c.ok) for c in cert.clauses},
    }
    oracles = [
        {"name": "unit-mass", "provenance": "closed-form", "detail": "every member integrates to one against the scale-free measure"},
        {"name": "tail-geometric-law", "provenance": "closed-form", "detail": "mass beyond distance d falls off as d^-n"},
        {"name": "member-masses", "provenance": "quadrature", "detail": "midpoint rule with Richardson refinement on log-spaced shells"},
    ]
    plot = [
        {"series": "tail_mass", "x": idx, "y": [float(v) for v in tails]},
        {"series": "tail_reference", "x": idx, "y": [float(v) for v in refs]},
    ]
    return reports.report_payload(
        "moment_tail", _params(ctx), passed, verdicts, oracles,
        ("n", "mass", "mass_abs_error", "tail_mass", "tail_reference", "tail_abs_error"),
        rows, plot)


def _run_reproduction(ctx: dict) -> dict:
    h, tol = ctx["horizon"], ctx["tol"]
    palette = tuple(float(u) for u in ctx["palette"])
    probes = tuple(float(s) for s in ctx["s_probes"])
    rows = []
    worst = 0.0
    for n in range(1, h + 1):
        mf = moment_kernel(1)
        err = 0.0
        for u in palette:
            const = lambda t, u=u: np.full_like(np.asarray(t, dtype=np.float64), u)
            for s in probes:
                err = max(err, abs(float(mellin_apply(mf, const, s, n=n)) - u) / max(1.0, u))
        rows.append((n, err))
        worst = max(worst, err)
    passed = worst <= tol
    verdicts = {"palette_reproduced": bool(passed), "worst_relative_error": worst}
    oracles = [{"name": "constant-reproduction", "provenance": "identity",
                "detail": "unit total mass makes constants fixed points, exactly"}]
    plot = [{"series": "reproduction_error", "x": [r[0] for r in rows], "y": [r[1] for r in rows]}]
    return reports.report_payload(
        "reproduction", _params(ctx), passed, verdicts, oracles,
        ("n", "max_relative_error"), rows, plot)


def _run_modular_law(ctx: dict) -> dict:
    h, tol = ctx["horizon"], ctx["tol"]
    mf = moment_kernel(1)
    phi = ConvexPhi.square()
    ramp = fixtures.get("ramp-signal").build()
    rows = []
    worst = 0.0
    for n in range(1, h + 1):
        rho = float(shaped_deviation_integral(mf, ramp["fn"], phi, n, (0.0, 1.0), sigma_breaks=[0.0]))
        ref = 1.0 / (2.0 * (n + 1.0))
        rows.append((n, rho, ref, abs(rho - ref)))
        worst = max(worst, abs(rho - ref))
    sh = ctx["search_horizon"]
    report = operator_convergence_experiment(
        mf, ramp["fn"], "modular", _ordinary(sh), list(range(1, sh + 1)),
        ramp["support"], probe=(ramp["support"][0], 4096.0),
        modular=Modular(phi, MeasureSpace.haar_halfline()),
        f_breaks=list(ramp["breaks"]), resolution=ctx["resolution"],
    )
    search = report.extras["search"]
    best = search["best_scale"]
    passed = bool(worst <= tol and best is not None and best >= 1.0
                  and search["solidity_ok"] and report.extras["eac"]["passed"])
    verdicts = {
        "law_within_tolerance": bool(worst <= tol),
        "worst_abs_error": worst,
        "scale_search": {"best_scale": best, "at_least_one": bool(best is not None and best >= 1.0),
                         "solidity_ok": bool(search["solidity_ok"])},
        "eac_passed": bool(report.extras["eac"]["passed"]),
        "experiment_verdict": report.verdict.to_dict(),
    }
    oracles = [
        {"name": "deviation-law", "provenance": "closed-form", "detail": "square-shaped deviation of the cut ramp equals 1/(2(n+1))"},
        {"name": "shaped-deviations", "provenance": "quadrature", "detail": "panel quadrature of the shaped deviation integrand"},
        {"name": "eac-windows", "provenance": "quadrature", "detail": "shaped masses over shrinking probes and widening windows"},
    ]
    plot = [
        {"series": "rho_alpha1", "x": [r[0] for r in rows], "y": [r[1] for r in rows]},
        {"series": "reference", "x": [r[0] for r in rows], "y": [r[2] for r in rows]},
    ]
    return reports.report_payload(
        "modular_law", _params(ctx), passed, verdicts, oracles,
        ("n", "rho", "reference", "abs_error"), rows, plot)


def _run_uniform_tent(ctx: dict) -> dict:
    h, tol = ctx["horizon"], ctx["tol"]
    tent = fixtures.get("tent-signal").build()
    report = operator_convergence_experiment(
        moment_kernel(1), tent["fn"], "uniform", _ordinary(h), list(range(1, h + 1)),
        tent["support"], f_breaks=list(tent["breaks"]), resolution=ctx["resolution"],
    )
    errs = np.asarray(report.series, dtype=np.float64)
    rows = list(zip(report.indices, errs))
    decreasing = bool(report.extras["strictly_decreasing_from_second"])
    small = bool(errs[-1] < tol)
    passed = bool(report.ok and decreasing and small)
    verdicts = {
        "strictly_decreasing_from_second": decreasing,
        "final_error_below_tolerance": small,
        "final_error": float(errs[-1]),
        "experiment_verdict": report.verdict.to_dict(),
        "certificate_passed": bool(report.certificate.passed),
    }
    oracles = [
        {"name": "sup-error-decay", "provenance": "quadrature", "detail": "grid sup distance between the transformed tent and the tent"},
        {"name": "family-certificate", "provenance": "quadrature", "detail": "independent certification of the family before the sweep"},
    ]
    plot = [{"series": "sup_error", "x": list(report.indices), "y": [float(e) for e in errs]}]
    return reports.report_payload(
        "uniform_tent", _params(ctx), passed, verdicts, oracles,
        ("n", "sup_error"), rows, plot)


_AXIOM_KINDS = ("ordinary", "order", "cesaro", "almost", "density")


def _axiom_structure(kind: str, horizon: int, tol: float, density: float) -> ConvergenceStructure:
    if kind == "density":
        return ConvergenceStructure("filter", horizon=horizon, tol=tol, filter=FilterSpec.density(density))
    return ConvergenceStructure(kind, horizon=horizon, tol=tol)


def _run_axioms(ctx: dict) -> dict:
    h, tol = ctx["horizon"], ctx["tol"]
    bank = standard_bank(h)
    rows = []
    verdicts: dict = {"structures": {}}
    all_pass = True
    for kind in _AXIOM_KINDS:
        report = axiom_audit(_axiom_structure(kind, h, tol, ctx["density"]), bank)
        for c in report.clauses:
            rows.append((kind, c.clause, bool(c.passed), c.margin))
        verdicts["structures"][kind] = {
            "passed": bool(report.passed),
            "failed": [c.clause for c in report.clauses if not c.passed],
        }
        all_pass = all_pass and report.passed
    broken = axiom_audit(ConvergenceStructure("broken", horizon=h, tol=tol), bank)
    for c in broken.clauses:
        rows.append(("broken", c.clause, bool(c.passed), c.margin))
    witnesses = [c.witness for c in broken.clauses if not c.passed and c.witness]
    verdicts["broken"] = {
        "failed_as_expected": bool(not broken.passed),
        "witness": witnesses[0] if witnesses else None,
    }
    passed = bool(all_pass and not broken.passed and witnesses)
    verdicts["bank_size"] = len(bank)
    oracles = [
        {"name": "bank-limits", "provenance": "closed-form", "detail": "every bank sequence carries its limit in closed form"},
        {"name": "clause-margins", "provenance": "identity", "detail": "axiom clauses are exact set relations on judged verdicts"},
    ]
    return reports.report_payload(
        "axioms", _params(ctx), passed, verdicts, oracles,
        ("structure", "clause", "passed", "margin"), rows)


def _run_integral_suite(ctx: dict) -> dict:
    cs = _ordinary(16, tol=1e-3)
    tol_q, tol_pair = ctx["tol_quadrature"], ctx["tol_ladder_gap"]
    rows = []
    per_fixture: dict = {}
    passed = True
    for fx in fixtures.integrand_fixtures():
        p = fx.build()
        da, db = fixtures.integrand_ladders(p)
        ia = integrate(p["fn"], p["support"], p["space"], cs, support=p["support"], deltas=da)
        ib = integrate(p["fn"], p["support"], p["space"], cs, support=p["support"], deltas=db)
        q = quadrature_reference(p["fn"], p["support"], p["space"], breaks=p["breaks"]).value
        va, vb = float(ia.values[0]), float(ib.values[0])
        gap_q, gap_pair = abs(va - q), abs(va - vb)
        ref = p["reference"] if p["reference"] is not None else math.nan
        ok = bool(gap_q <= tol_q and gap_pair <= tol_pair
                  and all(v.ok for v in ia.verdicts) and all(v.ok for v in ib.verdicts)
                  and (math.isnan(ref) or abs(va - ref) <= tol_q))
        rows.append((fx.id, p["space_name"], va, vb, q, ref, gap_q, gap_pair, ok))
        per_fixture[fx.id] = ok
        passed = passed and ok
    passed = bool(passed and len(rows) >= 20)
    verdicts = {"fixture_count": len(rows), "all_within_tolerance": bool(passed), "fixtures": per_fixture}
    oracles = [
        {"name": "ladder-integrals", "provenance": "quadrature", "detail": "limits of exact simple-function integrals along refining partitions"},
        {"name": "reference-quadrature", "provenance": "quadrature", "detail": "independent midpoint rule with Richardson refinement and declared breaks"},
        {"name": "closed-forms", "provenance": "closed-form", "detail": "antiderivative values where the suite carries them"},
    ]
    ordinal = list(range(1, len(rows) + 1))
    plot = [
        {"series": "quadrature_abs_error", "x": ordinal, "y": [r[6] for r in rows]},
        {"series": "ladder_gap", "x": ordinal, "y": [r[7] for r in rows]},
    ]
    return reports.report_payload(
        "integral_suite", _params(ctx), passed, verdicts, oracles,
        ("fixture", "space", "ladder_a", "ladder_b", "quadrature", "reference",
         "quadrature_abs_error", "ladder_gap", "within_tolerance"),
        rows, plot)


def _run_vitali(ctx: dict) -> dict:
    n_max, tol = ctx["horizon"], ctx["tol"]
    ms = MeasureSpace.lebesgue_segment(0.0, 1.0)
    cs = ConvergenceStructure(kind="ordinary", horizon=n_max, tol=5e-3)
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=np.float64))
    plateau_fx = fixtures.get("shrinking-plateau").build()
    spike_fx = fixtures.get("mass-spike").build()
    plateau = [plateau_fx["term"](n) for n in range(1, n_max + 1)]
    spike = [spike_fx["term"](n) for n in range(1, n_max + 1)]
    probes = [Interval(0.0, 1.0 / n) for n in (2 ** k for k in range(0, int(math.log2(n_max)) + 1))]
    prep = vitali_audit(plateau, zero, (0.0, 1.0), ms, cs)
    srep = vitali_audit(spike, zero, (0.0, 1.0), ms, cs, probes=probes)
    rows = [("shrinking-plateau", n + 1, float(v)) for n, v in enumerate(prep.l1_values)]
    rows += [("mass-spike", n + 1, float(v)) for n, v in enumerate(srep.l1_values)]
    spike_mass_err = float(np.max(np.abs(srep.l1_values - 1.0)))
    passed = bool(
        prep.premises_hold and prep.l1_verdict.ok and prep.consistent
        and srep.in_measure.verdict.ok and not srep.eac.passed
        and srep.eac.failing_clause == "small_sets"
        and spike_mass_err <= tol and srep.consistent
    )
    verdicts = {
        "plateau": {"premises_hold": bool(prep.premises_hold), "l1_vanishes": bool(prep.l1_verdict.ok),
                    "consistent": bool(prep.consistent)},
        "spike": {"in_measure": bool(srep.in_measure.verdict.ok),
                  "small_set_clause_failed": bool(not srep.eac.passed and srep.eac.failing_clause == "small_sets"),
                  "failing_clause": srep.eac.failing_clause,
                  "constant_mass_error": spike_mass_err,
                  "constant_mass_within_tolerance": bool(spike_mass_err <= tol),
                  "consistent": bool(srep.consistent)},
    }
    oracles = [
        {"name": "term-masses", "provenance": "closed-form", "detail": "step-function integrals are exact finite sums"},
        {"name": "eac-probes", "provenance": "quadrature", "detail": "masses over shrinking probe sets and widening windows"},
    ]
    plot = [
        {"series": "plateau_l1", "x": [r[1] for r in rows[:n_max]], "y": [r[2] for r in rows[:n_max]]},
        {"series": "spike_l1", "x": [r[1] for r in rows[n_max:]], "y": [r[2] for r in rows[n_max:]]},
    ]
    return reports.report_payload(
        "vitali", _params(ctx), passed, verdicts, oracles,
        ("family", "n", "l1_mass"), rows, plot)


def _run_jensen(ctx: dict) -> dict:
    count, tol = ctx["count"], ctx["tol"]
    ms = MeasureSpace.lebesgue_segment(0.0, 1.0)
    closed = jensen_gap(ConvexPhi.square(), lambda t: np.asarray(t, dtype=np.float64), (0.0, 1.0), ms)
    closed_err = abs(closed["gap"] - 1.0 / 12.0)
    audit = jensen_randomized_audit(count=count, seed=ctx["seed"])
    rows = [(r["trial"], r["shape"], r["dim"], r["gap"]) for r in audit.trials]
    passed = bool(audit.ok and closed_err <= 1e-6)
    verdicts = {
        "closed_form_gap": float(closed["gap"]),
        "closed_form_error": float(closed_err),
        "closed_form_within_tolerance": bool(closed_err <= 1e-6),
        "randomized": {"count": audit.count, "failures": audit.failures,
                       "min_gap": float(audit.min_gap), "ok": bool(audit.ok)},
    }
    oracles = [
        {"name": "square-mean-gap", "provenance": "closed-form", "detail": "mean of squares minus square of mean on the unit ramp is one twelfth"},
        {"name": "randomized-gaps", "provenance": "monte-carlo", "detail": "seeded random shapes, weights, and integrands on a shared grid"},
    ]
    plot = [{"series": "trial_min_gap", "x": [r[0] for r in rows], "y": [r[3] for r in rows]}]
    return reports.report_payload(
        "jensen", _params(ctx), passed, verdicts, oracles,
        ("trial", "shape", "dim", "min_gap"), rows, plot)


def _run_ito(ctx: dict) -> dict:
    paths, steps = ctx["paths"], ctx["steps"]
    grid = np.linspace(0.0, 1.0, steps + 1)
    ens = simulate_brownian(paths, grid, ctx["seed"])
    rows = []
    verdicts: dict = {"profiles": {}}
    all_within = True
    for fid in ("flat-volatility", "ramp-volatility", "two-level-volatility"):
        p = fixtures.get(fid).build()
        rep = isometry_check(p["profile"], ens)
        rows.append((fid, rep.second_moment, rep.target, abs(rep.gap), rep.band, bool(rep.within)))
        verdicts["profiles"][fid] = {
            "within_three_stderr": bool(rep.within),
            "mean_within_three_stderr": bool(rep.mean_within),
            "closed_form_target": float(p["square_integral"](1.0)),
        }
        all_within = all_within and rep.within
    terminal = ens.terminal().values
    integral_one = ito_integrate(1.0, ens).values
    identity_exact = bool(np.array_equal(integral_one, terminal))
    passed = bool(all_within and identity_exact)
    verdicts["constant_one_matches_terminal_exactly"] = identity_exact
    oracles = [
        {"name": "squared-integral-targets", "provenance": "closed-form", "detail": "time integrals of the squared profiles"},
        {"name": "second-moments", "provenance": "monte-carlo", "detail": f"{paths} paths, {steps} steps, {GENERATOR_NOTE}"},
        {"name": "terminal-value", "provenance": "identity", "detail": "integrating the constant one reproduces the terminal value bit for bit"},
    ]
    return reports.report_payload(
        "ito", _params(ctx), passed, verdicts, oracles,
        ("profile", "second_moment", "target", "abs_gap", "band", "within"), rows)


# ---------------------------------------------------------------------------
# registry, config schema, dispatch


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    summary: str
    horizon: int
    resolution: int
    params: dict
    run: Callable[[dict], dict]


EXPERIMENTS = {
    e.name: e
    for e in (
        ExperimentSpec("moment_tail", "tail-mass law and unit mass of the ratio-kernel family",
                       30, 2**12, {"tol": 1e-8, "delta": 2.0}, _run_moment_tail),
        ExperimentSpec("reproduction", "constants are reproduced across the whole index range",
                       30, 2**12, {"tol": 1e-8, "palette": (1.0, 2.0, 1.375), "s_probes": (0.3, 1.0, 5.0)}, _run_reproduction),
        ExperimentSpec("modular_law", "shaped deviation law for the cut ramp plus the scale search",
                       50, 2**12, {"tol": 1e-6, "search_horizon": 24}, _run_modular_law),
        ExperimentSpec("uniform_tent", "sup-error decay of the transformed tent",
                       200, 2**14, {"tol": 1e-2}, _run_uniform_tent),
        ExperimentSpec("axioms", "axiom clauses for five structures plus the broken control",
                       50_000, 2**12, {"tol": 5e-3, "density": 0.99}, _run_axioms),
        ExperimentSpec("integral_suite", "ladder integrals against quadrature and closed forms",
                       16, 2**12, {"tol_quadrature": 1e-4, "tol_ladder_gap": 2e-4}, _run_integral_suite),
        ExperimentSpec("vitali", "limit interchange audit for the plateau and spike families",
                       1000, 2**10, {"tol": 1e-6}, _run_vitali),
        ExperimentSpec("jensen", "convexity gap, closed form and randomized",
                       1000, 2**10, {"tol": 1e-6, "count": 1000}, _run_jensen),
        ExperimentSpec("ito", "stochastic integral isometry and the terminal identity",
                       1, 2**9, {"paths": 20_000, "steps": 512}, _run_ito),
    )
}

_TOP_KEYS = {"experiment", "seed", "resolution", "horizon", "out_dir", "params"}


def _params(ctx: dict) -> dict:
    """Everything that parameterized the run, embedded into the report."""
    return dict(ctx)


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"config {path}: root must be an object")
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise SchemaError(f"config {path}: unknown key(s) {', '.join(unknown)}")
    if "experiment" not in data:
        raise SchemaError(f"config {path}: missing required key 'experiment'")
    name = data["experiment"]
    if not isinstance(name, str) or name not in EXPERIMENTS:
        raise SchemaError(f"config {path}: unknown experiment id {name!r}; known: {', '.join(sorted(EXPERIMENTS))}")
    for key in ("seed", "resolution", "horizon"):
        if key in data and (isinstance(data[key], bool) or not isinstance(data[key], int)):
            raise SchemaError(f"config {path}: {key} must be an integer")
    if "out_dir" in data and not isinstance(data["out_dir"], str):
        raise SchemaError(f"config {path}: out_dir must be a string")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise SchemaError(f"config {path}: params must be an object")
    allowed = set(EXPERIMENTS[name].params)
    bad = sorted(set(params) - allowed)
    if bad:
        raise SchemaError(f"config {path}: unknown parameter(s) for {name}: {', '.join(bad)}")
    return data


def _context(spec: ExperimentSpec, cfg: dict, args) -> dict:
    ctx = dict(spec.params)
    ctx.update(cfg.get("params", {}))
    ctx["seed"] = args.seed if args.seed is not None else cfg.get("seed", 0)
    ctx["resolution"] = args.resolution if args.resolution is not None else cfg.get("resolution", spec.resolution)
    ctx["horizon"] = args.horizon if args.horizon is not None else cfg.get("horizon", spec.horizon)
    if ctx["resolution"] < 8:
        raise SchemaError("resolution must be at least 8")
    if ctx["horizon"] < 1:
        raise SchemaError("horizon must be at least 1")
    return ctx


def _failing_paths(node, path: str = "") -> list:
    if isinstance(node, bool):
        return [path] if not node else []
    if isinstance(node, dict):
        out = []
        for k, v in node.items():
            out.extend(_failing_paths(v, f"{path}.{k}" if path else str(k)))
        return out
    return []


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    name = cfg["experiment"]
    spec = EXPERIMENTS[name]
    ctx = _context(spec, cfg, args)
    payload = spec.run(ctx)
    out_dir = Path(args.out_dir if args.out_dir is not None else cfg.get("out_dir", "."))
    json_path = reports.write_json(out_dir / f"{name}.json", payload)
    csv_path = reports.write_csv(out_dir / f"{name}.csv", payload["columns"], payload["rows"])
    from . import figures  # heavyweight import, deferred until a report is drawn

    rendered = figures.render_report(payload, out_dir)
    written = ", ".join(str(p) for p in [json_path, csv_path, *rendered])
    status = "PASS" if payload["passed"] else "FAIL"
    print(f"{name}: {status} ({written})")
    if not payload["passed"]:
        failing = _failing_paths(payload["verdicts"]) or ["passed"]
        print(f"failed invariants: {', '.join(failing)}", file=sys.stderr)
        return 1
    return 0


def _cmd_list(args) -> int:
    for row in fixtures.catalog(args.module):
        print(f"{row['id']}\t{row['module']}\t{row['kind']}\t{row['summary']}")
    return 0


def _cmd_plot(args) -> int:
    report = reports.load_report(args.report)
    columns, rows = reports.plot_rows(report)
    text = reports.csv_text(columns, rows)
    if args.out:
        reports.atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rieszlab", description="experiment runner and report tools")
    sub = p.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one experiment from a JSON config")
    runp.add_argument("config", help="path to the experiment config")
    runp.add_argument("--seed", type=int, default=None, help="override the config seed")
    runp.add_argument("--resolution", type=int, default=None, help="override the quadrature resolution")
    runp.add_argument("--horizon", type=int, default=None, help="override the index horizon")
    runp.add_argument("--out-dir", default=None, help="directory for the report files")
    lsp = sub.add_parser("list-fixtures", help="print the fixture catalog")
    lsp.add_argument("--module", default=None, help="only fixtures of this module")
    pdp = sub.add_parser("plot-data", help="emit long-format plot rows from a report")
    pdp.add_argument("report", help="path to a report JSON file")
    pdp.add_argument("--out", default=None, help="write the CSV here instead of stdout")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-fixtures":
            return _cmd_list(args)
        return _cmd_plot(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except (reports.ReportError, fixtures.FixtureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UncertifiedKernelError as exc:
        print(f"refused: kernel family failed certification ({exc.clause})", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
