"""Convex shape functions and the modulars they generate.

A shape function vanishes at zero, increases, and is convex; applied to the
absolute value of a function and integrated it yields a modular.  This
module audits candidate shapes clause by clause (with a concave fixture
that must fail), computes modulars with an explicit infinite flag, sorts
functions into the finite-for-all-scales class versus the finite-for-small-
scales class, and searches for the largest scale at which a family of
differences is modular-null.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .convergence import ConvergenceStructure, LatticeSequence, Verdict, estimate_limit
from .integral import SimpleFunction, with_horizon
from .lattice import LatticeElement, OSequence, is_o_sequence
from .measure import MeasureError, MeasureSpace, as_interval, quadrature_reference

_DIFF_STEP = 1e-6


@dataclass(frozen=True)
class ConvexPhi:
    """Shape function on the half line, applied to |u| when called."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        z = float(np.asarray(self.fn(np.zeros(1)))[0])
        if abs(z) > 1e-12:
            raise ValueError(f"{self.name}: shape functions vanish at zero, got {z}")

    def __call__(self, u) -> np.ndarray:
        return np.asarray(self.fn(np.abs(np.asarray(u, dtype=np.float64))), dtype=np.float64)

    def derivative(self, u) -> np.ndarray:
        u = np.abs(np.asarray(u, dtype=np.float64))
        if self.deriv is not None:
            return np.asarray(self.deriv(u), dtype=np.float64)
        h = _DIFF_STEP
        lo = np.maximum(u - h, 0.0)
        return (self(u + h) - self(lo)) / (u + h - lo)

    def slope(self, v: float) -> float:
        """Chord slope through the origin."""
        if v <= 0.0:
            raise ValueError("slope needs v > 0")
        return float(self(v)[()] if np.ndim(v) == 0 else self(v)) / v

    def slope_bound(self, u: float) -> float:
        """Local Lipschitz bound on [-u, u]: the endpoint derivative."""
        return float(np.asarray(self.derivative(abs(u))).reshape(-1)[0])

    @staticmethod
    def square() -> "ConvexPhi":
        return ConvexPhi("square", lambda u: u * u, lambda u: 2.0 * u)

    @staticmethod
    def power(p: float) -> "ConvexPhi":
        if p < 1.0:
            raise ValueError("power shapes need p >= 1")
        return ConvexPhi(f"power{p:g}", lambda u: u**p, lambda u: p * u ** (p - 1.0))

    @staticmethod
    def exp_square() -> "ConvexPhi":
        # rapid growth: finite modulars at small scales can sit next to
        # divergent ones at large scales
        f = lambda u: np.expm1(np.square(np.clip(u, 0.0, 26.0)))
        d = lambda u: 2.0 * u * np.exp(np.square(np.clip(u, 0.0, 26.0)))
        return ConvexPhi("exp_square", f, d)


@dataclass(frozen=True)
class PhiClause:
    name: str
    ok: bool
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "witness": self.witness}


@dataclass(frozen=True)
class PhiAuditReport:
    shape: str
    clauses: tuple

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.clauses)

    def clause(self, name: str) -> PhiClause:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"shape": self.shape, "passed": self.passed, "clauses": [c.to_dict() for c in self.clauses]}


def convexity_audit(phi: ConvexPhi, grid: Optional[np.ndarray] = None, slack: float = 1e-9) -> PhiAuditReport:
    """Clause-by-clause audit of a candidate shape function.

    Checks the zero value, monotonicity, support lines staying below the
    graph, sublinearity of down-scaling, join subadditivity on positives,
    and the local Lipschitz bound from the endpoint derivative.
    """
    if grid is None:
        grid = np.linspace(0.0, 3.0, 61)
    grid = np.asarray(grid, dtype=np.float64)
    vals = phi(grid)
    clauses = []

    clauses.append(PhiClause("zero_at_zero", bool(abs(phi(np.zeros(1))[0]) <= slack)))

    diffs = np.diff(vals)
    ok = bool(np.all(diffs >= -slack))
    wit = None if ok else {"u": float(grid[np.argmax(diffs < -slack)])}
    clauses.append(PhiClause("nondecreasing", ok, wit))

    ok, wit = True, None
    anchors = grid[grid > 0.0][::5]
    d = phi.derivative(anchors)
    for u, du, fu in zip(anchors, d, phi(anchors)):
        short = fu + du * (grid - u) - vals
        if np.any(short > slack + 1e-7 * np.abs(vals)):
            j = int(np.argmax(short))
            ok, wit = False, {"u": float(u), "v": float(grid[j]), "shortfall": float(short[j])}
            break
    clauses.append(PhiClause("support_lines", ok, wit))

    ok, wit = True, None
    for xi in (0.25, 0.5, 0.75):
        excess = phi(xi * grid) - xi * vals
        if np.any(excess > slack):
            j = int(np.argmax(excess))
            ok, wit = False, {"xi": xi, "u": float(grid[j]), "excess": float(excess[j])}
            break
    clauses.append(PhiClause("scaling_sublinear", ok, wit))

    u, v = np.meshgrid(grid, grid)
    joined = phi(np.maximum(u, v))
    ok = bool(np.all(joined <= phi(u) + phi(v) + slack))
    clauses.append(PhiClause("join_subadditive", ok))

    pu, pv = phi(u), phi(v)
    bound = phi.derivative(np.maximum(u, v)) * np.abs(u - v)
    gap = np.abs(pu - pv) - bound
    ok = bool(np.all(gap <= slack + 1e-6 * np.maximum(pu, pv)))
    wit = None
    if not ok:
        j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        wit = {"u": float(u[j]), "v": float(v[j]), "gap": float(gap[j])}
    clauses.append(PhiClause("local_lipschitz", ok, wit))

    return PhiAuditReport(phi.name, tuple(clauses))


def jensen_gap(phi: ConvexPhi, h: Callable[[np.ndarray], np.ndarray], a, ms: MeasureSpace) -> dict:
    """Mean inequality on a unit-mass set: the shape of the mean sits below
    the mean of the shape.  Returns both sides and the gap."""
    iv = as_interval(a)
    mass = ms.measure(iv)
    if not math.isfinite(mass) or abs(mass - 1.0) > 1e-9:
        raise MeasureError("mean inequality needs a probe set of unit mass")
    mean = quadrature_reference(h, iv, ms).scalar()
    lhs = float(phi(np.array([mean]))[0])
    rhs = quadrature_reference(lambda t: phi(h(t)), iv, ms).scalar()
    return {"mean": mean, "shape_of_mean": lhs, "mean_of_shape": rhs, "gap": rhs - lhs}


@dataclass(frozen=True)
class JensenAuditReport:
    count: int
    min_gap: float
    failures: int
    tol: float
    trials: tuple  # one record per trial: shape, dim, smallest gap entry

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "min_gap": self.min_gap,
            "failures": self.failures,
            "tol": self.tol,
            "ok": self.ok,
            "trials": list(self.trials),
        }


def jensen_randomized_audit(
    count: int = 1000,
    seed: int = 0,
    ms: Optional[MeasureSpace] = None,
    resolution: int = 2**10,
    tol: float = 1e-6,
) -> JensenAuditReport:
    """Mean inequality on randomized (shape, weight, integrand) triples.

    Each trial draws a convex shape, a positive weight normalized to unit
    mass on the grid, and a smooth vector-valued integrand; the mean of the
    shaped values must dominate the shaped mean entrywise, up to tol of
    floating-point slack.
    """
    if ms is None:
        ms = MeasureSpace.lebesgue_segment(0.0, 1.0)
    t, w = ms.grid(ms.domain.carrier, resolution)
    rng = np.random.default_rng(seed)
    trials = []
    failures = 0
    min_gap = math.inf
    for i in range(count):
        if rng.uniform() < 0.5:
            phi, label = ConvexPhi.square(), "square"
        else:
            p = float(rng.uniform(1.0, 4.0))
            phi, label = ConvexPhi.power(p), f"power_{p:.3f}"
        amp, tilt = rng.uniform(0.0, 1.5), rng.uniform(-1.0, 1.0)
        freq, phase = int(rng.integers(1, 4)), rng.uniform(0.0, 2.0 * math.pi)
        hw = np.exp(amp * np.sin(2.0 * math.pi * freq * t + phase) + tilt * t) * w
        hw = hw / hw.sum()
        dim = int(rng.integers(1, 4))
        coef = rng.uniform(-2.0, 2.0, (3, dim))
        modes = rng.integers(1, 5, dim)
        osc = np.sin(2.0 * math.pi * t[:, None] * modes[None, :] + rng.uniform(0, 2 * math.pi, dim)[None, :])
        fvals = coef[0][None, :] + coef[1][None, :] * t[:, None] + coef[2][None, :] * osc
        mean_of_shape = hw @ phi(fvals)
        shape_of_mean = phi(hw @ fvals)
        gap = float(np.min(mean_of_shape - shape_of_mean))
        min_gap = min(min_gap, gap)
        if gap < -tol:
            failures += 1
        trials.append({"trial": i, "shape": label, "dim": dim, "gap": gap})
    return JensenAuditReport(count, min_gap, failures, tol, tuple(trials))


# ---------------------------------------------------------------------------
# modulars


@dataclass(frozen=True)
class ModularValue:
    value: float
    finite: bool
    error: float
    windows: int = 0

    def to_dict(self) -> dict:
        return {"value": self.value, "finite": self.finite, "error": self.error, "windows": self.windows}


@dataclass(frozen=True)
class Modular:
    """Integral of the shaped absolute value against the measure."""

    phi: ConvexPhi
    ms: MeasureSpace

    def evaluate(self, f: Callable[[np.ndarray], np.ndarray], a=None, breaks: Sequence[float] = (), resolution: Optional[int] = None) -> ModularValue:
        g = lambda t: self.phi(np.asarray(f(t), dtype=np.float64))
        res = quadrature_reference(g, a, self.ms, breaks=breaks, resolution=resolution)
        if res.diverged:
            return ModularValue(math.inf, False, math.inf, res.windows)
        return ModularValue(res.scalar(), True, res.error, res.windows)

    def of_simple(self, sf: SimpleFunction, a=None) -> ModularValue:
        shaped = SimpleFunction(sf.edges, self.phi(sf.coeffs))
        target = as_interval(a) if a is not None else self.ms.domain.carrier
        out = shaped.integral(target, self.ms)
        if out.has_infinite:
            return ModularValue(math.inf, False, math.inf)
        return ModularValue(float(out.values[0]), True, 0.0)

    def on_grid(self, values: np.ndarray, weights: np.ndarray) -> float:
        return float(np.sum(self.phi(values) * weights))


# ---------------------------------------------------------------------------
# membership classes


@dataclass(frozen=True)
class MembershipReport:
    classification: str
    alphas: tuple
    rhos: tuple
    largest_finite_alpha: Optional[float]
    vanishing_ok: bool

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "alphas": list(self.alphas),
            "rhos": [r if math.isfinite(r) else "inf" for r in self.rhos],
            "largest_finite_alpha": self.largest_finite_alpha,
            "vanishing_ok": self.vanishing_ok,
        }


def orlicz_membership(
    f: Callable[[np.ndarray], np.ndarray],
    phi: ConvexPhi,
    ms: MeasureSpace,
    alphas: Optional[Sequence[float]] = None,
    a=None,
    breaks: Sequence[float] = (),
    tol: float = 1e-3,
    resolution: Optional[int] = None,
) -> MembershipReport:
    """Scan scales: which multiples of f have a finite modular.

    Finite at every tested scale with modulars decreasing to zero along the
    downward ladder classifies as absolutely_finite; finite only up to some
    scale as finite_for_small_scales; finite nowhere as outside.
    """
    if alphas is None:
        alphas = tuple(2.0 ** -np.arange(-2, 9))  # 4, 2, 1, ..., 2^-8, descending
    alphas = tuple(float(x) for x in alphas)
    if any(b >= a_ for a_, b in zip(alphas, alphas[1:])) or alphas[-1] <= 0:
        raise ValueError("alphas must be positive and strictly decreasing")
    rho = Modular(phi, ms)
    rhos = []
    for al in alphas:
        scaled = (lambda c: (lambda t: c * np.asarray(f(t), dtype=np.float64)))(al)
        rhos.append(rho.evaluate(scaled, a=a, breaks=breaks, resolution=resolution).value)
    finite = [math.isfinite(r) for r in rhos]
    largest = next((al for al, fin in zip(alphas, finite) if fin), None)
    if largest is None:
        return MembershipReport("outside", alphas, tuple(rhos), None, False)
    small = [r for r in rhos if math.isfinite(r)]
    ladder = OSequence(lambda l: np.array([small[l - 1]]), len(small))
    vanish = is_o_sequence(ladder, tol).ok if len(small) >= 2 else False
    if all(finite) and vanish:
        cls = "absolutely_finite"
    elif vanish:
        cls = "finite_for_small_scales"
    else:
        cls = "outside" if not any(finite) else "finite_for_small_scales"
    return MembershipReport(cls, alphas, tuple(rhos), largest, vanish)


# ---------------------------------------------------------------------------
# modular convergence


@dataclass(frozen=True)
class ModularSearchReport:
    best_scale: Optional[float]
    table: tuple  # (scale, verdict) pairs, descending scales
    solidity_ok: bool

    def to_dict(self) -> dict:
        return {
            "best_scale": self.best_scale,
            "table": [{"scale": s, "verdict": v.to_dict()} for s, v in self.table],
            "solidity_ok": self.solidity_ok,
        }


def modular_convergence_search(
    fseq: Sequence[Callable[[np.ndarray], np.ndarray]],
    f: Callable[[np.ndarray], np.ndarray],
    phi: ConvexPhi,
    ms: MeasureSpace,
    cs: ConvergenceStructure,
    a,
    scales: Optional[Sequence[float]] = None,
    resolution: int = 2**12,
) -> ModularSearchReport:
    """Largest scale at which the shaped differences are judged null.

    Works on the probe set's quadrature grid.  Down-scaling can only help
    (convexity through zero), so any pass above a fail breaks solidity and
    is reported.
    """
    iv = as_interval(a)
    t, w = ms.grid(iv, resolution)
    if scales is None:
        scales = tuple(2.0 ** -np.arange(-2, 7))  # 4 .. 2^-6
    scales = tuple(float(s) for s in scales)
    fv = np.asarray(f(t), dtype=np.float64)
    diffs = np.stack([np.asarray(g(t), dtype=np.float64) - fv for g in fseq])
    rho = Modular(phi, ms)
    cs_n = with_horizon(cs, len(fseq))
    table = []
    for s in scales:
        vals = np.array([rho.on_grid(s * d, w) for d in diffs])
        table.append((s, estimate_limit(LatticeSequence(vals[:, None]), cs_n, LatticeElement.zeros(1))))
    best = next((s for s, v in table if v.ok), None)
    oks = [v.ok for _, v in table]
    first_ok = oks.index(True) if any(oks) else len(oks)
    solidity_ok = all(oks[first_ok:])
    return ModularSearchReport(best, tuple(table), solidity_ok)
