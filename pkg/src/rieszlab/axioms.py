"""Audit a convergence structure against the limit and upper-limit laws.

The audit samples each law on a bank of sequences with closed-form limits
and reports one verdict per clause, with a witness naming the first bank
entry (or pair) that violates it.  Seven clauses cover the limit operator:
linearity, monotonicity, constants together with finite modifications,
compatibility with absolute value, squeeze, decay of u/n, and eventual
lower bounds.  Five more cover the companion upper-limit operator, and a
final clause checks that unit-norm-null sequences are declared null.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .convergence import (
    ConvergenceStructure,
    LatticeSequence,
    Verdict,
    estimate_limit,
    limsup,
    structure_estimate,
)
from .lattice import LatticeElement

LIMIT_CLAUSES = (
    "linearity",
    "monotonicity",
    "constants_and_finite_modification",
    "absolute_value",
    "squeeze",
    "unit_decay",
    "eventual_lower_bound",
)
UPPER_CLAUSES = (
    "upper_finite_modification",
    "upper_subadditivity",
    "upper_monotonicity",
    "upper_matches_limit_on_convergent",
    "upper_null_forces_null",
)
NORM_CLAUSE = "norm_null_forces_null"


@dataclass(frozen=True)
class BankSequence:
    """One bank entry: evaluated matrix plus its closed-form limit."""

    name: str
    matrix: np.ndarray  # (N, T)
    limit: np.ndarray  # (T,)
    positive: bool

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def sequence(self) -> LatticeSequence:
        return LatticeSequence(self.matrix)


def _entry(name: str, base: np.ndarray, decay: np.ndarray, limit: Optional[np.ndarray] = None) -> BankSequence:
    matrix = base[None, :] + decay
    limit = base if limit is None else limit
    return BankSequence(name, matrix, limit.astype(float), bool((matrix >= 0).all()))


def standard_bank(horizon: int) -> list[BankSequence]:
    """At least thirty sequences with closed-form limits, dims 1 and 3."""
    k = np.arange(1, horizon + 1, dtype=np.float64)[:, None]
    bank: list[BankSequence] = []

    def shapes(u: np.ndarray) -> dict:
        osc = ((-1.0) ** np.arange(1, horizon + 1))[:, None]
        return {
            "const": 0.0 * k * u,
            "harmonic": u / k,
            "alt_harmonic": osc * u / k,
            "quadratic": u / k**2,
            "geom_fast": u * 0.5**k,
            "geom_slow": u * 0.9**k,
            "sinc": np.sin(k) * u / k,
            "cos_positive": (1.0 + np.cos(k)) * u / (2.0 * k),
            "alt_quadratic": osc * u / k**2,
        }

    u1 = np.array([1.0])
    u3 = np.array([1.0, 0.25, 0.7])
    s1 = shapes(u1)
    s3 = shapes(u3)

    zero1, pos1, neg1 = np.array([0.0]), np.array([0.75]), np.array([-1.25])
    zero3 = np.zeros(3)
    pos3 = np.array([1.0, 0.3, 2.0])
    sgn3 = np.array([0.5, -1.0, 0.25])

    for shp in ("harmonic", "quadratic", "geom_fast", "cos_positive"):
        bank.append(_entry(f"null1_{shp}", zero1, s1[shp]))
    for shp in ("const", "harmonic", "alt_harmonic", "geom_slow", "sinc", "alt_quadratic"):
        bank.append(_entry(f"pos1_{shp}", pos1, s1[shp]))
    bank.append(_entry("pos1_ratio", pos1, pos1 * (k / (k + 1.0)) - pos1))
    head = np.zeros((horizon, 1))
    head[:10] = 0.5
    bank.append(_entry("pos1_settled_head", pos1, head))
    for shp in ("const", "harmonic", "alt_harmonic", "sinc"):
        bank.append(_entry(f"sgn1_{shp}", neg1, s1[shp]))
    for shp in ("const", "harmonic", "alt_harmonic", "quadratic", "geom_slow", "sinc"):
        bank.append(_entry(f"pos3_{shp}", pos3, s3[shp]))
    bank.append(_entry("pos3_ratio", pos3, pos3[None, :] * (k / (k + 1.0)) - pos3[None, :]))
    head3 = np.zeros((horizon, 3))
    head3[:10] = 0.5
    bank.append(_entry("pos3_settled_head", pos3, head3))
    for shp in ("harmonic", "geom_fast", "cos_positive"):
        bank.append(_entry(f"null3_{shp}", zero3, s3[shp]))
    for shp in ("harmonic", "alt_harmonic", "sinc"):
        bank.append(_entry(f"sgn3_{shp}", sgn3, s3[shp]))
    bank.append(_entry("pos1_harmonic_scaled", pos1, 0.3 * s1["harmonic"]))
    bank.append(_entry("pos3_harmonic_scaled", pos3, 0.3 * s3["harmonic"]))
    assert len(bank) >= 30
    return bank


@dataclass(frozen=True)
class ClauseVerdict:
    clause: str
    passed: bool
    witness: Optional[str]
    margin: float

    def to_dict(self) -> dict:
        return {"clause": self.clause, "passed": self.passed, "witness": self.witness, "margin": self.margin}


@dataclass(frozen=True)
class AuditReport:
    kind: str
    horizon: int
    tol: float
    clauses: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def clause(self, name: str) -> ClauseVerdict:
        for c in self.clauses:
            if c.clause == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "horizon": self.horizon,
            "tol": self.tol,
            "passed": self.passed,
            "limit_clauses": [c.to_dict() for c in self.clauses if c.clause in LIMIT_CLAUSES],
            "upper_clauses": [c.to_dict() for c in self.clauses if c.clause not in LIMIT_CLAUSES],
        }


class _Auditor:
    def __init__(self, cs: ConvergenceStructure, bank: Sequence[BankSequence]):
        self.cs = cs
        self.bank = list(bank)
        self.tol2 = 2.0 * cs.tol
        self._est: dict[str, np.ndarray] = {}
        self._seq: dict[str, LatticeSequence] = {}

    def seq(self, entry: BankSequence) -> LatticeSequence:
        if entry.name not in self._seq:
            self._seq[entry.name] = entry.sequence()
        return self._seq[entry.name]

    def est(self, entry: BankSequence) -> np.ndarray:
        if entry.name not in self._est:
            self._est[entry.name] = structure_estimate(self.seq(entry), self.cs).value.values
        return self._est[entry.name]

    def raw_estimate(self, matrix: np.ndarray) -> np.ndarray:
        return structure_estimate(LatticeSequence(matrix), self.cs).value.values

    def upper(self, matrix: np.ndarray) -> np.ndarray:
        return limsup(LatticeSequence(matrix), self.cs).value.values

    def comparable_pairs(self) -> list[tuple[BankSequence, BankSequence]]:
        pairs = []
        for a in self.bank:
            for b in self.bank:
                if a.name >= b.name or a.dim != b.dim:
                    continue
                if np.all(a.matrix <= b.matrix) and not np.array_equal(a.matrix, b.matrix):
                    pairs.append((a, b))
        return pairs

    # -- clause evaluations ---------------------------------------------

    def linearity(self) -> ClauseVerdict:
        worst, witness = 0.0, None
        combos = ((1.0, 1.0), (1.0, -1.0), (0.5, 1.5))
        picks = [(a, b) for a in self.bank for b in self.bank if a.name < b.name and a.dim == b.dim][::5][:8]
        for a, b in picks:
            for z1, z2 in combos:
                combo = z1 * a.matrix + z2 * b.matrix
                got = self.raw_estimate(combo)
                want = z1 * self.est(a) + z2 * self.est(b)
                gap = float(np.max(np.abs(got - want)))
                if gap > worst:
                    worst, witness = gap, f"{a.name},{b.name} at ({z1},{z2})"
        return ClauseVerdict("linearity", worst <= self.tol2, witness if worst > self.tol2 else None, worst)

    def monotonicity(self) -> ClauseVerdict:
        worst, witness = 0.0, None
        for a, b in self.comparable_pairs():
            gap = float(np.max(self.est(a) - self.est(b)))
            if gap > worst:
                worst, witness = gap, f"{a.name}<={b.name}"
        return ClauseVerdict("monotonicity", worst <= self.tol2, witness if worst > self.tol2 else None, worst)

    def constants(self) -> ClauseVerdict:
        worst, witness = 0.0, None
        for entry in self.bank:
            if "const" not in entry.name:
                continue
            seq = self.seq(entry)
            cand = LatticeElement.from_values(entry.limit)
            gap = float(np.max(np.abs(self.est(entry) - entry.limit)))
            if not estimate_limit(seq, self.cs, cand).ok:
                gap = max(gap, math.inf)
            bent = entry.matrix.copy()
            bent[:10] += 0.5  # finite modification must not flip a true verdict
            if not estimate_limit(LatticeSequence(bent), self.cs, cand).ok:
                gap = max(gap, math.inf)
            gap = max(gap, float(np.max(np.abs(self.raw_estimate(bent) - entry.limit))))
            if gap > worst:
                worst, witness = gap, entry.name
        return ClauseVerdict(
            "constants_and_finite_modification", worst <= self.tol2, witness if worst > self.tol2 else None, worst
        )

    def absolute_value(self) -> ClauseVerdict:
        worst, witness = 0.0, None
        for entry in self.bank:
            got = self.raw_estimate(np.abs(entry.matrix))
            want = np.abs(self.est(entry))
            gap = float(np.max(np.abs(got - want)))
            if gap > worst:
                worst, witness = gap, entry.name
        return ClauseVerdict("absolute_value", worst <= self.tol2, witness if worst > self.tol2 else None, worst)

    def squeeze(self) -> ClauseVerdict:
        n = self.cs.horizon
        k = np.arange(1, n + 1, dtype=np.float64)[:, None]
        worst, witness = 0.0, None
        for dim, base in ((1, np.array([0.4])), (3, np.array([0.9, 0.1, 1.4]))):
            u = np.ones(dim)
            lower = base[None, :] - u / k
            upper = base[None, :] + u / k
            middle = base[None, :] + np.sin(k) * u / k
            assert np.all(lower <= middle) and np.all(middle <= upper)
            v = estimate_limit(LatticeSequence(middle), self.cs, LatticeElement.from_values(base))
            gap = float(np.max(np.abs(self.raw_estimate(middle) - base)))
            if not v.ok:
                gap = max(gap, math.inf)
            if gap > worst:
                worst, witness = gap, f"squeeze_dim{dim}"
        return ClauseVerdict("squeeze", worst <= self.tol2, witness if worst > self.tol2 else None, worst)

    def unit_decay(self) -> ClauseVerdict:
        n = self.cs.horizon
        k = np.arange(1, n + 1, dtype=np.float64)[:, None]
        worst, witness = 0.0, None
        for dim in (1, 3):
            seq = LatticeSequence(np.ones(dim)[None, :] / k)
            v = estimate_limit(seq, self.cs, LatticeElement.zeros(dim))
            gap = float(np.max(np.abs(self.raw_estimate(seq.matrix))))
            if not v.ok:
                gap = max(gap, math.inf)
            if gap > worst:
                worst, witness = gap, f"unit_over_n_dim{dim}"
        return ClauseVerdict("unit_decay", worst <= self.tol2, witness if worst > self.tol2 else None, worst)

    def eventual_lower_bound(self) -> ClauseVerdict:
        worst, witness = 0.0, None
        for entry in self.bank:
            floor = entry.limit - 0.5  # below the limit, so definitely below x_n
            tail = entry.matrix[self.cs.horizon // 2 :]
            if not np.all(tail >= floor[None, :]):
                continue
            gap = float(np.max(floor - self.est(entry)))
            if gap > worst:
                worst, witness = gap, entry.name
        return ClauseVerdict("eventual_lower_bound", worst <= self.tol2, witness if worst > self.tol2 else None, worst)

    def upper_finite_modification(self) -> ClauseVerdict:
        worst, witness = 0.0, None
        for entry in self.bank[::3]:
            bent = entry.matrix.copy()
            bent[:10] += 0.5
            gap = float(np.max(np.abs(self.upper(bent) - self.upper(entry.matrix))))
            if gap > worst:
                worst, witness = gap, entry.name
        return ClauseVerdict(
            "upper_finite_modification", worst <= self.tol2, witness if worst > self.tol2 else None, worst
        )

    def upper_subadditivity(self) -> ClauseVerdict:
        worst, witness = 0.0, None
        pos = [e for e in self.bank if e.positive]
        picks = [(a, b) for a in pos for b in pos if a.name < b.name and a.dim == b.dim][::3][:10]
        for a, b in picks:
            gap = float(np.max(self.upper(a.matrix + b.matrix) - (self.upper(a.matrix) + self.upper(b.matrix))))
            if gap > worst:
                worst, witness = gap, f"{a.name}+{b.name}"
        return ClauseVerdict("upper_subadditivity", worst <= self.tol2, witness if worst > self.tol2 else None, worst)

    def upper_monotonicity(self) -> ClauseVerdict:
        worst, witness = 0.0, None
        for a, b in self.comparable_pairs():
            if not (a.positive and b.positive):
                continue
            gap = float(np.max(self.upper(a.matrix) - self.upper(b.matrix)))
            if gap > worst:
                worst, witness = gap, f"{a.name}<={b.name}"
        return ClauseVerdict("upper_monotonicity", worst <= self.tol2, witness if worst > self.tol2 else None, worst)

    def upper_matches_limit(self) -> ClauseVerdict:
        worst, witness = 0.0, None
        for entry in self.bank:
            if not entry.positive:
                continue
            gap = float(np.max(np.abs(self.upper(entry.matrix) - entry.limit)))
            if gap > worst:
                worst, witness = gap, entry.name
        return ClauseVerdict(
            "upper_matches_limit_on_convergent", worst <= self.tol2, witness if worst > self.tol2 else None, worst
        )

    def upper_null_forces_null(self) -> ClauseVerdict:
        worst, witness = 0.0, None
        hit = False
        for entry in self.bank:
            if not entry.positive:
                continue
            if float(np.max(self.upper(entry.matrix))) > self.cs.tol:
                continue
            hit = True
            v = estimate_limit(self.seq(entry), self.cs, LatticeElement.zeros(entry.dim))
            gap = 0.0 if v.ok else math.inf
            if gap > worst:
                worst, witness = gap, entry.name
        if not hit:
            return ClauseVerdict("upper_null_forces_null", False, "no null entries in bank", math.inf)
        return ClauseVerdict("upper_null_forces_null", worst <= self.tol2, witness if worst > self.tol2 else None, worst)

    def norm_null_forces_null(self) -> ClauseVerdict:
        cs_scalar = dataclasses.replace(self.cs, unit=None)
        worst, witness = 0.0, None
        hit = False
        for entry in self.bank:
            if float(np.max(np.abs(entry.limit))) > 0.0:
                continue
            hit = True
            norms = np.max(np.abs(entry.matrix), axis=1)
            v = estimate_limit(LatticeSequence(norms[:, None]), cs_scalar, LatticeElement.zeros(1))
            gap = 0.0 if v.ok else math.inf
            if gap > worst:
                worst, witness = gap, entry.name
        if not hit:
            return ClauseVerdict(NORM_CLAUSE, False, "no norm-null entries in bank", math.inf)
        return ClauseVerdict(NORM_CLAUSE, worst <= self.tol2, witness if worst > self.tol2 else None, worst)


def axiom_audit(cs: ConvergenceStructure, bank: Optional[Sequence[BankSequence]] = None) -> AuditReport:
    """Run every clause of the limit and upper-limit audits on the bank."""
    if bank is None:
        bank = standard_bank(cs.horizon)
    else:
        for entry in bank:
            if entry.matrix.shape[0] != cs.horizon:
                raise ValueError(f"bank entry {entry.name} evaluated at a different horizon")
    a = _Auditor(cs, bank)
    clauses = (
        a.linearity(),
        a.monotonicity(),
        a.constants(),
        a.absolute_value(),
        a.squeeze(),
        a.unit_decay(),
        a.eventual_lower_bound(),
        a.upper_finite_modification(),
        a.upper_subadditivity(),
        a.upper_monotonicity(),
        a.upper_matches_limit(),
        a.upper_null_forces_null(),
        a.norm_null_forces_null(),
    )
    return AuditReport(cs.kind, cs.horizon, cs.tol, clauses)
