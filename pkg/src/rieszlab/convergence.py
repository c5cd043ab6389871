"""Pluggable convergence verdicts for grid-lattice sequences.

A sequence here is a finite evaluated stretch x_1..x_N of grid functions.
Six interchangeable structures decide "x_n converges to x": plain eventual
closeness, order closeness against a shrinking regulator, relative-uniform
closeness against a fixed unit, filter membership (cofinite, density, or an
explicit finite family), almost convergence (window averages uniformly over
offsets), and Cesaro averaging.  Every judgement is three-valued: true,
false, or inconclusive when the horizon cannot resolve it.  Companion
upper-limit estimators mirror each structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .lattice import (
    DimensionMismatch,
    LatticeElement,
    LatticeError,
    OrderUnit,
    OSequence,
)

KINDS = ("ordinary", "order", "relative_uniform", "filter", "almost", "cesaro", "broken")


class ConvergenceError(LatticeError):
    """Misuse of a convergence structure."""


class InvalidFilterError(ConvergenceError):
    """Explicit family fails the filter-base test."""


class UndefinedAverageError(ConvergenceError):
    """Averaging is undefined on +inf entries."""


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Verdict:
    status: str  # "true" | "false" | "inconclusive"
    witness: Optional[int] = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in ("true", "false", "inconclusive"):
            raise ConvergenceError(f"bad verdict status {self.status!r}")

    @property
    def ok(self) -> bool:
        return self.status == "true"

    def to_dict(self) -> dict:
        return {"status": self.status, "witness": self.witness, "detail": dict(self.detail)}


# ---------------------------------------------------------------------------
# sequences


@dataclass(frozen=True)
class LatticeSequence:
    """Evaluated stretch of a sequence: row n-1 holds x_n on the grid."""

    matrix: np.ndarray  # (N, T) float64, finite

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim == 1:
            m = m[:, None]
        if m.ndim != 2 or m.shape[0] < 1:
            raise ConvergenceError(f"need an (N, T) matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise UndefinedAverageError("sequence contains non-finite entries")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def horizon(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def term(self, n: int) -> LatticeElement:
        if not 1 <= n <= self.horizon:
            raise ConvergenceError(f"index {n} outside 1..{self.horizon}")
        return LatticeElement.from_values(self.matrix[n - 1])

    @staticmethod
    def from_generator(gen: Callable[[int], Union[LatticeElement, np.ndarray, float]], horizon: int) -> "LatticeSequence":
        rows = []
        for n in range(1, horizon + 1):
            x = gen(n)
            if isinstance(x, LatticeElement):
                rows.append(x.finite_values())
            else:
                rows.append(np.atleast_1d(np.asarray(x, dtype=np.float64)))
        return LatticeSequence(np.vstack(rows))

    @staticmethod
    def from_reals(values: Sequence[float]) -> "LatticeSequence":
        return LatticeSequence(np.asarray(values, dtype=np.float64)[:, None])


def _subset_mask(horizon: int, subset) -> np.ndarray:
    """Normalize an index subset (1-based indices or boolean mask) to a mask."""
    if subset is None:
        return np.ones(horizon, dtype=bool)
    arr = np.asarray(subset)
    if arr.dtype == bool:
        if arr.size != horizon:
            raise ConvergenceError("boolean subset mask length differs from horizon")
        mask = arr.copy()
    else:
        mask = np.zeros(horizon, dtype=bool)
        idx = arr.astype(int)
        if idx.size and (idx.min() < 1 or idx.max() > horizon):
            raise ConvergenceError("subset indices outside 1..N")
        mask[idx - 1] = True
    if not mask.any():
        raise ConvergenceError("subset is empty on the evaluated horizon")
    return mask


# ---------------------------------------------------------------------------
# filters


@dataclass(frozen=True)
class FilterSpec:
    """One of: cofinite, density(theta), or an explicit finite family."""

    kind: str
    theta: float = 0.99
    sets: tuple = ()

    def __post_init__(self):
        if self.kind not in ("cofinite", "density", "explicit"):
            raise InvalidFilterError(f"unknown filter kind {self.kind!r}")
        if self.kind == "density" and not 0.5 < self.theta < 1.0:
            raise InvalidFilterError("density threshold must sit in (0.5, 1)")
        if self.kind == "explicit":
            canon = tuple(tuple(sorted(set(int(i) for i in f))) for f in self.sets)
            if not canon:
                raise InvalidFilterError("explicit family is empty")
            object.__setattr__(self, "sets", canon)

    @staticmethod
    def cofinite() -> "FilterSpec":
        return FilterSpec("cofinite")

    @staticmethod
    def density(theta: float = 0.99) -> "FilterSpec":
        return FilterSpec("density", theta=theta)

    @staticmethod
    def explicit(sets) -> "FilterSpec":
        return FilterSpec("explicit", sets=tuple(tuple(f) for f in sets))

    def validate(self, horizon: int) -> None:
        if self.kind != "explicit":
            return
        common = None
        for f in self.sets:
            if not f:
                raise InvalidFilterError("explicit family contains an empty set")
            if f[0] < 1 or f[-1] > horizon:
                raise InvalidFilterError("explicit set leaves the evaluated horizon")
            s = set(f)
            common = s if common is None else (common & s)
        if not common:
            raise InvalidFilterError("explicit family has empty intersection (not a filter base)")


# ---------------------------------------------------------------------------
# structures


@dataclass(frozen=True)
class ConvergenceStructure:
    """Parameters fixing one notion of convergence at a finite horizon.

    kind "broken" is a self-test fixture: it mimics the ordinary structure
    but sign-flips every estimate, so monotonicity audits must catch it.
    """

    kind: str
    horizon: int
    tol: float = 1e-3
    filter: Optional[FilterSpec] = None
    offsets: Optional[int] = None  # almost kind: largest window offset M
    unit: Optional[LatticeElement] = None  # relative-uniform regulator
    regulator: Optional[OSequence] = None  # order kind: shrinking bound
    tail_fraction: float = 0.1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConvergenceError(f"unknown convergence kind {self.kind!r}")
        if self.horizon < 4:
            raise ConvergenceError("horizon must be >= 4")
        if self.tol <= 0:
            raise ConvergenceError("tol must be > 0")
        if self.kind == "filter":
            if self.filter is None:
                object.__setattr__(self, "filter", FilterSpec.cofinite())
        elif self.filter is not None:
            raise ConvergenceError("filter spec only applies to the filter kind")
        if not 0.0 < self.tail_fraction <= 1.0:
            raise ConvergenceError("tail_fraction must sit in (0, 1]")

    # -- helpers -------------------------------------------------------

    def effective_offsets(self) -> int:
        m = self.offsets if self.offsets is not None else self.horizon // 10
        if m < 1 or m >= self.horizon - 1:
            raise ConvergenceError(f"offset bound {m} leaves no window at horizon {self.horizon}")
        return m

    def unit_values(self, dim: int) -> np.ndarray:
        if self.unit is None:
            return np.ones(dim)
        if self.unit.dim != dim:
            raise DimensionMismatch(f"regulator unit dim {self.unit.dim} vs sequence dim {dim}")
        return OrderUnit(self.unit).element.values

    def tail_length(self, n: Optional[int] = None) -> int:
        n = self.horizon if n is None else n
        return min(n, max(4, math.ceil(self.tail_fraction * n)))

    def null_verdict(self, seq: LatticeSequence) -> Verdict:
        return estimate_limit(seq, self, LatticeElement.zeros(seq.dim))


def _check_horizon(seq: LatticeSequence, cs: ConvergenceStructure) -> None:
    if seq.horizon != cs.horizon:
        raise ConvergenceError(f"sequence horizon {seq.horizon} differs from structure horizon {cs.horizon}")


def _still_shrinking(dev: np.ndarray) -> bool:
    # trend heuristic behind "inconclusive": deviations dropped materially
    # across the last two quarters of the evaluated stretch
    n = dev.size
    if n < 8:
        return False
    a = float(np.max(dev[n // 2 : 3 * n // 4]))
    b = float(np.max(dev[3 * n // 4 :]))
    # harmonic-rate decay shrinks by about a third between these quarters
    return b <= 0.75 * a and b > 0.0


def _deviations(seq: LatticeSequence, candidate: LatticeElement, unit_vals: np.ndarray) -> np.ndarray:
    if candidate.dim != seq.dim:
        raise DimensionMismatch(f"candidate dim {candidate.dim} vs sequence dim {seq.dim}")
    return np.max(np.abs(seq.matrix - candidate.finite_values()[None, :]) / unit_vals[None, :], axis=1)


def _cofinite_verdict(member: np.ndarray, tail_len: int, dev: Optional[np.ndarray] = None) -> Verdict:
    """Membership set must swallow the whole final stretch."""
    n = member.size
    violations = np.nonzero(~member)[0]
    if violations.size == 0:
        return Verdict("true")
    last = int(violations[-1]) + 1
    if last <= n - tail_len:
        return Verdict("true", witness=last, detail={"last_violation": last})
    if dev is not None and _still_shrinking(dev):
        return Verdict("inconclusive", witness=last, detail={"last_violation": last})
    return Verdict("false", witness=last, detail={"last_violation": last})


# ---------------------------------------------------------------------------
# averaging estimators


@dataclass(frozen=True)
class AveragedEstimate:
    value: LatticeElement
    verdict: Verdict
    sup_deviation: float

    def to_dict(self) -> dict:
        return {
            "value": self.value.values.tolist(),
            "verdict": self.verdict.to_dict(),
            "sup_deviation": self.sup_deviation,
        }


def cesaro_limit(seq: LatticeSequence, tol: float = 1e-3) -> AveragedEstimate:
    """Partial averages (x_1 + .. + x_N)/N with a stabilization verdict.

    True iff the running averages over the second half of the horizon stay
    within tol (in sup norm) of the final average.
    """
    n = seq.horizon
    csum = np.cumsum(seq.matrix, axis=0)
    averages = csum / np.arange(1, n + 1)[:, None]
    final = averages[-1]
    half = n // 2
    dev = np.max(np.abs(averages[half:] - final[None, :]), axis=1)
    sup_dev = float(np.max(dev)) if dev.size else 0.0
    if sup_dev <= tol:
        verdict = Verdict("true", detail={"sup_deviation": sup_dev})
    elif sup_dev <= 10.0 * tol:
        # deviations from the final average always shrink, so nearness is the
        # only usable "still converging" signal here
        verdict = Verdict("inconclusive", detail={"sup_deviation": sup_dev})
    else:
        w = int(np.argmax(dev)) + half + 1
        verdict = Verdict("false", witness=w, detail={"sup_deviation": sup_dev})
    return AveragedEstimate(LatticeElement.from_values(final), verdict, sup_dev)


def _window_averages(seq: LatticeSequence, offsets: int, length: int) -> np.ndarray:
    csum = np.vstack([np.zeros((1, seq.dim)), np.cumsum(seq.matrix, axis=0)])
    starts = np.arange(0, offsets + 1)
    return (csum[starts + length] - csum[starts]) / length


def almost_limit(seq: LatticeSequence, offsets: Optional[int] = None, tol: float = 1e-3) -> AveragedEstimate:
    """Window averages uniformly over shifts: estimate the common value.

    Uses the largest window length fitting every offset; the estimate is the
    entrywise midrange of the shifted window averages, and the verdict asks
    that their spread stays within tol.
    """
    n = seq.horizon
    m = offsets if offsets is not None else n // 10
    if m < 1:
        raise ConvergenceError("need at least one window offset")
    length = n - m
    if length < 2:
        return AveragedEstimate(
            seq.term(n),
            Verdict("inconclusive", detail={"reason": "horizon exhausted by offsets"}),
            math.inf,
        )
    win = _window_averages(seq, m, length)
    hi, lo = np.max(win, axis=0), np.min(win, axis=0)
    value = LatticeElement.from_values((hi + lo) / 2.0)
    sup_dev = float(np.max((hi - lo) / 2.0))
    if sup_dev <= tol:
        verdict = Verdict("true", detail={"window": length, "sup_deviation": sup_dev})
    else:
        short = _window_averages(seq, m, max(2, length // 2))
        short_dev = float(np.max((np.max(short, axis=0) - np.min(short, axis=0)) / 2.0))
        status = "inconclusive" if sup_dev <= 0.6 * short_dev else "false"
        verdict = Verdict(status, detail={"window": length, "sup_deviation": sup_dev, "half_window_deviation": short_dev})
    return AveragedEstimate(value, verdict, sup_dev)


# ---------------------------------------------------------------------------
# upper limits


@dataclass(frozen=True)
class LimsupResult:
    value: LatticeElement
    tail_bias_caveat: bool = False

    def to_dict(self) -> dict:
        return {"value": self.value.values.tolist(), "tail_bias_caveat": self.tail_bias_caveat}


def _eventually_monotone(matrix: np.ndarray) -> bool:
    n = matrix.shape[0]
    tail = matrix[max(0, n - max(4, n // 4)) :]
    if tail.shape[0] < 3:
        return True
    d = np.diff(tail, axis=0)
    per_entry = np.all(d <= 1e-12, axis=0) | np.all(d >= -1e-12, axis=0)
    return bool(per_entry.all())


def order_limsup(seq: LatticeSequence, subset=None) -> LimsupResult:
    """Entrywise min over m <= N of (max over the evaluated tail m..N).

    The inner suprema are truncated at the horizon, so a sequence that keeps
    oscillating up to N gets a tail-biased value; the caveat flag reports
    that the evaluated tail is not entrywise monotone.
    """
    mask = _subset_mask(seq.horizon, subset)
    rows = seq.matrix[mask]
    suffix_max = np.maximum.accumulate(rows[::-1], axis=0)[::-1]
    value = LatticeElement.from_values(np.min(suffix_max, axis=0))
    return LimsupResult(value, tail_bias_caveat=not _eventually_monotone(rows))


def filter_limsup(seq: LatticeSequence, fspec: FilterSpec, subset=None) -> LimsupResult:
    """Entrywise smallest eventual bound along the chosen filter."""
    fspec.validate(seq.horizon)
    if fspec.kind == "cofinite":
        return order_limsup(seq, subset=subset)
    if fspec.kind == "density":
        mask = _subset_mask(seq.horizon, subset)
        rows = seq.matrix[mask]
        # smallest q with empirical density of {x_n <= q} at least theta
        q = np.quantile(rows, fspec.theta, axis=0, method="inverted_cdf")
        return LimsupResult(LatticeElement.from_values(np.atleast_1d(q)), tail_bias_caveat=not _eventually_monotone(rows))
    # explicit family: min over listed sets of the max over that set
    mask = _subset_mask(seq.horizon, subset)
    best = None
    for f in fspec.sets:
        idx = [i - 1 for i in f if mask[i - 1]]
        if not idx:
            raise InvalidFilterError("explicit set misses the index subset entirely")
        top = np.max(seq.matrix[idx], axis=0)
        best = top if best is None else np.minimum(best, top)
    return LimsupResult(LatticeElement.from_values(best), tail_bias_caveat=False)


def norm_filter_limsup(seq: LatticeSequence, fspec: FilterSpec, unit: Optional[LatticeElement] = None, subset=None) -> float:
    """Filter upper limit of the unit-norm sequence (a single real)."""
    dim = seq.dim
    uvals = np.ones(dim) if unit is None else OrderUnit(unit).element.values
    norms = np.max(np.abs(seq.matrix) / uvals[None, :], axis=1)
    res = filter_limsup(LatticeSequence(norms[:, None]), fspec, subset=subset)
    return float(res.value.values[0])


def limsup(seq: LatticeSequence, cs: ConvergenceStructure, subset=None) -> LimsupResult:
    """Upper-limit companion of the structure's convergence notion."""
    _check_horizon(seq, cs)
    if cs.kind in ("ordinary", "order", "relative_uniform", "broken"):
        return order_limsup(seq, subset=subset)
    if cs.kind == "filter":
        return filter_limsup(seq, cs.filter, subset=subset)
    if cs.kind == "cesaro":
        n = seq.horizon
        averages = np.cumsum(seq.matrix, axis=0) / np.arange(1, n + 1)[:, None]
        return order_limsup(LatticeSequence(averages), subset=subset)
    # almost: largest-window averages, worst offset
    mask = _subset_mask(seq.horizon, subset)
    sub = LatticeSequence(seq.matrix[mask])
    m = min(cs.effective_offsets(), max(1, sub.horizon - 2))
    win = _window_averages(sub, m, sub.horizon - m)
    return LimsupResult(LatticeElement.from_values(np.max(win, axis=0)), tail_bias_caveat=False)


def limsup_restriction_gap(seq: LatticeSequence, cs: ConvergenceStructure, subset) -> dict:
    """Compare the upper limit over all indices against a restriction."""
    full = limsup(seq, cs)
    restricted = limsup(seq, cs, subset=subset)
    gap = float(np.max(np.abs(full.value.values - restricted.value.values)))
    return {"full": full, "restricted": restricted, "gap": gap}


# ---------------------------------------------------------------------------
# limit verdicts and estimates


def estimate_limit(seq: LatticeSequence, cs: ConvergenceStructure, candidate: LatticeElement) -> Verdict:
    """Judge "x_n converges to candidate" under the structure at its horizon."""
    _check_horizon(seq, cs)
    unit_vals = cs.unit_values(seq.dim)
    if cs.kind == "broken":
        # sign-flipped self-test fixture
        dev = _deviations(seq, candidate.scale(-1.0), unit_vals)
        return _cofinite_verdict(dev <= cs.tol, cs.tail_length(), dev)
    if cs.kind in ("ordinary", "relative_uniform"):
        dev = _deviations(seq, candidate, unit_vals)
        return _cofinite_verdict(dev <= cs.tol, cs.tail_length(), dev)
    if cs.kind == "order":
        return _order_verdict(seq, cs, candidate, unit_vals)
    if cs.kind == "filter":
        return _filter_verdict(seq, cs, candidate, unit_vals)
    if cs.kind == "almost":
        est = almost_limit(seq, cs.effective_offsets(), cs.tol)
        dev = float(np.max(np.abs(est.value.values - candidate.finite_values()) / unit_vals))
        total = dev + est.sup_deviation
        if total <= cs.tol:
            return Verdict("true", detail={"deviation": total})
        if est.verdict.status == "inconclusive":
            return Verdict("inconclusive", detail={"deviation": total})
        return Verdict("false", detail={"deviation": total})
    # cesaro
    est = cesaro_limit(seq, cs.tol)
    dev = float(np.max(np.abs(est.value.values - candidate.finite_values()) / unit_vals))
    if dev <= cs.tol and est.verdict.ok:
        return Verdict("true", detail={"deviation": dev})
    if est.verdict.status == "inconclusive" or (_still_shrinking(np.abs(seq.matrix - candidate.finite_values()).max(axis=1)) and dev <= 10 * cs.tol):
        return Verdict("inconclusive", detail={"deviation": dev})
    return Verdict("false", detail={"deviation": dev})


def _order_verdict(seq, cs, candidate, unit_vals) -> Verdict:
    reg = cs.regulator
    if reg is None:
        unit_el = LatticeElement.from_values(unit_vals)
        reg = OSequence.harmonic(unit_el, 1024)
    diffs = np.abs(seq.matrix - candidate.finite_values()[None, :])
    tail_len = cs.tail_length()
    l = 1
    worst: Optional[Verdict] = None
    while l <= reg.horizon:
        sigma = reg.term(l)
        if sigma.dim != seq.dim:
            raise DimensionMismatch("regulator dim differs from sequence dim")
        if float(np.max(sigma.values)) < cs.tol:
            break  # scales below tolerance are not resolvable
        member = np.all(diffs <= sigma.values[None, :], axis=1)
        v = _cofinite_verdict(member, tail_len, np.max(diffs / unit_vals[None, :], axis=1))
        if v.status == "false":
            return Verdict("false", witness=v.witness, detail={"regulator_index": l, **v.detail})
        if v.status == "inconclusive":
            worst = Verdict("inconclusive", witness=v.witness, detail={"regulator_index": l, **v.detail})
        l *= 2
    return worst if worst is not None else Verdict("true")


def _filter_verdict(seq, cs, candidate, unit_vals) -> Verdict:
    fspec = cs.filter
    fspec.validate(seq.horizon)
    dev = _deviations(seq, candidate, unit_vals)
    member = dev <= cs.tol
    if fspec.kind == "cofinite":
        return _cofinite_verdict(member, cs.tail_length(), dev)
    if fspec.kind == "density":
        density = float(np.mean(member))
        detail = {"membership_density": density, "threshold": fspec.theta}
        if abs(density - fspec.theta) <= cs.tol:
            return Verdict("inconclusive", detail=detail)
        return Verdict("true" if density > fspec.theta else "false", detail=detail)
    # explicit: the membership set must contain one listed base set
    for f in fspec.sets:
        idx = np.array(f, dtype=int) - 1
        if member[idx].all():
            return Verdict("true", detail={"containing_set_size": len(f)})
    worst = int(np.argmax(dev)) + 1
    return Verdict("false", witness=worst, detail={"max_deviation": float(np.max(dev))})


@dataclass(frozen=True)
class EstimateResult:
    value: LatticeElement
    verdict: Verdict

    def to_dict(self) -> dict:
        return {"value": self.value.values.tolist(), "verdict": self.verdict.to_dict()}


def structure_estimate(seq: LatticeSequence, cs: ConvergenceStructure) -> EstimateResult:
    """Candidate-free limit estimate under the structure, plus its verdict."""
    _check_horizon(seq, cs)
    if cs.kind == "cesaro":
        est = cesaro_limit(seq, cs.tol)
        return EstimateResult(est.value, est.verdict)
    if cs.kind == "almost":
        est = almost_limit(seq, cs.effective_offsets(), cs.tol)
        return EstimateResult(est.value, est.verdict)
    if cs.kind == "filter" and cs.filter.kind == "density":
        value = LatticeElement.from_values(np.median(seq.matrix, axis=0))
        return EstimateResult(value, estimate_limit(seq, cs, value))
    if cs.kind == "filter" and cs.filter.kind == "explicit":
        cs.filter.validate(seq.horizon)
        common = set(cs.filter.sets[0])
        for f in cs.filter.sets[1:]:
            common &= set(f)
        idx = np.array(sorted(common), dtype=int) - 1
        rows = seq.matrix[idx]
        value = LatticeElement.from_values((rows.max(axis=0) + rows.min(axis=0)) / 2.0)
        return EstimateResult(value, estimate_limit(seq, cs, value))
    # tail midrange for the cofinite-flavoured kinds
    tail = seq.matrix[seq.horizon - cs.tail_length() :]
    value_arr = (tail.max(axis=0) + tail.min(axis=0)) / 2.0
    if cs.kind == "broken":
        value_arr = -value_arr
    value = LatticeElement.from_values(value_arr)
    return EstimateResult(value, estimate_limit(seq, cs, value))
