"""Weighted interval measures with exhausting sets and grid quadrature.

Domains are intervals of the line (optionally the positive half-line with a
logarithmic metric), measures are given by a density against length, and all
integration happens on uniform midpoint grids in the metric coordinate: a
base pass and a doubled pass, combined by Richardson extrapolation, with the
pass difference as the error estimate.  Unbounded sets are exhausted by a
canonical increasing family of bounded windows, and failure of the window
integrals to settle is reported as divergence, never as a number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

DEFAULT_RESOLUTION = 2**14
DEFAULT_EXHAUST_CAP = 30


class MeasureError(ValueError):
    """Misuse of domains, measures, or quadrature."""


@dataclass(frozen=True)
class Interval:
    """Closed interval of the carrier; endpoints may be infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise MeasureError(f"bad interval [{self.lo}, {self.hi}]")

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, t: np.ndarray) -> np.ndarray:
        return (np.asarray(t) >= self.lo) & (np.asarray(t) <= self.hi)

    def is_bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)


def as_interval(a) -> Interval:
    if isinstance(a, Interval):
        return a
    lo, hi = a
    return Interval(float(lo), float(hi))


@dataclass(frozen=True)
class Domain:
    """Carrier interval plus the metric used for grids and diameters."""

    lower: float
    upper: float
    metric: str = "euclidean"  # or "log"

    def __post_init__(self):
        if self.metric not in ("euclidean", "log"):
            raise MeasureError(f"unknown metric {self.metric!r}")
        if self.metric == "log" and self.lower < 0.0:
            raise MeasureError("log metric needs a nonnegative carrier")
        if not self.lower < self.upper:
            raise MeasureError("empty carrier")

    @staticmethod
    def real_line() -> "Domain":
        return Domain(-math.inf, math.inf, "euclidean")

    @staticmethod
    def positive_halfline() -> "Domain":
        return Domain(0.0, math.inf, "log")

    @staticmethod
    def segment(lo: float, hi: float, metric: str = "euclidean") -> "Domain":
        return Domain(lo, hi, metric)

    @property
    def carrier(self) -> Interval:
        return Interval(self.lower, self.upper)

    def to_coord(self, t):
        if self.metric == "log":
            with np.errstate(divide="ignore"):
                return np.log(t)
        return np.asarray(t, dtype=np.float64)

    def from_coord(self, y):
        return np.exp(y) if self.metric == "log" else np.asarray(y, dtype=np.float64)

    def distance(self, a: float, b: float) -> float:
        ca, cb = float(self.to_coord(a)), float(self.to_coord(b))
        return abs(ca - cb)


@dataclass(frozen=True)
class QuadratureResult:
    value: Union[float, np.ndarray]
    error: float
    diverged: bool = False
    windows: int = 0

    def scalar(self) -> float:
        if self.diverged:
            return math.inf
        return float(np.asarray(self.value).reshape(-1)[0]) if np.ndim(self.value) else float(self.value)

    def to_dict(self) -> dict:
        val = np.asarray(self.value)
        return {
            "value": val.tolist() if val.ndim else float(val),
            "error": self.error,
            "diverged": self.diverged,
            "windows": self.windows,
        }


def _jacobian(domain: Domain, w_kind, weight_fn):
    """Integrand multiplier in metric coordinates: w(T(y)) * |T'(y)|."""
    if domain.metric == "euclidean":
        if w_kind == "lebesgue":
            return None  # multiplier 1
        if w_kind == "haar":
            return lambda t: 1.0 / t
        return weight_fn
    # log metric, T(y) = e^y, |T'| = e^y
    if w_kind == "haar":
        return None  # (1/t) * t = 1
    if w_kind == "lebesgue":
        return lambda t: t
    return lambda t: weight_fn(t) * t


@dataclass(frozen=True)
class MeasureSpace:
    """Domain plus density plus quadrature and exhaustion conventions.

    weight is "lebesgue" (density one), "haar" (density 1/t, natural on the
    positive half-line), or any positive vectorized callable.
    """

    domain: Domain
    weight: Union[str, Callable[[np.ndarray], np.ndarray]] = "lebesgue"
    resolution: int = DEFAULT_RESOLUTION
    exhaust_cap: int = DEFAULT_EXHAUST_CAP

    def __post_init__(self):
        if isinstance(self.weight, str) and self.weight not in ("lebesgue", "haar"):
            raise MeasureError(f"unknown weight {self.weight!r}")
        if self.resolution < 8:
            raise MeasureError("resolution too small")
        if isinstance(self.weight, str) and self.weight == "haar" and self.domain.metric != "log":
            raise MeasureError("haar weight pairs with the log metric carrier")

    @staticmethod
    def lebesgue_line(resolution: int = DEFAULT_RESOLUTION) -> "MeasureSpace":
        return MeasureSpace(Domain.real_line(), "lebesgue", resolution)

    @staticmethod
    def lebesgue_segment(lo: float, hi: float, resolution: int = DEFAULT_RESOLUTION) -> "MeasureSpace":
        return MeasureSpace(Domain.segment(lo, hi), "lebesgue", resolution)

    @staticmethod
    def haar_halfline(resolution: int = DEFAULT_RESOLUTION) -> "MeasureSpace":
        return MeasureSpace(Domain.positive_halfline(), "haar", resolution)

    @property
    def weight_kind(self) -> str:
        return self.weight if isinstance(self.weight, str) else "custom"

    # -- exhausting windows ---------------------------------------------

    def exhausting(self, m: int) -> Interval:
        """Canonical bounded window number m inside the carrier."""
        if m < 1:
            raise MeasureError("window index starts at 1")
        if self.domain.metric == "log":
            win = Interval(math.exp(-float(m)), math.exp(float(m)))
        else:
            win = Interval(-float(m), float(m))
        out = win.intersect(self.domain.carrier)
        if out is None:
            raise MeasureError("window misses the carrier")
        return out

    # -- measure of intervals ---------------------------------------------

    def measure(self, a) -> float:
        iv = as_interval(a).intersect(self.domain.carrier)
        if iv is None:
            return 0.0
        if self.weight_kind == "lebesgue":
            return iv.length
        if self.weight_kind == "haar":
            if iv.lo <= 0.0:
                return math.inf if iv.length > 0 else 0.0
            return math.log(iv.hi / iv.lo)
        if not iv.is_bounded():
            res = self.integrate_unbounded(lambda t: np.ones_like(t), iv)
            return math.inf if res.diverged else float(res.value)
        return float(self.integrate(lambda t: np.ones_like(t), iv).value)

    # -- quadrature -------------------------------------------------------

    def grid(self, a, resolution: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
        """Midpoint nodes in the carrier and their cell measures."""
        iv = as_interval(a).intersect(self.domain.carrier)
        if iv is None or iv.length == 0.0:
            return np.empty(0), np.empty(0)
        if not iv.is_bounded() or (self.domain.metric == "log" and iv.lo <= 0.0):
            raise MeasureError("grid needs a bounded window (positive lower end under the log metric)")
        k = resolution or self.resolution
        c, d = float(self.domain.to_coord(iv.lo)), float(self.domain.to_coord(iv.hi))
        h = (d - c) / k
        y = c + (np.arange(k) + 0.5) * h
        t = self.domain.from_coord(y)
        mult = _jacobian(self.domain, self.weight_kind, self.weight if callable(self.weight) else None)
        weights = np.full(k, h) if mult is None else h * mult(t)
        return t, weights

    def integrate(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        a,
        breaks: Iterable[float] = (),
        resolution: Optional[int] = None,
        richardson: bool = True,
    ) -> QuadratureResult:
        """Integral of fn against the measure over a bounded interval.

        Midpoint rule on a uniform grid in metric coordinates, run at the
        base resolution and doubled, then Richardson-extrapolated; breaks
        list the integrand's jump or kink locations so each smooth piece is
        integrated separately.
        """
        iv = as_interval(a).intersect(self.domain.carrier)
        if iv is None or iv.length == 0.0:
            return QuadratureResult(0.0, 0.0)
        if not iv.is_bounded() or (self.domain.metric == "log" and iv.lo <= 0.0):
            raise MeasureError("integrate needs a bounded window; use integrate_unbounded")
        k = resolution or self.resolution
        c, d = float(self.domain.to_coord(iv.lo)), float(self.domain.to_coord(iv.hi))
        cuts = sorted({float(self.domain.to_coord(b)) for b in breaks if iv.lo < b < iv.hi})
        edges = [c, *cuts, d]
        mult = _jacobian(self.domain, self.weight_kind, self.weight if callable(self.weight) else None)

        def midpoint(lo: float, hi: float, nodes: int):
            h = (hi - lo) / nodes
            y = lo + (np.arange(nodes) + 0.5) * h
            t = self.domain.from_coord(y)
            vals = np.asarray(fn(t), dtype=np.float64)
            if mult is not None:
                vals = vals * (mult(t) if vals.ndim == 1 else mult(t)[:, None])
            return h * vals.sum(axis=0)

        total, err = None, 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            coarse = midpoint(lo, hi, k)
            fine = midpoint(lo, hi, 2 * k)
            piece = (4.0 * fine - coarse) / 3.0 if richardson else fine
            err += float(np.max(np.abs(fine - coarse))) / 3.0
            total = piece if total is None else total + piece
        return QuadratureResult(total, err)

    def integrate_unbounded(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        a=None,
        breaks: Iterable[float] = (),
        resolution: Optional[int] = None,
        atol: float = 1e-10,
    ) -> QuadratureResult:
        """Exhaust an unbounded (or boundary-touching) set by windows.

        Stops when window increments fall below atol; if they neither decay
        nor stay bounded by the cap, the result is flagged as divergent.
        """
        target = self.domain.carrier if a is None else as_interval(a).intersect(self.domain.carrier)
        if target is None:
            return QuadratureResult(0.0, 0.0)

        def shells(m: int) -> tuple[Interval, Interval]:
            # the two new pieces window m adds over window m - 1
            if self.domain.metric == "log":
                return (Interval(math.exp(-float(m)), math.exp(-float(m - 1))),
                        Interval(math.exp(float(m - 1)), math.exp(float(m))))
            return Interval(-float(m), -float(m - 1)), Interval(float(m - 1), float(m))

        # annulus exhaustion: each new shell is integrated at full resolution,
        # so increments measure the true tail rather than quadrature drift on
        # an ever-wider window
        increments: list[float] = []
        result_err = 0.0
        val = np.asarray(0.0)
        seen = False
        first = self.exhausting(1).intersect(target)
        if first is not None and first.length > 0.0:
            res = self.integrate(fn, first, breaks=breaks, resolution=resolution)
            val = np.asarray(res.value, dtype=np.float64)
            result_err = res.error
            seen = True
        for m in range(2, self.exhaust_cap + 1):
            if target.intersect(self.exhausting(m - 1)) == target:
                # the previous window already swallowed the whole target set
                return QuadratureResult(val, result_err, windows=m - 1)
            inc_val = None
            for shell in shells(m):
                piece = shell.intersect(target)
                if piece is None or piece.length == 0.0:
                    continue
                res = self.integrate(fn, piece, breaks=breaks, resolution=resolution)
                part = np.asarray(res.value, dtype=np.float64)
                inc_val = part if inc_val is None else inc_val + part
                result_err += res.error
            if inc_val is None:
                if not seen:
                    continue
                return QuadratureResult(val, result_err, windows=m)
            seen = True
            val = val + inc_val
            inc = float(np.max(np.abs(inc_val)))
            increments.append(inc)
            if inc <= atol:
                return QuadratureResult(val, result_err + inc, windows=m)
        # the cap was reached: geometric tails are extrapolated, anything
        # slower is reported as divergence
        if len(increments) >= 2 and increments[-2] > 0.0:
            ratio = increments[-1] / increments[-2]
            if ratio < 0.95:
                # geometric tail bound, widened: power-law decays near the
                # ratio cutoff overshoot the plain geometric sum
                tail = 3.0 * increments[-1] * ratio / (1.0 - ratio)
                return QuadratureResult(val, result_err + tail, windows=self.exhaust_cap)
        return QuadratureResult(val, math.inf, diverged=True, windows=self.exhaust_cap)


def quadrature_reference(
    fn: Callable[[np.ndarray], np.ndarray],
    a,
    ms: MeasureSpace,
    breaks: Iterable[float] = (),
    resolution: Optional[int] = None,
) -> QuadratureResult:
    """Reference integral of fn over a set, exhausting when unbounded."""
    iv = None if a is None else as_interval(a)
    if iv is not None:
        clipped = iv.intersect(ms.domain.carrier)
        if clipped is None or clipped.length == 0.0:
            return QuadratureResult(0.0, 0.0)
        boundary_touch = ms.domain.metric == "log" and clipped.lo <= 0.0
        if clipped.is_bounded() and not boundary_touch:
            return ms.integrate(fn, clipped, breaks=breaks, resolution=resolution)
    return ms.integrate_unbounded(fn, iv, breaks=breaks, resolution=resolution)
