"""Finite-grid vector lattice with an adjoined per-entry plus-infinity.

Elements are real vectors indexed by a finite grid, ordered componentwise.
Every lattice operation (join, meet, absolute value) acts entrywise, and a
boolean mask marks entries that sit at +inf.  The mask is the only carrier of
infiniteness: stored floats are always finite, so lattice algebra stays
bit-exact and the convention 0 * (+inf) = 0 is testable literally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

import numpy as np

MAX_GRID_SIZE = 100_000


class LatticeError(ValueError):
    """Base error for grid-lattice misuse."""


class DimensionMismatch(LatticeError):
    """Operands live on different index grids."""


class InfiniteEntryError(LatticeError):
    """Operation undefined on entries at +inf (no -inf is adjoined)."""


def _as_float_array(values: Union[float, Iterable[float], np.ndarray]) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1:
        raise LatticeError(f"grid elements are 1-d, got shape {arr.shape}")
    if not (1 <= arr.size <= MAX_GRID_SIZE):
        raise LatticeError(f"index set size {arr.size} outside 1..{MAX_GRID_SIZE}")
    return arr


@dataclass(frozen=True)
class LatticeElement:
    """One grid function: finite float entries plus a +inf mask."""

    values: np.ndarray
    infinite: np.ndarray

    def __post_init__(self):
        vals = _as_float_array(self.values)
        if not np.all(np.isfinite(vals)):
            raise LatticeError("non-finite floats rejected; use the infinite mask")
        inf = np.asarray(self.infinite, dtype=bool)
        if inf.shape != vals.shape:
            raise DimensionMismatch("mask shape differs from value shape")
        # canonical form: masked entries store 0.0 so equality is well defined
        vals = np.where(inf, 0.0, vals)
        vals.flags.writeable = False
        inf = inf.copy()
        inf.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "infinite", inf)

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_values(values: Union[float, Iterable[float], np.ndarray]) -> "LatticeElement":
        vals = _as_float_array(values)
        return LatticeElement(vals, np.zeros(vals.shape, dtype=bool))

    @staticmethod
    def from_scalar(value: float, dim: int = 1) -> "LatticeElement":
        return LatticeElement.from_values(np.full(dim, float(value)))

    @staticmethod
    def zeros(dim: int) -> "LatticeElement":
        return LatticeElement.from_scalar(0.0, dim)

    @staticmethod
    def ones(dim: int) -> "LatticeElement":
        return LatticeElement.from_scalar(1.0, dim)

    @staticmethod
    def infinity(dim: int) -> "LatticeElement":
        return LatticeElement(np.zeros(dim), np.ones(dim, dtype=bool))

    # -- basic queries -------------------------------------------------

    @property
    def dim(self) -> int:
        return self.values.size

    @property
    def has_infinite(self) -> bool:
        return bool(self.infinite.any())

    def entry(self, i: int) -> float:
        return math.inf if self.infinite[i] else float(self.values[i])

    def finite_values(self) -> np.ndarray:
        if self.has_infinite:
            raise InfiniteEntryError("element has +inf entries")
        return self.values

    def _check_dim(self, other: "LatticeElement") -> None:
        if self.dim != other.dim:
            raise DimensionMismatch(f"grids of size {self.dim} and {other.dim}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatticeElement):
            return NotImplemented
        return (
            self.dim == other.dim
            and bool(np.array_equal(self.infinite, other.infinite))
            and bool(np.array_equal(self.values, other.values))
        )

    def __hash__(self):
        return hash((self.values.tobytes(), self.infinite.tobytes()))

    # -- vector algebra ------------------------------------------------

    def __add__(self, other: "LatticeElement") -> "LatticeElement":
        self._check_dim(other)
        inf = self.infinite | other.infinite
        return LatticeElement(np.where(inf, 0.0, self.values + other.values), inf)

    def __neg__(self) -> "LatticeElement":
        if self.has_infinite:
            raise InfiniteEntryError("-(+inf) leaves the space")
        return LatticeElement(-self.values, self.infinite)

    def __sub__(self, other: "LatticeElement") -> "LatticeElement":
        self._check_dim(other)
        if other.has_infinite:
            raise InfiniteEntryError("subtracting +inf leaves the space")
        inf = self.infinite.copy()
        return LatticeElement(np.where(inf, 0.0, self.values - other.values), inf)

    def scale(self, alpha: float) -> "LatticeElement":
        """Scalar multiple with the convention 0 * (+inf) = 0."""
        alpha = float(alpha)
        if alpha == 0.0:
            return LatticeElement.zeros(self.dim)
        if alpha < 0.0 and self.has_infinite:
            raise InfiniteEntryError("negative multiple of +inf leaves the space")
        return LatticeElement(np.where(self.infinite, 0.0, alpha * self.values), self.infinite)

    def __mul__(self, other: Union[float, "LatticeElement"]) -> "LatticeElement":
        if isinstance(other, LatticeElement):
            return self.product(other)
        return self.scale(float(other))

    def __rmul__(self, alpha: float) -> "LatticeElement":
        return self.scale(float(alpha))

    def product(self, other: "LatticeElement") -> "LatticeElement":
        """Componentwise product; inf * 0 = 0, inf * positive = inf."""
        self._check_dim(other)
        vals = self.values * other.values
        a_inf, b_inf = self.infinite, other.infinite
        # inf entries: result inf unless the finite partner is exactly 0
        inf = (a_inf & (b_inf | (other.values > 0.0))) | (b_inf & (a_inf | (self.values > 0.0)))
        neg_partner = (a_inf & ~b_inf & (other.values < 0.0)) | (b_inf & ~a_inf & (self.values < 0.0))
        if neg_partner.any():
            raise InfiniteEntryError("product of +inf with a negative entry leaves the space")
        return LatticeElement(np.where(inf, 0.0, vals), inf)

    # -- lattice structure ----------------------------------------------

    def le(self, other: "LatticeElement") -> bool:
        """Componentwise order; +inf dominates every finite entry."""
        self._check_dim(other)
        ok = other.infinite | ((~self.infinite) & (self.values <= other.values))
        return bool(ok.all())

    def join(self, other: "LatticeElement") -> "LatticeElement":
        self._check_dim(other)
        inf = self.infinite | other.infinite
        vals = np.where(
            self.infinite, other.values, np.where(other.infinite, self.values, np.maximum(self.values, other.values))
        )
        return LatticeElement(np.where(inf, 0.0, vals), inf)

    def meet(self, other: "LatticeElement") -> "LatticeElement":
        self._check_dim(other)
        inf = self.infinite & other.infinite
        vals = np.where(
            self.infinite, other.values, np.where(other.infinite, self.values, np.minimum(self.values, other.values))
        )
        return LatticeElement(np.where(inf, 0.0, vals), inf)

    def abs(self) -> "LatticeElement":
        return LatticeElement(np.abs(self.values), self.infinite)

    def is_positive(self) -> bool:
        return bool(((self.values >= 0.0) | self.infinite).all())

    def __repr__(self):
        if self.has_infinite:
            shown = [("inf" if self.infinite[i] else repr(float(self.values[i]))) for i in range(min(self.dim, 6))]
        else:
            shown = [repr(float(v)) for v in self.values[:6]]
        tail = ", ..." if self.dim > 6 else ""
        return f"LatticeElement([{', '.join(shown)}{tail}], dim={self.dim})"


def join(x: LatticeElement, y: LatticeElement) -> LatticeElement:
    return x.join(y)


def meet(x: LatticeElement, y: LatticeElement) -> LatticeElement:
    return x.meet(y)


def absolute(x: LatticeElement) -> LatticeElement:
    return x.abs()


@dataclass(frozen=True)
class OrderUnit:
    """Strictly positive grid function used as the order unit e."""

    element: LatticeElement

    def __post_init__(self):
        e = self.element
        if e.has_infinite or not (e.values > 0.0).all():
            raise LatticeError("order unit must be strictly positive and finite")

    @property
    def dim(self) -> int:
        return self.element.dim

    @staticmethod
    def ones(dim: int) -> "OrderUnit":
        return OrderUnit(LatticeElement.ones(dim))


def order_unit_norm(x: LatticeElement, e: Union[OrderUnit, LatticeElement]) -> float:
    """inf{eps > 0 : |x| <= eps * e}, which on a grid is max |x_i| / e_i.

    Entries of x at +inf yield math.inf (the infinite-norm signal).
    """
    unit = e if isinstance(e, OrderUnit) else OrderUnit(e)
    if x.dim != unit.dim:
        raise DimensionMismatch(f"grids of size {x.dim} and {unit.dim}")
    if x.has_infinite:
        return math.inf
    return float(np.max(np.abs(x.values) / unit.element.values))


@dataclass(frozen=True)
class OSequence:
    """Candidate regulator sequence (decreasing to zero in order)."""

    terms: Callable[[int], LatticeElement]
    horizon: int

    def __post_init__(self):
        if self.horizon < 1:
            raise LatticeError("horizon must be >= 1")

    def term(self, l: int) -> LatticeElement:
        if not 1 <= l <= self.horizon:
            raise LatticeError(f"index {l} outside 1..{self.horizon}")
        out = self.terms(l)
        if not isinstance(out, LatticeElement):
            out = LatticeElement.from_values(out)
        return out

    @staticmethod
    def harmonic(unit: LatticeElement, horizon: int) -> "OSequence":
        return OSequence(lambda l: unit.scale(1.0 / l), horizon)


@dataclass(frozen=True)
class OSequenceVerdict:
    ok: bool
    first_violation: Optional[int]
    final_max: float

    def to_dict(self) -> dict:
        return {"ok": self.ok, "first_violation": self.first_violation, "final_max": self.final_max}


def is_o_sequence(seq: OSequence, tol: float, stride: int = 1) -> OSequenceVerdict:
    """Check monotone decrease to (numerically) zero on the evaluated range.

    True iff every evaluated term is nonnegative, each term is <= its
    predecessor entrywise, and the final term is <= tol entrywise.  The
    verdict records the first index violating monotonicity or positivity.
    """
    if tol < 0:
        raise LatticeError("tol must be >= 0")
    indices = list(range(1, seq.horizon + 1, max(1, stride)))
    if indices[-1] != seq.horizon:
        indices.append(seq.horizon)
    prev = None
    for l in indices:
        cur = seq.term(l)
        if not cur.is_positive():
            return OSequenceVerdict(False, l, math.inf)
        if prev is not None and not cur.le(prev):
            return OSequenceVerdict(False, l, math.inf)
        prev = cur
    final = seq.term(seq.horizon)
    final_max = math.inf if final.has_infinite else float(np.max(final.values))
    return OSequenceVerdict(final_max <= tol, None, final_max)
