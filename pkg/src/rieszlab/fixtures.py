"""Named test payloads addressable by id.

The registry collects the inputs the command-line experiments and the
acceptance suite share: integrands with reference values, kernel family
builders, signal shapes, term generators for sequence audits, shape
functions, and volatility profiles for the stochastic checks.  Every
entry carries a module tag so catalogs can be filtered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .integral import SimpleFunction, independent_ladders
from .measure import Domain, MeasureSpace
from .modular import ConvexPhi
from .operators import KernelFamily, moment_kernel


class FixtureError(LookupError):
    pass


@dataclass(frozen=True)
class Fixture:
    id: str
    module: str
    kind: str
    summary: str
    build: Callable[[], dict]

    def to_row(self) -> dict:
        return {"id": self.id, "module": self.module, "kind": self.kind, "summary": self.summary}


# ---------------------------------------------------------------------------
# measure spaces shared by the integrand suite

def _unit() -> MeasureSpace:
    return MeasureSpace.lebesgue_segment(0.0, 1.0)


def _sym() -> MeasureSpace:
    return MeasureSpace.lebesgue_segment(-2.0, 2.0)


def _wide() -> MeasureSpace:
    return MeasureSpace.lebesgue_segment(0.0, 8.0)


def _haar() -> MeasureSpace:
    return MeasureSpace.haar_halfline()


def _invsq() -> MeasureSpace:
    # inverse-square density on a bounded segment away from the origin
    return MeasureSpace(Domain.segment(0.5, 8.0), weight=lambda t: t**-2.0)


_SPACES = {"unit": _unit, "sym": _sym, "wide": _wide, "haar": _haar, "invsq": _invsq}


def _integrand(fn, support, space: str, reference: Optional[float], levels: int, breaks=()) -> Callable[[], dict]:
    def build() -> dict:
        return {
            "kind": "integrand",
            "fn": fn,
            "support": support,
            "space": _SPACES[space](),
            "space_name": space,
            "breaks": tuple(breaks),
            "reference": reference,
            "levels": levels,
        }

    return build


def integrand_ladders(payload: dict) -> tuple:
    """The two refinement ladders an integrand fixture is judged with."""
    ms = payload["space"]
    lo, hi = payload["support"]
    width = float(ms.domain.to_coord(hi) - ms.domain.to_coord(lo))
    return independent_ladders(width, levels=payload["levels"])


# closed forms, where stated, are antiderivative evaluations at the
# support endpoints; entries without one are judged against quadrature
# alone
_DAMPED_REF = (1.0 + math.exp(-4.0) * (-0.5 * math.sin(8.0) - math.cos(8.0))) / 1.25

_INTEGRANDS = [
    ("quadratic-dome", "polynomial bump 6t(1-t) on the unit segment", _integrand(
        lambda t: 6.0 * t * (1.0 - t), (0.0, 1.0), "unit", 1.0, 16)),
    ("center-tent", "unit tent peaked at one half", _integrand(
        lambda t: np.maximum(0.0, 1.0 - np.abs(2.0 * t - 1.0)), (0.0, 1.0), "unit", 0.5, 16, breaks=(0.5,))),
    ("sine-bump", "squared sine arch over one period", _integrand(
        lambda t: np.sin(np.pi * t) ** 2, (0.0, 1.0), "unit", 0.5, 16)),
    ("sawtooth-three", "three-tooth sawtooth, jumps at the thirds", _integrand(
        lambda t: 3.0 * t - np.floor(3.0 * t), (0.0, 1.0), "unit", 0.5, 18, breaks=(1.0 / 3.0, 2.0 / 3.0))),
    ("shifted-cubic", "cubic minus half-line, signed with zero mean", _integrand(
        lambda t: t**3 - 0.5 * t, (0.0, 1.0), "unit", 0.0, 16)),
    ("cosine-wiggle", "two full cosine periods, cancelling mass", _integrand(
        lambda t: np.cos(4.0 * np.pi * t), (0.0, 1.0), "unit", 0.0, 16)),
    ("two-level-step", "step taking values two then one on the middle half", _integrand(
        lambda t: np.where(t < 0.5, 2.0, 1.0), (0.25, 0.75), "unit", 0.75, 16, breaks=(0.5,))),
    ("root-edge", "square root with a steep edge at zero", _integrand(
        np.sqrt, (0.0, 1.0), "unit", 2.0 / 3.0, 16)),
    ("exp-ramp", "exponential minus one", _integrand(
        np.expm1, (0.0, 1.0), "unit", math.e - 2.0, 16)),
    ("log-dip", "shifted logarithm, negative near zero", _integrand(
        lambda t: np.log(t + 0.1), (0.0, 1.0), "unit", 1.1 * math.log(1.1) - 0.1 * math.log(0.1) - 1.0, 16)),
    ("even-gauss", "centred gaussian on a symmetric window", _integrand(
        lambda t: np.exp(-t * t), (-2.0, 2.0), "sym", math.sqrt(math.pi) * math.erf(2.0), 18)),
    ("odd-cubic", "odd cubic, exact cancellation", _integrand(
        lambda t: t**3 / 8.0, (-2.0, 2.0), "sym", 0.0, 18)),
    ("twin-tents", "tents at plus and minus one", _integrand(
        lambda t: np.maximum(0.0, 1.0 - np.abs(t - 1.0)) + np.maximum(0.0, 1.0 - np.abs(t + 1.0)),
        (-2.0, 2.0), "sym", 2.0, 18, breaks=(-1.0, 0.0, 1.0))),
    ("opposed-boxes", "indicator boxes of opposite sign", _integrand(
        lambda t: np.where((t >= -1.5) & (t < -0.5), 1.0, 0.0) - np.where((t >= 0.5) & (t < 1.5), 1.0, 0.0),
        (-2.0, 2.0), "sym", 0.0, 18, breaks=(-1.5, -0.5, 0.5, 1.5))),
    ("damped-oscillation", "exponentially damped sine over eight units", _integrand(
        lambda t: np.exp(-0.5 * t) * np.sin(t), (0.0, 8.0), "wide", _DAMPED_REF, 18)),
    ("gamma-hump", "first-order gamma density shape", _integrand(
        lambda t: t * np.exp(-t), (0.0, 8.0), "wide", 1.0 - 9.0 * math.exp(-8.0), 18)),
    ("quarter-staircase", "integer staircase scaled by a quarter", _integrand(
        lambda t: np.floor(t) / 4.0, (0.0, 4.0), "wide", 1.5, 18, breaks=(1.0, 2.0, 3.0))),
    ("log-tent", "tent in logarithmic coordinates against the scale-free measure", _integrand(
        lambda t: np.maximum(0.0, 1.0 - np.abs(np.log(t)) / math.log(4.0)),
        (0.25, 4.0), "haar", math.log(4.0), 17, breaks=(1.0,))),
    ("power-window", "square power on a doubling window against the scale-free measure", _integrand(
        lambda t: t * t, (1.0, 2.0), "haar", 1.5, 16)),
    ("linear-against-tail", "linear growth against an inverse-square density", _integrand(
        lambda t: np.asarray(t, dtype=np.float64), (1.0, 4.0), "invsq", math.log(4.0), 17)),
]


# ---------------------------------------------------------------------------
# kernel families

def _kernel_moment() -> dict:
    return {"kind": "kernel", "factory": moment_kernel, "form": "ratio", "default_indices": tuple(range(1, 31))}


def _kernel_moving_average() -> dict:
    return {"kind": "kernel", "factory": lambda: KernelFamily.moving_average(), "form": "two-variable", "default_indices": tuple(range(1, 31))}


# ---------------------------------------------------------------------------
# signals fed to the kernel experiments

def _tent(t):
    return np.maximum(0.0, 1.0 - np.abs(np.log(np.maximum(np.asarray(t, dtype=np.float64), 1e-300))) / math.log(4.0))


def _ramp(t):
    t = np.asarray(t, dtype=np.float64)
    return np.where((t > 0.0) & (t <= 1.0), t, 0.0)


def _signal_tent() -> dict:
    return {"kind": "signal", "fn": _tent, "support": (0.25, 4.0), "breaks": (1.0,), "space": _haar()}


def _signal_ramp() -> dict:
    # identity below one, zero beyond; the jump sits exactly at one
    return {"kind": "signal", "fn": _ramp, "support": (2.0**-20, 1.0), "breaks": (1.0,), "space": _haar()}


# ---------------------------------------------------------------------------
# sequence generators for the limit-interchange audits

def _seq_plateau() -> dict:
    return {
        "kind": "sequence",
        "term": lambda n: SimpleFunction.indicator((0.0, 1.0 / n), 1.0),
        "limit": lambda t: np.zeros_like(np.asarray(t, dtype=np.float64)),
        "space": _unit(),
        "expected_l1": lambda n: 1.0 / n,
    }


def _seq_spike() -> dict:
    return {
        "kind": "sequence",
        "term": lambda n: SimpleFunction.indicator((0.0, 1.0 / n), float(n)),
        "limit": lambda t: np.zeros_like(np.asarray(t, dtype=np.float64)),
        "space": _unit(),
        "expected_l1": lambda n: 1.0,
    }


# ---------------------------------------------------------------------------
# shape functions and volatility profiles

def _shape_square() -> dict:
    return {"kind": "shape", "phi": ConvexPhi.square()}


def _shape_exp_square() -> dict:
    return {"kind": "shape", "phi": ConvexPhi.exp_square()}


def _vol_flat() -> dict:
    return {"kind": "volatility", "profile": 1.0, "square_integral": lambda T: T}


def _vol_ramp() -> dict:
    return {"kind": "volatility", "profile": lambda t: np.asarray(t, dtype=np.float64), "square_integral": lambda T: T**3 / 3.0}


def _vol_step() -> dict:
    def profile(t):
        return np.where(np.asarray(t, dtype=np.float64) < 0.5, 1.0, 2.0)

    # one below the half-way mark, two after: squares integrate to 2.5 on [0, 1]
    return {"kind": "volatility", "profile": profile,
            "square_integral": lambda T: (0.5 + 4.0 * (T - 0.5)) if T >= 0.5 else float(T)}


# ---------------------------------------------------------------------------
# registry

def _build_registry() -> dict:
    entries = []
    for fid, summary, build in _INTEGRANDS:
        entries.append(Fixture(fid, "measure_integral", "integrand", summary, build))
    entries += [
        Fixture("moment-kernel", "operators", "kernel",
                "ratio-kernel family with polynomial concentration profile", _kernel_moment),
        Fixture("moving-average", "operators", "kernel",
                "forward moving average over a shrinking window", _kernel_moving_average),
        Fixture("tent-signal", "operators", "signal",
                "log-coordinate tent supported on a four-octave window", _signal_tent),
        Fixture("ramp-signal", "operators", "signal",
                "identity ramp cut off at one", _signal_ramp),
        Fixture("shrinking-plateau", "measure_integral", "sequence",
                "unit-height plateaus with vanishing width", _seq_plateau),
        Fixture("mass-spike", "measure_integral", "sequence",
                "height-n spikes of width one over n, constant mass", _seq_spike),
        Fixture("square-shape", "modular_orlicz", "shape",
                "quadratic shape function", _shape_square),
        Fixture("exp-square-shape", "modular_orlicz", "shape",
                "exponential-of-square shape with rapid growth", _shape_exp_square),
        Fixture("flat-volatility", "stochastic", "volatility",
                "constant unit integrand", _vol_flat),
        Fixture("ramp-volatility", "stochastic", "volatility",
                "linearly growing integrand", _vol_ramp),
        Fixture("two-level-volatility", "stochastic", "volatility",
                "volatility doubling at the half-way time", _vol_step),
    ]
    reg = {}
    for fx in entries:
        if fx.id in reg:
            raise ValueError(f"duplicate fixture id {fx.id!r}")
        reg[fx.id] = fx
    return reg


REGISTRY = _build_registry()


def get(fixture_id: str) -> Fixture:
    try:
        return REGISTRY[fixture_id]
    except KeyError:
        raise FixtureError(f"unknown fixture {fixture_id!r}") from None


def catalog(module: Optional[str] = None) -> list:
    rows = [fx.to_row() for fx in REGISTRY.values()]
    if module is not None:
        rows = [r for r in rows if r["module"] == module]
    return rows


def integrand_fixtures() -> list:
    return [fx for fx in REGISTRY.values() if fx.kind == "integrand"]
