"""Brownian ensembles and Ito-type integration over sample lattices.

The probability space is a finite ensemble: M paths on a uniform time grid,
with per-path value vectors living in the sample lattice under componentwise
order.  Integrals against the ensemble come back as lattice elements indexed
by path, so order and convergence statements reuse the same machinery as any
other carrier.

Randomness: PCG64 streams drawn blockwise.  One child seed is spawned per
fixed block of paths, so a given (seed, M, grid) triple reproduces the same
ensemble no matter how the blocks are scheduled or which subset is consumed.
Standard normals come from numpy's ziggurat sampler.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

import numpy as np

from .lattice import LatticeElement

BLOCK_PATHS = 1024
GENERATOR_NOTE = "pcg64-ziggurat-blockwise"


class EnsembleError(ValueError):
    """Bad ensemble parameters (path count, grid shape)."""


class AdaptednessError(ValueError):
    """The integrand declares lookahead past the current time."""


@dataclass(frozen=True, eq=False)
class BrownianEnsemble:
    """M standard Brownian paths on a uniform grid, generated lazily.

    Only (grid, M, seed) are stored; increment blocks are regenerated on
    demand from per-block child seeds, so ensembles far larger than memory
    can be integrated in one streaming pass.  paths() materializes the full
    matrix and is meant for modest M.
    """

    grid: np.ndarray  # (K+1,) times, uniform, starting at zero
    M: int
    seed: int
    block: int = BLOCK_PATHS

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        object.__setattr__(self, "grid", g)
        if self.M < 2:
            raise EnsembleError("need at least two paths")
        if g.ndim != 1 or g.size < 2:
            raise EnsembleError("grid must hold at least two times")
        if g[0] != 0.0:
            raise EnsembleError("grid must start at time zero")
        steps = np.diff(g)
        if np.any(steps <= 0.0) or not np.allclose(steps, steps[0], rtol=1e-12, atol=1e-15):
            raise EnsembleError("grid must be uniform and increasing")
        if self.block < 1:
            raise EnsembleError("block size must be positive")

    @property
    def steps(self) -> int:
        return self.grid.size - 1

    @property
    def dt(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def iter_blocks(self) -> Iterator[tuple[int, np.ndarray]]:
        """Yield (first path index, increment block of shape (m, K))."""
        nblocks = (self.M + self.block - 1) // self.block
        children = np.random.SeedSequence(self.seed).spawn(nblocks)
        scale = math.sqrt(self.dt)
        for j, child in enumerate(children):
            start = j * self.block
            m = min(self.block, self.M - start)
            rng = np.random.default_rng(child)
            yield start, scale * rng.standard_normal((m, self.steps))

    def paths(self) -> np.ndarray:
        """Full (M, K+1) matrix of path values, first column zero."""
        out = np.empty((self.M, self.grid.size))
        out[:, 0] = 0.0
        for start, inc in self.iter_blocks():
            np.cumsum(inc, axis=1, out=out[start : start + inc.shape[0], 1:])
        return out

    def terminal(self) -> LatticeElement:
        """B at the final time, one entry per path.

        Summed with np.sum over increments, the same reduction the integral
        uses, so constant-one integrands reproduce it bit for bit.
        """
        vals = np.empty(self.M)
        for start, inc in self.iter_blocks():
            vals[start : start + inc.shape[0]] = np.sum(inc, axis=1)
        return LatticeElement.from_values(vals)

    # -- persistence --------------------------------------------------------
    # layout: one row per path, one column per time index, header row of
    # times; npz stores the same matrix under "paths" plus "times" and "seed"

    def save(self, path: str) -> None:
        mat = self.paths()
        if str(path).endswith(".npz"):
            np.savez(path, times=self.grid, paths=mat, seed=np.int64(self.seed))
            return
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([format(t, ".17g") for t in self.grid])
            for row in mat:
                writer.writerow([format(v, ".17g") for v in row])

    @staticmethod
    def load_matrix(path: str) -> tuple[np.ndarray, np.ndarray]:
        """Times and path matrix from a file written by save()."""
        if str(path).endswith(".npz"):
            with np.load(path) as data:
                return data["times"].copy(), data["paths"].copy()
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        times = np.array([float(x) for x in rows[0]])
        mat = np.array([[float(x) for x in row] for row in rows[1:]])
        return times, mat


def simulate_brownian(M: int, grid: np.ndarray, seed: int, block: int = BLOCK_PATHS) -> BrownianEnsemble:
    return BrownianEnsemble(np.asarray(grid, dtype=np.float64), int(M), int(seed), block)


@dataclass(frozen=True)
class AdaptedProcess:
    """Integrand whose value at t_k may read the path history up to t_k.

    fn(t_k, history) gets the running block of path values through index k,
    shape (m, k+1), and returns one value per path.  lookahead declares how
    many future grid points fn reads; anything past zero is refused by the
    integral.
    """

    fn: Callable[[float, np.ndarray], np.ndarray]
    lookahead: int = 0


Integrand = Union[float, np.ndarray, Callable[[np.ndarray], np.ndarray], AdaptedProcess]


def _deterministic_values(integrand, times: np.ndarray) -> Optional[np.ndarray]:
    left = times[:-1]
    if isinstance(integrand, AdaptedProcess):
        return None
    if callable(integrand):
        vals = np.asarray(integrand(left), dtype=np.float64)
        if vals.ndim == 0:
            vals = np.full(left.size, float(vals))
    elif np.ndim(integrand) == 0:
        vals = np.full(left.size, float(integrand))
    else:
        vals = np.asarray(integrand, dtype=np.float64)
    if vals.shape != left.shape:
        raise EnsembleError(f"integrand values must match the {left.size} left endpoints")
    return vals


def ito_integrate(integrand: Integrand, B: BrownianEnsemble) -> LatticeElement:
    """Left-endpoint sum of the integrand against Brownian increments.

    Deterministic integrands (scalar, per-step array, callable of time) ride
    a vectorized pass; adapted processes are evaluated step by step against
    the growing history block.  The result is one value per path, living in
    the sample lattice.
    """
    out = np.empty(B.M)
    vals = _deterministic_values(integrand, B.grid)
    if vals is not None:
        for start, inc in B.iter_blocks():
            # elementwise product then np.sum keeps the reduction identical
            # to terminal(), making the constant-one case exact per path
            out[start : start + inc.shape[0]] = np.sum(inc * vals[None, :], axis=1)
        return LatticeElement.from_values(out)
    if integrand.lookahead > 0:
        raise AdaptednessError(f"integrand reads {integrand.lookahead} steps ahead")
    for start, inc in B.iter_blocks():
        m = inc.shape[0]
        hist = np.zeros((m, B.steps + 1))
        np.cumsum(inc, axis=1, out=hist[:, 1:])
        acc = np.zeros(m)
        for k in range(B.steps):
            fk = np.asarray(integrand.fn(float(B.grid[k]), hist[:, : k + 1]), dtype=np.float64)
            acc += fk * inc[:, k]
        out[start : start + m] = acc
    return LatticeElement.from_values(out)


@dataclass(frozen=True)
class IsometryReport:
    second_moment: float
    target: float
    gap: float
    stderr: float
    band: float
    mean: float
    mean_stderr: float
    M: int
    steps: int
    generator: str = GENERATOR_NOTE

    @property
    def within(self) -> bool:
        return self.gap <= self.band * self.stderr

    @property
    def mean_within(self) -> bool:
        return abs(self.mean) <= self.band * self.mean_stderr

    def to_dict(self) -> dict:
        return {
            "second_moment": self.second_moment,
            "target": self.target,
            "gap": self.gap,
            "stderr": self.stderr,
            "band": self.band,
            "within": self.within,
            "mean": self.mean,
            "mean_stderr": self.mean_stderr,
            "mean_within": self.mean_within,
            "M": self.M,
            "steps": self.steps,
            "generator": self.generator,
        }


def isometry_check(integrand: Integrand, B: BrownianEnsemble, band: float = 3.0) -> IsometryReport:
    """Sample second moment of the integral against the squared time integral.

    The target is the trapezoid integral of the squared integrand over the
    grid; the tolerance band is `band` empirical standard errors of the
    squared-sample mean, so the check stays honest as M changes.
    """
    vals = _deterministic_values(integrand, B.grid)
    if vals is None:
        raise EnsembleError("the isometry identity needs a deterministic integrand")
    result = ito_integrate(integrand, B)
    sq = result.values**2
    m2 = float(np.mean(sq))
    stderr = float(np.std(sq, ddof=1) / math.sqrt(B.M))
    if callable(integrand):
        node_vals = np.asarray(integrand(B.grid), dtype=np.float64)
        if node_vals.ndim == 0:
            node_vals = np.full(B.grid.size, float(node_vals))
        target = float(np.trapezoid(node_vals**2, B.grid))
    elif np.ndim(integrand) == 0:
        target = float(integrand) ** 2 * B.horizon
    else:
        # per-step table: the discrete identity is exact, use it as stated
        target = float(np.sum(vals**2) * B.dt)
    mean = float(np.mean(result.values))
    mean_stderr = float(np.std(result.values, ddof=1) / math.sqrt(B.M))
    return IsometryReport(
        m2, target, abs(m2 - target), stderr, band, mean, mean_stderr, B.M, B.steps
    )
