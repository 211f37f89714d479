"""Sampled models of a compact domain: grids, functions on them, lattice operations.

The compact domain is a finite sorted grid in [0, 1]; functions are value
vectors over the grid.  Uniform-norm statements are asserted on the grid,
with no interpolation semantics between points.  All types are immutable
after construction and every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import GridMismatchError, ValidationError


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype).copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Grid:
    """Strictly increasing sample points in [0, 1] with the absolute-value metric."""

    points: np.ndarray

    def __post_init__(self):
        pts = _frozen_array(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise ValidationError("grid needs at least 2 points in a flat array")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("grid points must be finite")
        if pts[0] < 0.0 or pts[-1] > 1.0:
            raise ValidationError("grid points must lie within [0, 1]")
        if not np.all(np.diff(pts) > 0.0):
            raise ValidationError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, size: int) -> "Grid":
        if size < 2:
            raise ValidationError("uniform grid needs size >= 2")
        return cls(np.linspace(0.0, 1.0, size))

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def span(self) -> float:
        return float(self.points[-1] - self.points[0])

    def distance(self, i: int, j: int) -> float:
        """Metric d(x_i, x_j) = |x_i - x_j|."""
        return abs(float(self.points[i] - self.points[j]))

    def spacings(self) -> np.ndarray:
        return np.diff(self.points)

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.points.size, float(self.points[0]), float(self.points[-1])))


def same_grid(a: Grid, b: Grid, what: str = "operands") -> None:
    if a != b:
        raise GridMismatchError(f"{what} are sampled on different grids")


@dataclass(frozen=True)
class SampledFunction:
    """A real function on a grid, stored as one value per grid point."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen_array(self.values)
        if vals.shape != (self.grid.size,):
            raise ValidationError(
                f"expected {self.grid.size} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValidationError("function values must be finite")
        object.__setattr__(self, "values", vals)

    def to_json(self) -> dict:
        return {"grid": self.grid.points.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "SampledFunction":
        return cls(Grid(obj["grid"]), np.asarray(obj["values"], dtype=float))


def sampled(grid: Grid, values) -> SampledFunction:
    return SampledFunction(grid, np.asarray(values, dtype=float))


def sample(grid: Grid, fn) -> SampledFunction:
    """Sample a callable x -> f(x) (vectorized over the grid points)."""
    return SampledFunction(grid, np.asarray(fn(grid.points), dtype=float))


def lattice_join(g: SampledFunction, h: SampledFunction) -> SampledFunction:
    """Pointwise maximum (upper envelope of two functions)."""
    same_grid(g.grid, h.grid, "join operands")
    return SampledFunction(g.grid, np.maximum(g.values, h.values))


def lattice_meet(g: SampledFunction, h: SampledFunction) -> SampledFunction:
    """Pointwise minimum (lower envelope of two functions)."""
    same_grid(g.grid, h.grid, "meet operands")
    return SampledFunction(g.grid, np.minimum(g.values, h.values))


def sup_norm(f: SampledFunction) -> float:
    """Maximum of |f| over the grid; the sampled uniform norm."""
    return float(np.max(np.abs(f.values)))


def add(g: SampledFunction, h: SampledFunction) -> SampledFunction:
    same_grid(g.grid, h.grid, "sum operands")
    return SampledFunction(g.grid, g.values + h.values)


def scale(g: SampledFunction, a: float) -> SampledFunction:
    return SampledFunction(g.grid, a * g.values)


def absolute(g: SampledFunction) -> SampledFunction:
    return SampledFunction(g.grid, np.abs(g.values))


def combine(fs: Sequence[SampledFunction], weights) -> SampledFunction:
    """Linear combination sum_k weights[k] * fs[k] on the shared grid."""
    if len(fs) == 0:
        raise ValidationError("cannot combine an empty list of functions")
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(fs),):
        raise ValidationError(f"expected {len(fs)} weights, got shape {w.shape}")
    for f in fs[1:]:
        same_grid(fs[0].grid, f.grid, "combination terms")
    stacked = np.stack([f.values for f in fs], axis=0)
    return SampledFunction(fs[0].grid, (w[:, None] * stacked).sum(axis=0))


def running_meet(gs: Sequence[SampledFunction]) -> list[SampledFunction]:
    """Prefix meets h_n = g_1 ∧ ... ∧ g_n; pointwise nonincreasing in n."""
    if len(gs) == 0:
        raise ValidationError("running meet of an empty list")
    out = [gs[0]]
    for g in gs[1:]:
        out.append(lattice_meet(out[-1], g))
    return out


@dataclass(frozen=True)
class FunctionSequence:
    """A finite indexed list of functions on one grid with a shared uniform bound."""

    terms: tuple[SampledFunction, ...]
    bound: float

    def __post_init__(self):
        terms = tuple(self.terms)
        if len(terms) == 0:
            raise ValidationError("sequence needs at least one term")
        if not (np.isfinite(self.bound) and self.bound >= 0.0):
            raise ValidationError("bound must be finite and >= 0")
        for k, t in enumerate(terms[1:], start=2):
            same_grid(terms[0].grid, t.grid, f"sequence terms 1 and {k}")
        slack = 1e-12 * max(1.0, self.bound)
        for k, t in enumerate(terms, start=1):
            if sup_norm(t) > self.bound + slack:
                raise ValidationError(
                    f"term {k} has sup norm {sup_norm(t)} above the bound {self.bound}"
                )
        object.__setattr__(self, "terms", terms)

    @property
    def grid(self) -> Grid:
        return self.terms[0].grid

    def __len__(self) -> int:
        return len(self.terms)

    def term(self, n: int) -> SampledFunction:
        """1-based access matching the usual sequence indexing."""
        if not 1 <= n <= len(self.terms):
            raise ValidationError(f"index {n} outside 1..{len(self.terms)}")
        return self.terms[n - 1]

    def to_json(self) -> dict:
        return {
            "grid": self.grid.points.tolist(),
            "bound": self.bound,
            "terms": [t.values.tolist() for t in self.terms],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FunctionSequence":
        grid = Grid(obj["grid"])
        terms = tuple(
            SampledFunction(grid, np.asarray(v, dtype=float)) for v in obj["terms"]
        )
        return cls(terms, float(obj["bound"]))


def tail_sup_envelope(seq: FunctionSequence, n: int, horizon: int) -> SampledFunction:
    """Pointwise max of terms n..horizon (1-based, inclusive).

    The truncated stand-in for the upper envelope of an infinite tail.
    """
    if not 1 <= n <= horizon <= len(seq):
        raise ValidationError(
            f"need 1 <= n <= horizon <= {len(seq)}, got n={n} horizon={horizon}"
        )
    stacked = np.stack([seq.terms[k].values for k in range(n - 1, horizon)], axis=0)
    return SampledFunction(seq.grid, stacked.max(axis=0))


def tail_sup_envelopes(seq: FunctionSequence, horizon: int) -> list[SampledFunction]:
    """All truncated tail envelopes n = 1..horizon in one suffix-max sweep."""
    if not 1 <= horizon <= len(seq):
        raise ValidationError(f"horizon {horizon} outside 1..{len(seq)}")
    out = [seq.terms[horizon - 1]]
    for k in range(horizon - 2, -1, -1):
        out.append(lattice_join(seq.terms[k], out[-1]))
    out.reverse()
    return out
