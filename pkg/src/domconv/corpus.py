"""Canonical function sequences with certified bounds, Lipschitz constants, integrals.

Every family documents which convergence hypotheses it satisfies, so the
suite can exercise both the positive pipeline and negative controls.  Tent
families place their peak on a grid point (refusing generation when the
grid is too coarse), which keeps sup-norm claims exact; tent integrals are
peak-position independent, so the analytic values stay exact too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ResolutionError, ValidationError
from .grids import FunctionSequence, Grid, SampledFunction


def _snap_peak(grid: Grid, a: float, b: float, n: int, family: str) -> float:
    """Pick the grid point nearest the midpoint of (a, b), strictly inside."""
    pts = grid.points
    lo = int(np.searchsorted(pts, a, side="right"))
    hi = int(np.searchsorted(pts, b, side="left"))
    if lo >= hi:
        need = int(math.ceil(2.0 / (b - a))) + 1
        raise ResolutionError(
            f"{family} term {n} needs a grid point strictly inside ({a}, {b}); "
            f"a uniform grid needs at least {need} points"
        )
    inside = pts[lo:hi]
    return float(inside[np.argmin(np.abs(inside - 0.5 * (a + b)))])


def _tent(grid: Grid, a: float, peak: float, b: float) -> np.ndarray:
    return np.interp(grid.points, [a, peak, b], [0.0, 1.0, 0.0], left=0.0, right=0.0)


def _tent_lipschitz(grid: Grid, a: float, b: float, n: int, family: str) -> float:
    peak = _snap_peak(grid, a, b, n, family)
    return max(1.0 / (peak - a), 1.0 / (b - peak))


def _hump_support(n: int) -> tuple[float, float]:
    return 1.0 / (n + 1), 1.0 / n


def _typewriter_support(n: int) -> tuple[float, float]:
    # Dyadic sweep: block k holds 2^k tents of width 2^-k covering [0, 1].
    k = n.bit_length() - 1
    j = n - (1 << k)
    width = 2.0 ** (-k)
    return j * width, (j + 1) * width


@dataclass(frozen=True)
class CorpusEntry:
    """A named family of terms with certified analytic metadata."""

    id: str
    description: str
    bound: float
    pointwise_null: bool
    uniformly_null: bool
    monotone_decreasing: bool
    _values: Callable[[int, Grid], np.ndarray]
    _lipschitz: Callable[[int, Grid], float]
    _integral: Callable[[int], float] | None
    _recommended_grid: Callable[[int], Grid]

    def generate(self, n: int, grid: Grid) -> SampledFunction:
        """Term n sampled on the grid; refuses grids too coarse for the family."""
        if n < 1:
            raise ValidationError(f"term index must be >= 1, got {n}")
        return SampledFunction(grid, self._values(n, grid))

    def lipschitz(self, n: int, grid: Grid) -> float:
        """A certified Lipschitz constant for term n as sampled on this grid."""
        if n < 1:
            raise ValidationError(f"term index must be >= 1, got {n}")
        return self._lipschitz(n, grid)

    def integral(self, n: int) -> float | None:
        """Analytic integral of term n over [0, 1], when a closed form exists."""
        return None if self._integral is None else self._integral(n)

    def recommended_grid(self, n_terms: int) -> Grid:
        """A grid fine enough for terms 1..n_terms of this family."""
        return self._recommended_grid(n_terms)

    def sequence(self, n_terms: int, grid: Grid | None = None) -> FunctionSequence:
        if grid is None:
            grid = self.recommended_grid(n_terms)
        terms = tuple(self.generate(n, grid) for n in range(1, n_terms + 1))
        return FunctionSequence(terms, self.bound)

    def sequence_lipschitz(self, n_terms: int, grid: Grid) -> float:
        """A Lipschitz constant covering every term 1..n_terms on this grid."""
        return max(self.lipschitz(n, grid) for n in range(1, n_terms + 1))


def sliding_hump_grid(n_terms: int) -> Grid:
    """Grid holding every tent endpoint 1/k and every tent midpoint exactly.

    On this grid the tents are sampled with no kink off a grid point, so
    trapezoid quadrature reproduces the tent areas to rounding error.
    """
    ends = [1.0 / k for k in range(1, n_terms + 2)]
    mids = [0.5 * (1.0 / (k + 1) + 1.0 / k) for k in range(1, n_terms + 1)]
    pts = np.array(sorted({0.0, *ends, *mids}))
    return Grid(pts)


def _uniform_1025(n_terms: int) -> Grid:
    return Grid.uniform(1025)


def _power_gap_values(n: int, grid: Grid) -> np.ndarray:
    x = grid.points
    return x**n - x ** (2 * n)


def _exp_spike_values(n: int, grid: Grid) -> np.ndarray:
    x = grid.points
    return n * x * np.exp(-n * x)


def _monotone_power_values(n: int, grid: Grid) -> np.ndarray:
    return (0.9 * grid.points) ** n


_ENTRIES = {
    "sliding_hump": CorpusEntry(
        id="sliding_hump",
        description="unit tents on [1/(n+1), 1/n]: pointwise null, sup norm stays 1",
        bound=1.0,
        pointwise_null=True,
        uniformly_null=False,
        monotone_decreasing=False,
        _values=lambda n, grid: _tent(
            grid,
            _hump_support(n)[0],
            _snap_peak(grid, *_hump_support(n), n, "sliding_hump"),
            _hump_support(n)[1],
        ),
        _lipschitz=lambda n, grid: _tent_lipschitz(
            grid, *_hump_support(n), n, "sliding_hump"
        ),
        _integral=lambda n: 0.5 * (1.0 / n - 1.0 / (n + 1)),
        _recommended_grid=sliding_hump_grid,
    ),
    "power_gap": CorpusEntry(
        id="power_gap",
        description="x^n - x^(2n): pointwise null on all of [0,1], max 1/4",
        bound=0.25,
        pointwise_null=True,
        uniformly_null=False,
        monotone_decreasing=False,
        _values=_power_gap_values,
        _lipschitz=lambda n, grid: float(n),
        _integral=lambda n: 1.0 / (n + 1) - 1.0 / (2 * n + 1),
        _recommended_grid=_uniform_1025,
    ),
    "exp_spike": CorpusEntry(
        id="exp_spike",
        description="n x exp(-n x): pointwise null, max 1/e at x = 1/n",
        bound=math.exp(-1.0),
        pointwise_null=True,
        uniformly_null=False,
        monotone_decreasing=False,
        _values=_exp_spike_values,
        _lipschitz=lambda n, grid: float(n),
        _integral=lambda n: (1.0 - (1.0 + n) * math.exp(-n)) / n,
        _recommended_grid=_uniform_1025,
    ),
    "monotone_power": CorpusEntry(
        id="monotone_power",
        description="(0.9 t)^n: decreasing to 0, uniformly null (Dini case)",
        bound=0.9,
        pointwise_null=True,
        uniformly_null=True,
        monotone_decreasing=True,
        _values=_monotone_power_values,
        _lipschitz=lambda n, grid: n * 0.9**n,
        _integral=lambda n: 0.9**n / (n + 1),
        _recommended_grid=_uniform_1025,
    ),
    "typewriter": CorpusEntry(
        id="typewriter",
        description="dyadic sweep of unit tents: NOT pointwise null, integrals -> 0",
        bound=1.0,
        pointwise_null=False,
        uniformly_null=False,
        monotone_decreasing=False,
        _values=lambda n, grid: _tent(
            grid,
            _typewriter_support(n)[0],
            _snap_peak(grid, *_typewriter_support(n), n, "typewriter"),
            _typewriter_support(n)[1],
        ),
        _lipschitz=lambda n, grid: _tent_lipschitz(
            grid, *_typewriter_support(n), n, "typewriter"
        ),
        _integral=lambda n: 2.0 ** (-(n.bit_length() - 1)) / 2.0,
        _recommended_grid=_uniform_1025,
    ),
}


def list_entries() -> list[CorpusEntry]:
    return [_ENTRIES[k] for k in sorted(_ENTRIES)]


def get_entry(entry_id: str) -> CorpusEntry:
    try:
        return _ENTRIES[entry_id]
    except KeyError:
        known = ", ".join(sorted(_ENTRIES))
        raise ValidationError(f"unknown corpus id {entry_id!r}; known: {known}") from None


def generate(entry_id: str, n: int, grid: Grid) -> SampledFunction:
    return get_entry(entry_id).generate(n, grid)
