"""Positive linear functionals on sampled functions and their Lipschitz envelope extension.

A positive functional is a nonnegative weight vector over grid points;
composite-trapezoid quadrature is the canonical instance.  The envelope
extension evaluates the functional at the greatest L-Lipschitz minorant,
which is the exact maximizer over the feasible class {g : 0 <= g <= f,
g L-Lipschitz on the grid metric} by positivity of the weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grids import Grid, SampledFunction, _frozen_array, same_grid

# Absolute slack used when validating Lipschitz continuity of inputs; the
# minorant construction itself is Lipschitz to within one rounding step.
LIPSCHITZ_SLACK = 1e-9


@dataclass(frozen=True)
class PositiveFunctional:
    """Nonnegative weights over grid points; models integration-like functionals."""

    grid: Grid
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen_array(self.weights)
        if w.shape != (self.grid.size,):
            raise ValidationError(
                f"expected {self.grid.size} weights, got shape {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite")
        if np.any(w < 0.0):
            raise ValidationError("weights must be nonnegative")
        if w.sum() <= 0.0:
            raise ValidationError("total mass must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def to_json(self) -> dict:
        return {"grid": self.grid.points.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "PositiveFunctional":
        return cls(Grid(obj["grid"]), np.asarray(obj["weights"], dtype=float))


@dataclass(frozen=True)
class SignedFunctional:
    """Difference of two positive functionals on a shared grid."""

    positive_part: PositiveFunctional
    negative_part: PositiveFunctional

    def __post_init__(self):
        same_grid(self.positive_part.grid, self.negative_part.grid, "signed parts")

    @property
    def grid(self) -> Grid:
        return self.positive_part.grid

    def total_variation_part(self) -> PositiveFunctional:
        """The positive functional |psi| = positive_part + negative_part."""
        return PositiveFunctional(
            self.grid, self.positive_part.weights + self.negative_part.weights
        )

    def to_json(self) -> dict:
        return {
            "positive": self.positive_part.to_json(),
            "negative": self.negative_part.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SignedFunctional":
        return cls(
            PositiveFunctional.from_json(obj["positive"]),
            PositiveFunctional.from_json(obj["negative"]),
        )


def apply(phi: PositiveFunctional, f: SampledFunction) -> float:
    """Evaluate sum_i w_i f(x_i).  Linear in f; nonnegative for f >= 0."""
    same_grid(phi.grid, f.grid, "functional and function")
    # np.sum keeps pairwise summation on one thread; bit-deterministic.
    return float(np.sum(phi.weights * f.values))


def apply_signed(psi: SignedFunctional, f: SampledFunction) -> float:
    """Evaluate the signed functional as positive part minus negative part."""
    same_grid(psi.grid, f.grid, "functional and function")
    return apply(psi.positive_part, f) - apply(psi.negative_part, f)


def trapezoid_functional(grid: Grid) -> PositiveFunctional:
    """Composite trapezoid weights; exact on affine functions, mass = grid span."""
    dx = grid.spacings()
    w = np.zeros(grid.size)
    w[:-1] += dx / 2.0
    w[1:] += dx / 2.0
    return PositiveFunctional(grid, w)


def greatest_lipschitz_minorant(f: SampledFunction, L: float) -> SampledFunction:
    """Greatest g with 0 <= g <= f and |g(x_i)-g(x_j)| <= L|x_i-x_j| on the grid.

    Computed by the McShane construction g*(x) = max(0, min_j f(x_j) + L d(x, x_j)).
    On a sorted one-dimensional grid the min over j reduces to one forward and
    one backward sweep.  For nonnegative f the outer clamp never binds; it is
    kept as a guard against negative rounding noise.
    """
    if not (np.isfinite(L) and L >= 0.0):
        raise ValidationError("Lipschitz bound must be finite and >= 0")
    if np.any(f.values < 0.0):
        i = int(np.argmin(f.values))
        raise ValidationError(
            f"minorant needs f >= 0; f({f.grid.points[i]}) = {f.values[i]}"
        )
    dx = f.grid.spacings()
    m = f.values.copy()
    for i in range(1, m.size):
        m[i] = min(m[i], m[i - 1] + L * dx[i - 1])
    for i in range(m.size - 2, -1, -1):
        m[i] = min(m[i], m[i + 1] + L * dx[i])
    np.maximum(m, 0.0, out=m)
    return SampledFunction(f.grid, m)


def is_lipschitz(f: SampledFunction, L: float, slack: float = LIPSCHITZ_SLACK) -> bool:
    """Check the grid Lipschitz property; adjacent pairs suffice on a sorted grid."""
    dv = np.abs(np.diff(f.values))
    return bool(np.all(dv <= L * f.grid.spacings() + slack))


@dataclass(frozen=True)
class EnvelopeResult:
    """Value and maximizer of a functional over the L-Lipschitz minorant class."""

    value: float
    witness: SampledFunction
    lipschitz_bound: float

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "witness": self.witness.to_json(),
            "lipschitz_bound": self.lipschitz_bound,
        }


def envelope(phi: PositiveFunctional, f: SampledFunction, L: float) -> EnvelopeResult:
    """Extend phi to nonnegative f: the max of phi(g) over feasible minorants g.

    Positivity of the weights puts the maximum at the greatest minorant, so
    the value is exact rather than solver-approximated.  The result extends
    phi (equals apply(phi, f) whenever f itself is L-Lipschitz) and is
    monotone in f and nondecreasing in L.
    """
    same_grid(phi.grid, f.grid, "functional and function")
    witness = greatest_lipschitz_minorant(f, L)
    return EnvelopeResult(apply(phi, witness), witness, L)


def _require_between(low, mid, high, what: str) -> None:
    if np.any(mid.values < low.values - 1e-12):
        raise ValidationError(f"constraint 0 <= {what} failed")
    if np.any(mid.values > high.values + 1e-12):
        raise ValidationError(f"constraint {what} <= its dominating function failed")


def meet_defect_bounds(
    phi: PositiveFunctional,
    f1: SampledFunction,
    f2: SampledFunction,
    g: SampledFunction,
    h: SampledFunction,
    L: float,
) -> tuple[float, float]:
    """Both sides of the envelope defect inequality for the meet of two minorants.

    With f1 >= f2 >= 0, h feasible under f1 and g feasible under f2 (both in
    the L-Lipschitz class), returns

        lhs = env(f2) - phi(g ∧ h)
        rhs = (env(f1) - phi(h)) + (env(f2) - phi(g))

    and lhs <= rhs holds because g ∨ h stays feasible under f1, which turns
    the lattice identity g + h = (g ∨ h) + (g ∧ h) into the bound.
    """
    for other in (f2, g, h):
        same_grid(f1.grid, other.grid, "defect inequality inputs")
    same_grid(phi.grid, f1.grid, "functional and functions")
    if np.any(f2.values < -1e-12):
        raise ValidationError("constraint f2 >= 0 failed")
    if np.any(f1.values < f2.values - 1e-12):
        raise ValidationError("constraint f1 >= f2 failed")
    zero = SampledFunction(f1.grid, np.zeros(f1.grid.size))
    _require_between(zero, h, f1, "h")
    _require_between(zero, g, f2, "g")
    if not is_lipschitz(g, L):
        raise ValidationError(f"g is not {L}-Lipschitz on the grid")
    if not is_lipschitz(h, L):
        raise ValidationError(f"h is not {L}-Lipschitz on the grid")
    env1 = envelope(phi, f1, L).value
    env2 = envelope(phi, f2, L).value
    meet_value = float(np.sum(phi.weights * np.minimum(g.values, h.values)))
    lhs = env2 - meet_value
    rhs = (env1 - apply(phi, h)) + (env2 - apply(phi, g))
    return lhs, rhs
