"""Revised simplex for small equality-form linear programs.

Solves min c.x subject to A x = b, x >= 0 with b >= 0.  Written for the
problem shape of this package (tens of rows, up to a few thousand
columns).  Reduced costs are always priced against the original matrix
and the basis inverse is refactorized periodically and before declaring
optimality, so accumulated pivot roundoff cannot end a solve early.
Pivoting is deterministic: Dantzig's rule with a largest-pivot tie break,
switching to Bland's rule after a degenerate stall, so the method
terminates and identical inputs give identical pivot sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

REDUCED_COST_TOL = 1e-10
PIVOT_TOL = 1e-9
FEASIBILITY_TOL = 1e-7
REFACTOR_EVERY = 40


@dataclass
class LPResult:
    status: str  # "optimal" | "iteration_limit" | "unbounded" | "infeasible"
    x: np.ndarray
    objective: float
    duals: np.ndarray  # one multiplier per input row
    pivots: int


class _Basis:
    """Basis bookkeeping with product-form updates and refactorization."""

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: np.ndarray):
        self.A = A
        self.b = b
        self.basis = basis
        self.refactor()

    def refactor(self) -> None:
        self.binv = np.linalg.inv(self.A[:, self.basis])
        self.xb = self.binv @ self.b

    def duals(self, costs: np.ndarray) -> np.ndarray:
        return costs[self.basis] @ self.binv

    def column(self, j: int) -> np.ndarray:
        return self.binv @ self.A[:, j]

    def pivot(self, row: int, j: int, direction: np.ndarray) -> None:
        self.basis[row] = j
        piv = direction[row]
        self.binv[row] /= piv
        factors = direction.copy()
        factors[row] = 0.0
        self.binv -= factors[:, None] * self.binv[row][None, :]
        self.xb = self.binv @ self.b


def _iterate(
    state: _Basis, costs: np.ndarray, allowed: np.ndarray, max_pivots: int
) -> tuple[str, int]:
    """Pivot to optimality over the allowed columns; returns (status, pivots)."""
    pivots = 0
    stall = 0
    bland = False
    scale = 1.0 + float(np.abs(costs).max())
    last_obj = float(costs[state.basis] @ state.xb)
    since_refactor = 0
    while pivots < max_pivots:
        y = state.duals(costs)
        reduced = costs[allowed] - y @ state.A[:, allowed]
        if bland:
            negs = np.flatnonzero(reduced < -REDUCED_COST_TOL * scale)
            cand = int(negs[0]) if negs.size else -1
        else:
            cand = int(np.argmin(reduced))
            if reduced[cand] >= -REDUCED_COST_TOL * scale:
                cand = -1
        if cand < 0:
            # guard against a drifted inverse: refactor and re-check
            state.refactor()
            y = state.duals(costs)
            reduced = costs[allowed] - y @ state.A[:, allowed]
            if reduced.min() >= -REDUCED_COST_TOL * scale:
                return "optimal", pivots
            since_refactor = 0
            continue
        j = int(allowed[cand])
        direction = state.column(j)
        rows = np.flatnonzero(direction > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded", pivots
        xb = np.maximum(state.xb, 0.0)
        ratios = xb[rows] / direction[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-9 * (1.0 + abs(best))]
        if bland:
            row = int(ties[np.argmin(state.basis[ties])])
        else:
            row = int(ties[np.argmax(direction[ties])])
        state.pivot(row, j, direction)
        pivots += 1
        since_refactor += 1
        if since_refactor >= REFACTOR_EVERY:
            state.refactor()
            since_refactor = 0
        obj = float(costs[state.basis] @ state.xb)
        if obj < last_obj - 1e-13 * (1.0 + abs(last_obj)):
            stall = 0
            last_obj = obj
        else:
            stall += 1
            if stall > 3 * state.A.shape[0] + 20:
                bland = True
    return "iteration_limit", pivots


def solve_lp(
    c: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    max_pivots: int | None = None,
) -> LPResult:
    """Two-phase revised simplex on min c.x, A x = b, x >= 0 (b must be >= 0)."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValidationError("inconsistent LP dimensions")
    if np.any(b < 0.0):
        raise ValidationError("solve_lp expects b >= 0")
    if max_pivots is None:
        max_pivots = 500 * (m + 1) + 5 * n

    # Phase 1: artificial identity basis.
    A1 = np.hstack([A, np.eye(m)])
    costs1 = np.concatenate([np.zeros(n), np.ones(m)])
    state = _Basis(A1, b, np.arange(n, n + m))
    status, pivots1 = _iterate(state, costs1, np.arange(n + m), max_pivots)
    if status == "unbounded":  # impossible for a sum of artificials
        raise ValidationError("phase 1 reported unbounded; malformed input")
    infeas = float(costs1[state.basis] @ state.xb)
    if infeas > FEASIBILITY_TOL * (1.0 + float(np.abs(b).max())):
        x = np.zeros(n)
        return LPResult("infeasible", x, float("nan"), np.full(m, np.nan), pivots1)

    # Drive leftover artificials out of the basis; rows that stay artificial
    # are redundant constraints and get dropped.
    keep_rows = np.ones(m, dtype=bool)
    for row in range(m):
        if state.basis[row] >= n:
            tableau_row = state.binv[row] @ A
            candidates = np.flatnonzero(np.abs(tableau_row) > 1e-7)
            if candidates.size:
                j = int(candidates[0])
                state.pivot(row, j, state.column(j))
            else:
                keep_rows[row] = False
    if not np.all(keep_rows):
        rows_idx = np.flatnonzero(keep_rows)
        kept_basis = state.basis[keep_rows]
        state = _Basis(A[rows_idx], b[rows_idx], kept_basis.copy())
    else:
        rows_idx = np.arange(m)
        state = _Basis(A, b, state.basis.copy())

    # Phase 2 on original costs, artificial columns out of play.
    status, pivots2 = _iterate(state, c, np.arange(n), max_pivots)
    pivots = pivots1 + pivots2

    x = np.zeros(n)
    x[state.basis] = np.maximum(state.xb, 0.0)
    objective = float(c @ x)

    duals = np.zeros(m)
    duals[rows_idx] = state.duals(c)

    if status == "unbounded":
        return LPResult("unbounded", x, float("-inf"), duals, pivots)
    return LPResult(status, x, objective, duals, pivots)
