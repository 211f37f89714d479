"""Uniform-norm-minimizing convex combinations of function windows.

The core problem: given functions f_1..f_m on one grid, minimize over the
simplex the sup norm of the combination,

    min_{lambda in simplex}  max_j | sum_k lambda_k f_k(x_j) |,

an LP in epigraph form.  Three backends are provided: a hand-written
vertex-pivoting simplex on the game-dual formulation ("lp", the primary,
which emits a dual certificate), an entropic mirror-prox saddle-point
method with an active-set polish ("first-order", the independent oracle),
and scipy's HiGHS ("highs") for extra cross-validation.  Certified
solutions carry a dual weighting over (grid point, sign) constraints whose
induced lower bound must match the reported optimum.

Convexifications chain these solves: step n combines |f_n|..|f_m| with a
window end m grown by doubling offsets until the target schedule (default
1/n) is met.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import InvariantViolationError, ValidationError
from .grids import (
    FunctionSequence,
    SampledFunction,
    absolute,
    combine,
    same_grid,
    sup_norm,
)
from .simplex import solve_lp

DEFAULT_VALUE_TOL = 1e-9
CERTIFICATE_TOL = 1e-8


@dataclass(frozen=True)
class SimplexWeights:
    """Convex-combination coefficients: nonnegative, summing to one."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("weights must form a nonempty flat vector")
        if np.any(v < 0.0):
            raise ValidationError("weights must be nonnegative")
        if abs(v.sum() - 1.0) > 1e-12:
            raise ValidationError(f"weights sum to {v.sum()!r}, not 1")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class MinimaxSolution:
    """Result of one minimax solve, always carrying a feasible point."""

    weights: SimplexWeights
    value: float
    combined: SampledFunction
    solver_id: str
    iterations: int
    converged: bool
    dual_certificate: np.ndarray | None = None
    message: str = ""


def _signed_matrix(fs: Sequence[SampledFunction]) -> np.ndarray:
    """Rows of function values against both constraint signs: [F, -F]."""
    F = np.stack([f.values for f in fs], axis=0)
    return np.hstack([F, -F])


def _max_combination(B: np.ndarray, lam: np.ndarray) -> float:
    return float((lam[:, None] * B).sum(axis=0).max())


def _certificate_bound(B: np.ndarray, mu: np.ndarray) -> float:
    """Lower bound min_k sum_c mu_c B[k, c] induced by a dual weighting."""
    return float((B * mu[None, :]).sum(axis=1).min())


def _check_inputs(fs: Sequence[SampledFunction]) -> None:
    if len(fs) == 0:
        raise ValidationError("minimax needs at least one function")
    for f in fs[1:]:
        same_grid(fs[0].grid, f.grid, "minimax inputs")


def _normalized(w: np.ndarray) -> np.ndarray:
    w = np.maximum(w, 0.0)
    s = w.sum()
    if s <= 0.0:
        w = np.full(w.size, 1.0 / w.size)
        s = w.sum()
    return w / s


def _trivial_solution(fs, solver_id: str) -> MinimaxSolution:
    m, n = len(fs), fs[0].grid.size
    lam = np.full(m, 1.0 / m)
    return MinimaxSolution(
        weights=SimplexWeights(lam),
        value=0.0,
        combined=combine(fs, lam),
        solver_id=solver_id,
        iterations=0,
        converged=True,
        dual_certificate=np.full(2 * n, 0.5 / n),
        message="all-zero window",
    )


def _solve_lp_backend(fs, B: np.ndarray, max_pivots=None) -> MinimaxSolution:
    """Game-dual formulation solved by the in-package tableau simplex.

    Variables (mu, w, sigma): maximize w subject to (B mu)_k = w + sigma_k
    and mu on the simplex.  The optimal mu is the dual certificate; the
    minimax weights come out of the row multipliers.
    """
    m, ncols = B.shape
    A = np.zeros((m + 1, ncols + 1 + m))
    A[:m, :ncols] = -B
    A[:m, ncols] = 1.0
    A[:m, ncols + 1 :] = np.eye(m)
    A[m, :ncols] = 1.0
    b = np.zeros(m + 1)
    b[m] = 1.0
    c = np.zeros(ncols + 1 + m)
    c[ncols] = -1.0

    res = solve_lp(c, A, b, max_pivots=max_pivots)
    if res.status in ("infeasible", "unbounded"):
        raise InvariantViolationError(
            f"game LP reported {res.status}; the formulation excludes both"
        )
    if res.status != "optimal":
        lam = np.full(m, 1.0 / m)
        return MinimaxSolution(
            weights=SimplexWeights(lam),
            value=_max_combination(B, lam),
            combined=combine(fs, lam),
            solver_id="lp",
            iterations=res.pivots,
            converged=False,
            dual_certificate=None,
            message=f"pivot budget exhausted after {res.pivots} pivots",
        )

    mu = _normalized(res.x[:ncols])
    lam = _normalized(-res.duals[:m])
    value = _max_combination(B, lam)
    if abs(value - (-res.objective)) > 1e-9 * (1.0 + abs(value)):
        raise InvariantViolationError(
            f"simplex optimum {-res.objective} disagrees with recomputed value {value}"
        )
    return MinimaxSolution(
        weights=SimplexWeights(lam),
        value=value,
        combined=combine(fs, lam),
        solver_id="lp",
        iterations=res.pivots,
        converged=True,
        dual_certificate=mu,
    )


def _solve_highs_backend(fs, B: np.ndarray) -> MinimaxSolution:
    """Epigraph formulation handed to scipy's HiGHS, for cross-validation."""
    from scipy.optimize import linprog

    m, ncols = B.shape
    c = np.zeros(m + 1)
    c[m] = 1.0
    A_ub = np.hstack([B.T, -np.ones((ncols, 1))])
    A_eq = np.concatenate([np.ones(m), [0.0]])[None, :]
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=np.zeros(ncols),
        A_eq=A_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * m + [(None, None)],
        method="highs",
    )
    if not res.success:
        lam = np.full(m, 1.0 / m)
        return MinimaxSolution(
            weights=SimplexWeights(lam),
            value=_max_combination(B, lam),
            combined=combine(fs, lam),
            solver_id="highs",
            iterations=int(res.nit),
            converged=False,
            message=f"HiGHS status {res.status}: {res.message}",
        )
    lam = _normalized(res.x[:m])
    mu = _normalized(-np.asarray(res.ineqlin.marginals))
    return MinimaxSolution(
        weights=SimplexWeights(lam),
        value=_max_combination(B, lam),
        combined=combine(fs, lam),
        solver_id="highs",
        iterations=int(res.nit),
        converged=True,
        dual_certificate=mu,
    )


def _support_candidates(vectors, max_prefix: int, cap: int = 16) -> list[np.ndarray]:
    """Distinct index sets from relative thresholds and sorted prefixes.

    Prefixes of the magnitude ordering matter on degenerate instances where
    no threshold separates a genuinely small weight from decaying noise; for
    a handful of functions they sweep every support size.
    """
    seen: dict[frozenset, np.ndarray] = {}

    def add(idx: np.ndarray) -> None:
        key = frozenset(idx.tolist())
        if idx.size and key not in seen and len(seen) < cap:
            seen[key] = np.sort(idx)

    for v in vectors:
        mx = v.max()
        if mx <= 0.0:
            continue
        for kappa in (1e-1, 1e-2, 1e-4, 1e-8):
            add(np.flatnonzero(v > kappa * mx))
    for v in vectors:
        order = np.argsort(-v, kind="stable")
        for size in range(1, min(max_prefix, v.size) + 1):
            add(order[:size])
    return list(seen.values())


def _equalize_primal(B, rows, cols):
    """Weights on `rows` making every column in `cols` attain a common value."""
    M = np.zeros((cols.size + 1, rows.size + 1))
    M[: cols.size, : rows.size] = B[np.ix_(rows, cols)].T
    M[: cols.size, rows.size] = -1.0
    M[cols.size, : rows.size] = 1.0
    rhs = np.zeros(cols.size + 1)
    rhs[cols.size] = 1.0
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    lam = np.zeros(B.shape[0])
    lam[rows] = sol[: rows.size]
    return _normalized(lam)


def _equalize_dual(B, rows, cols):
    """Weights on `cols` making every row in `rows` attain a common value."""
    D = np.zeros((rows.size + 1, cols.size + 1))
    D[: rows.size, : cols.size] = B[np.ix_(rows, cols)]
    D[: rows.size, cols.size] = -1.0
    D[rows.size, : cols.size] = 1.0
    rhs = np.zeros(rows.size + 1)
    rhs[rows.size] = 1.0
    sol, *_ = np.linalg.lstsq(D, rhs, rcond=None)
    mu = np.zeros(B.shape[1])
    mu[cols] = sol[: cols.size]
    return _normalized(mu)


def _polish(B: np.ndarray, lam_srcs, mu_srcs, band: float):
    """Active-set refinement of an approximate saddle point.

    Enumerates support candidates from the iterate estimates (last iterates
    concentrate multiplicatively, averages are stable), solves the
    equalized subgame by least squares on each side, and returns the best
    exactly-recomputed primal value and dual bound found.  The caller
    accepts a pair only when the exact gap certifies optimality, so a bad
    guess here costs time, never correctness.
    """
    m = B.shape[0]
    row_cands = _support_candidates(lam_srcs, max_prefix=min(m, 8), cap=10)
    scores = (lam_srcs[0][:, None] * B).sum(axis=0)
    near_active = np.flatnonzero(scores >= scores.max() - band)
    col_cands = _support_candidates(
        list(mu_srcs) + [scores - scores.min()], max_prefix=min(m + 2, 10), cap=12
    )
    if near_active.size:
        col_cands.append(near_active)
    pairs = sorted(
        ((rows, cols) for rows in row_cands for cols in col_cands),
        key=lambda rc: (abs(rc[0].size - rc[1].size), rc[0].size),
    )
    best_primal = None  # (value, lam)
    best_dual = None  # (bound, mu)
    for rows, cols in pairs:
        lam = _equalize_primal(B, rows, cols)
        value = _max_combination(B, lam)
        if best_primal is None or value < best_primal[0]:
            best_primal = (value, lam)
        mu = _equalize_dual(B, rows, cols)
        bound = _certificate_bound(B, mu)
        if best_dual is None or bound > best_dual[0]:
            best_dual = (bound, mu)
        if best_primal[0] - best_dual[0] <= 1e-12:
            break
    return best_primal, best_dual


def _solve_first_order_backend(
    fs,
    B: np.ndarray,
    gap_tol: float = 1e-7,
    max_iters: int = 120_000,
    check_every: int = 50,
) -> MinimaxSolution:
    """Entropic mirror-prox on the saddle form, with verified polishing.

    The best primal value and best dual lower bound are tracked separately
    across raw averages and polished active-set candidates; convergence is
    certified from their exact gap, never from iteration counts alone.
    Budget exhaustion returns a non-converged result carrying the best
    feasible weights found.
    """
    m, ncols = B.shape
    beta = float(np.abs(B).max())
    eta = 0.5 / beta
    lam = np.full(m, 1.0 / m)
    mu = np.full(ncols, 1.0 / ncols)
    lam_acc = np.zeros(m)
    mu_acc = np.zeros(ncols)
    best_primal = (_max_combination(B, lam), lam.copy())
    best_dual = (_certificate_bound(B, mu), mu.copy())

    def grad_lam(mu_vec):
        return (B * mu_vec[None, :]).sum(axis=1)

    def grad_mu(lam_vec):
        return (lam_vec[:, None] * B).sum(axis=0)

    def result(iters: int, converged: bool) -> MinimaxSolution:
        gap = best_primal[0] - best_dual[0]
        note = f"duality gap {gap:.3e}"
        if not converged:
            note = f"iteration budget exhausted at {note}"
        return MinimaxSolution(
            weights=SimplexWeights(best_primal[1]),
            value=best_primal[0],
            combined=combine(fs, best_primal[1]),
            solver_id="first-order",
            iterations=iters,
            converged=converged,
            dual_certificate=best_dual[1],
            message=note,
        )

    iters = 0
    chunk = check_every
    while iters < max_iters:
        for _ in range(min(chunk, max_iters - iters)):
            lam_h = lam * np.exp(-eta * grad_lam(mu))
            lam_h /= lam_h.sum()
            mu_h = mu * np.exp(eta * grad_mu(lam))
            mu_h /= mu_h.sum()
            lam = lam * np.exp(-eta * grad_lam(mu_h))
            lam /= lam.sum()
            mu = mu * np.exp(eta * grad_mu(lam_h))
            mu /= mu.sum()
            lam_acc += lam_h
            mu_acc += mu_h
            iters += 1
        chunk = min(2 * chunk, 4000)
        lam_bar = _normalized(lam_acc)
        mu_bar = _normalized(mu_acc)
        for cand in (lam_bar, lam):
            value = _max_combination(B, cand)
            if value < best_primal[0]:
                best_primal = (value, cand.copy())
        for cand in (mu_bar, mu):
            bound = _certificate_bound(B, cand)
            if bound > best_dual[0]:
                best_dual = (bound, cand.copy())
        gap = best_primal[0] - best_dual[0]
        polished_primal, polished_dual = _polish(
            B, (lam_bar, lam), (mu_bar, mu), band=max(2.0 * gap, 1e-9)
        )
        if polished_primal is not None and polished_primal[0] < best_primal[0]:
            best_primal = polished_primal
        if polished_dual is not None and polished_dual[0] > best_dual[0]:
            best_dual = polished_dual
        if best_primal[0] - best_dual[0] <= gap_tol:
            return result(iters, converged=True)
    return result(iters, converged=False)


BACKENDS = ("lp", "first-order", "highs")


def solve_minimax(
    fs: Sequence[SampledFunction], backend: str = "lp", **options
) -> MinimaxSolution:
    """Minimize the sup norm of a convex combination of the given functions."""
    _check_inputs(fs)
    if backend not in BACKENDS:
        raise ValidationError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    B = _signed_matrix(fs)
    if np.abs(B).max() == 0.0:
        return _trivial_solution(fs, backend)
    if backend == "lp":
        sol = _solve_lp_backend(fs, B, **options)
    elif backend == "highs":
        sol = _solve_highs_backend(fs, B, **options)
    else:
        sol = _solve_first_order_backend(fs, B, **options)
    recomputed = sup_norm(sol.combined)
    if abs(recomputed - sol.value) > 1e-10 * (1.0 + abs(sol.value)):
        raise InvariantViolationError(
            f"reported value {sol.value} drifts from recomputation {recomputed}"
        )
    return sol


def solve_minimax_oracle(fs: Sequence[SampledFunction], **options) -> MinimaxSolution:
    """Cross-validation solver from a different algorithm family than "lp"."""
    return solve_minimax(fs, backend="first-order", **options)


def verify_certificate(
    fs: Sequence[SampledFunction],
    solution: MinimaxSolution,
    tol: float = CERTIFICATE_TOL,
) -> tuple[bool, dict]:
    """Check a dual weighting proves the reported optimum from scratch.

    The certificate must be a probability vector over (grid point, sign)
    constraints whose induced lower bound matches the reported value.
    """
    _check_inputs(fs)
    mu = solution.dual_certificate
    details: dict = {"value": solution.value}
    if mu is None:
        return False, {**details, "reason": "no certificate attached"}
    mu = np.asarray(mu, dtype=float)
    B = _signed_matrix(fs)
    if mu.shape != (B.shape[1],):
        return False, {**details, "reason": f"certificate shape {mu.shape}"}
    if np.any(mu < -1e-12):
        return False, {**details, "reason": "negative certificate entry"}
    mass = float(mu.sum())
    details["mass"] = mass
    if abs(mass - 1.0) > tol:
        return False, {**details, "reason": f"certificate mass {mass}"}
    lower = _certificate_bound(B, mu)
    details["lower_bound"] = lower
    details["gap"] = solution.value - lower
    ok = abs(solution.value - lower) <= tol
    if not ok:
        details["reason"] = "lower bound does not match the reported value"
    return ok, details


@dataclass(frozen=True)
class ConvexificationStep:
    """One convex combination drawn from the tail window starting at index n."""

    n: int
    window: tuple[int, int]
    weights: np.ndarray
    achieved: float
    target: float
    met: bool
    signed_sup: float
    solver_id: str
    tolerance: float
    dual_certificate: np.ndarray | None = None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "window": [self.window[0], self.window[1]],
            "weights": np.asarray(self.weights).tolist(),
            "achieved": self.achieved,
            "target": self.target,
            "met": self.met,
            "signed_sup": self.signed_sup,
            "solver_id": self.solver_id,
            "tolerance": self.tolerance,
            "dual_certificate": (
                None
                if self.dual_certificate is None
                else np.asarray(self.dual_certificate).tolist()
            ),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConvexificationStep":
        cert = obj.get("dual_certificate")
        return cls(
            n=int(obj["n"]),
            window=(int(obj["window"][0]), int(obj["window"][1])),
            weights=np.asarray(obj["weights"], dtype=float),
            achieved=float(obj["achieved"]),
            target=float(obj["target"]),
            met=bool(obj["met"]),
            signed_sup=float(obj["signed_sup"]),
            solver_id=str(obj["solver_id"]),
            tolerance=float(obj["tolerance"]),
            dual_certificate=None if cert is None else np.asarray(cert, dtype=float),
        )


def reciprocal_schedule(n: int) -> float:
    return 1.0 / n


def doubling_windows(n: int, length: int):
    """Window ends m = n, n+2, n+4, n+8, ... capped at the sequence end."""
    yield min(n, length)
    offset = 2
    while n + offset < length:
        yield n + offset
        offset *= 2
    if n < length:
        yield length


def build_convexification(
    seq: FunctionSequence,
    num_steps: int,
    schedule: Callable[[int], float] = reciprocal_schedule,
    window_policy: Callable[[int, int], "object"] = doubling_windows,
    backend: str = "lp",
    tolerance: float = DEFAULT_VALUE_TOL,
    solver_options: dict | None = None,
) -> list[ConvexificationStep]:
    """Build steps g_n in the convex hull of |f_n|, |f_{n+1}|, ... meeting a schedule.

    Absolute values are combined for the sup-norm objective; the same weights
    applied to the signed originals can only do better, which is recorded and
    asserted per step.  A step whose target outlives the available tail is
    returned unmet with the best achieved value.
    """
    if num_steps < 1:
        raise ValidationError("need at least one step")
    if num_steps > len(seq):
        raise ValidationError(
            f"cannot start {num_steps} steps in a sequence of {len(seq)} terms"
        )
    targets = [schedule(n) for n in range(1, num_steps + 1)]
    if any(t <= 0.0 for t in targets):
        raise ValidationError("schedule must be positive")
    if any(b >= a for a, b in zip(targets, targets[1:])):
        # nonincreasing is fine; outright increases are not a schedule
        if any(b > a for a, b in zip(targets, targets[1:])):
            raise ValidationError("schedule must be nonincreasing")
    options = solver_options or {}

    steps: list[ConvexificationStep] = []
    for n in range(1, num_steps + 1):
        target = targets[n - 1]
        best: tuple[float, int, MinimaxSolution] | None = None
        met = False
        for m in window_policy(n, len(seq)):
            abs_terms = [absolute(seq.term(k)) for k in range(n, m + 1)]
            sol = solve_minimax(abs_terms, backend=backend, **options)
            if best is None or sol.value < best[0]:
                best = (sol.value, m, sol)
            if sol.converged and sol.value <= target + tolerance:
                met = True
                break
        assert best is not None
        achieved, m, sol = best
        signed_terms = [seq.term(k) for k in range(n, m + 1)]
        signed_sup = sup_norm(combine(signed_terms, sol.weights.values))
        if signed_sup > achieved + 1e-12:
            raise InvariantViolationError(
                f"signed combination exceeds absolute bound at step {n}"
            )
        steps.append(
            ConvexificationStep(
                n=n,
                window=(n, m),
                weights=sol.weights.values,
                achieved=achieved,
                target=target,
                met=met,
                signed_sup=signed_sup,
                solver_id=sol.solver_id,
                tolerance=tolerance,
                dual_certificate=sol.dual_certificate,
            )
        )
    return steps


@dataclass(frozen=True)
class VerificationVerdict:
    ok: bool
    violations: tuple[str, ...]


def verify_convexification(
    steps: Sequence[ConvexificationStep], seq: FunctionSequence
) -> VerificationVerdict:
    """Re-derive every step invariant from raw data; lists all violations found."""
    violations: list[str] = []
    for step in steps:
        tag = f"step {step.n}"
        n, m = step.window
        if n != step.n:
            violations.append(f"{tag}: window starts at {n}, not at its own index")
        if not (1 <= n <= m <= len(seq)):
            violations.append(f"{tag}: window [{n}, {m}] outside the sequence")
            continue
        w = np.asarray(step.weights, dtype=float)
        if w.shape != (m - n + 1,):
            violations.append(f"{tag}: {w.size} weights for a window of {m - n + 1}")
            continue
        if np.any(w < 0.0):
            violations.append(f"{tag}: negative weight entry")
        if abs(w.sum() - 1.0) > 1e-12:
            violations.append(f"{tag}: weights sum to {w.sum()!r}")
        abs_terms = [absolute(seq.term(k)) for k in range(n, m + 1)]
        recomputed = sup_norm(combine(abs_terms, w))
        if abs(recomputed - step.achieved) > 1e-10 * (1.0 + abs(recomputed)):
            violations.append(
                f"{tag}: achieved {step.achieved} vs recomputed {recomputed}"
            )
        signed = sup_norm(combine([seq.term(k) for k in range(n, m + 1)], w))
        if signed > recomputed + 1e-12:
            violations.append(f"{tag}: signed sup {signed} above absolute {recomputed}")
        if step.met and step.achieved > step.target + step.tolerance:
            violations.append(
                f"{tag}: marked met but {step.achieved} > {step.target} + tolerance"
            )
    return VerificationVerdict(ok=not violations, violations=tuple(violations))
