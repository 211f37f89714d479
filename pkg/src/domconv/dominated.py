"""Dominated-convergence machinery: greedy minorant traces, Dini certificates, reports.

For a pointwise-nonincreasing sequence (f_n) the greedy construction picks
near-optimal Lipschitz minorants g_n, folds them into running meets
h_n = g_1 ∧ ... ∧ g_n, and tracks the telescoping budget that bounds
env(f_n) - phi(h_n).  For a general nonnegative bounded sequence the
report builds truncated tail-sup envelopes first and then sandwiches
phi(g_n) between 0 and the envelope values, together with truncation and
pointwise-hypothesis diagnostics that finite data honestly supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolationError, ValidationError
from .functionals import PositiveFunctional, apply, envelope, is_lipschitz
from .grids import (
    FunctionSequence,
    SampledFunction,
    running_meet,
    sup_norm,
    tail_sup_envelopes,
)


def _check_nonincreasing(seq: FunctionSequence) -> None:
    for n in range(1, len(seq)):
        prev, cur = seq.terms[n - 1].values, seq.terms[n].values
        bad = np.flatnonzero(cur > prev)
        if bad.size:
            i = int(bad[0])
            raise ValidationError(
                f"sequence increases from term {n} to {n + 1} at grid point "
                f"x={seq.grid.points[i]}: {prev[i]} -> {cur[i]}"
            )


@dataclass(frozen=True)
class MinorantTrace:
    """Per-index record of the greedy minorant construction."""

    epsilon: float
    lipschitz_bound: float
    envelope_values: np.ndarray  # env(f_n)
    phi_g: np.ndarray  # phi(g_n) for the selected minorants
    phi_h: np.ndarray  # phi(h_n) for the running meets
    sup_h: np.ndarray  # sup norm of h_n
    budget: np.ndarray  # sum_{k<=n} eps / 2^(k+1)
    slack: np.ndarray  # subtraction delta_n applied to each witness
    selections: tuple[SampledFunction, ...]
    meets: tuple[SampledFunction, ...]

    def __len__(self) -> int:
        return self.envelope_values.size

    def csv_rows(self) -> list[list]:
        rows = [["n", "phi_g", "envelope", "sup_h", "budget"]]
        for n in range(len(self)):
            rows.append(
                [
                    n + 1,
                    repr(float(self.phi_g[n])),
                    repr(float(self.envelope_values[n])),
                    repr(float(self.sup_h[n])),
                    repr(float(self.budget[n])),
                ]
            )
        return rows

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "lipschitz_bound": self.lipschitz_bound,
            "envelope_values": self.envelope_values.tolist(),
            "phi_g": self.phi_g.tolist(),
            "phi_h": self.phi_h.tolist(),
            "sup_h": self.sup_h.tolist(),
            "budget": self.budget.tolist(),
            "slack": self.slack.tolist(),
        }


def greedy_minorant_trace(
    seq: FunctionSequence,
    phi: PositiveFunctional,
    epsilon: float,
    L: float,
    slack_schedule=None,
) -> MinorantTrace:
    """Run the inductive construction on a pointwise-nonincreasing sequence.

    Selects g_n within eps/2^(n+1) of the envelope optimum (exactly optimal
    when the slack schedule is zero), and verifies the telescoping bound
    env(f_n) - phi(h_n) <= sum_{k<=n} eps/2^(k+1) index by index.

    The slack schedule, when given, subtracts delta_n from the optimal
    witness (clamped at zero) to exercise the selection rule away from
    equality; each delta_n must stay below eps/2^(n+1).
    """
    if not (np.isfinite(epsilon) and epsilon > 0.0):
        raise ValidationError("epsilon must be positive")
    _check_nonincreasing(seq)
    if np.any(seq.terms[-1].values < 0.0):
        i = int(np.argmin(seq.terms[-1].values))
        raise ValidationError(
            f"terms must be nonnegative; last term has "
            f"{seq.terms[-1].values[i]} at x={seq.grid.points[i]}"
        )
    N = len(seq)
    if slack_schedule is None:
        slack = np.zeros(N)
    else:
        slack = np.asarray(list(slack_schedule), dtype=float)
        if slack.shape != (N,):
            raise ValidationError(f"slack schedule needs {N} entries")
    slices = epsilon / 2.0 ** (np.arange(1, N + 1) + 1)
    bad = np.flatnonzero((slack < 0.0) | ((slack > 0.0) & (slack >= slices)))
    if bad.size:
        n = int(bad[0]) + 1
        raise ValidationError(
            f"slack delta_{n}={slack[n - 1]} must lie in [0, eps/2^{n + 1}="
            f"{slices[n - 1]}) or the selection rule breaks"
        )

    env_values = np.empty(N)
    phi_g = np.empty(N)
    selections: list[SampledFunction] = []
    for n in range(N):
        res = envelope(phi, seq.terms[n], L)
        env_values[n] = res.value
        g = res.witness
        if slack[n] > 0.0:
            g = SampledFunction(seq.grid, np.maximum(g.values - slack[n], 0.0))
        phi_g[n] = apply(phi, g)
        # Zero slack attains the envelope optimum exactly, so the strict
        # selection rule holds with margin eps/2^(n+1); ">=" is its float
        # rendering once that margin shrinks below one ulp of the envelope.
        if not phi_g[n] >= env_values[n] - slices[n]:
            raise ValidationError(
                f"selection rule failed at n={n + 1}: phi(g)={phi_g[n]} vs "
                f"envelope {env_values[n]} - {slices[n]}; the slack is too "
                f"large for a functional of mass {phi.mass}"
            )
        selections.append(g)

    meets = running_meet(selections)
    phi_h = np.array([apply(phi, h) for h in meets])
    sup_h = np.array([sup_norm(h) for h in meets])
    budget = np.cumsum(slices)
    defect = env_values - phi_h
    bad = np.flatnonzero(defect > budget + 1e-12)
    if bad.size:
        n = int(bad[0]) + 1
        raise InvariantViolationError(
            f"inductive bound failed at n={n}: defect {defect[n - 1]} above "
            f"budget {budget[n - 1]}"
        )
    return MinorantTrace(
        epsilon=epsilon,
        lipschitz_bound=L,
        envelope_values=env_values,
        phi_g=phi_g,
        phi_h=phi_h,
        sup_h=sup_h,
        budget=budget,
        slack=slack,
        selections=tuple(selections),
        meets=tuple(meets),
    )


@dataclass(frozen=True)
class DiniVerdict:
    """Certificate (or refusal, with a witness) of monotone uniform decay."""

    certified: bool
    n_terms: int
    tolerance: float
    final_sup: float
    failed_condition: str | None = None
    witness_index: int | None = None
    witness_point: float | None = None
    witness_value: float | None = None

    def describe(self) -> str:
        if self.certified:
            return (
                f"certified: {self.n_terms} terms decrease pointwise and the "
                f"last has sup norm {self.final_sup!r} <= {self.tolerance!r}"
            )
        return (
            f"refused ({self.failed_condition}) at term {self.witness_index}, "
            f"x={self.witness_point!r}, value {self.witness_value!r}"
        )

    def to_json(self) -> dict:
        return {
            "certified": self.certified,
            "n_terms": self.n_terms,
            "tolerance": self.tolerance,
            "final_sup": self.final_sup,
            "failed_condition": self.failed_condition,
            "witness_index": self.witness_index,
            "witness_point": self.witness_point,
            "witness_value": self.witness_value,
        }


def dini_certify(hs, tolerance: float) -> DiniVerdict:
    """Certify that a list of functions decreases pointwise to within tolerance.

    Conditions: (a) pointwise nonincreasing in the index at every grid
    point, (b) no value below -tolerance, (c) the last term's sup norm is
    at most the tolerance.  A refusal names the failed condition and a
    witness grid point; it is a result, not an error.
    """
    hs = list(hs)
    if not hs:
        raise ValidationError("cannot certify an empty list")
    if not (np.isfinite(tolerance) and tolerance >= 0.0):
        raise ValidationError("tolerance must be finite and >= 0")
    grid = hs[0].grid
    final_sup = sup_norm(hs[-1])
    for n in range(1, len(hs)):
        bad = np.flatnonzero(hs[n].values > hs[n - 1].values)
        if bad.size:
            i = int(bad[0])
            return DiniVerdict(
                certified=False,
                n_terms=len(hs),
                tolerance=tolerance,
                final_sup=final_sup,
                failed_condition="monotone",
                witness_index=n + 1,
                witness_point=float(grid.points[i]),
                witness_value=float(hs[n].values[i]),
            )
    for n, h in enumerate(hs, start=1):
        bad = np.flatnonzero(h.values < -tolerance)
        if bad.size:
            i = int(bad[0])
            return DiniVerdict(
                certified=False,
                n_terms=len(hs),
                tolerance=tolerance,
                final_sup=final_sup,
                failed_condition="nonnegative",
                witness_index=n,
                witness_point=float(grid.points[i]),
                witness_value=float(h.values[i]),
            )
    if final_sup > tolerance:
        i = int(np.argmax(np.abs(hs[-1].values)))
        return DiniVerdict(
            certified=False,
            n_terms=len(hs),
            tolerance=tolerance,
            final_sup=final_sup,
            failed_condition="final_sup",
            witness_index=len(hs),
            witness_point=float(grid.points[i]),
            witness_value=float(hs[-1].values[i]),
        )
    return DiniVerdict(
        certified=True, n_terms=len(hs), tolerance=tolerance, final_sup=final_sup
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """Evidence table for phi(g_n) -> 0 under a uniform bound.

    Limits are never claimed from finite data: the report carries the value
    table, the first index after which every recorded value sits below the
    tolerance, a truncation diagnostic comparing tail envelopes at the
    horizon against a doubled horizon, and a pointwise-hypothesis
    diagnostic naming the grid point with the largest late-window values.
    """

    sequence_id: str
    functional_id: str
    horizon: int
    lipschitz_bound: float
    tolerance: float
    phi_g: np.ndarray
    envelope_values: np.ndarray
    first_passage: int | None
    truncation_horizon: int | None
    truncation_increment: float | None
    hypothesis_window: tuple[int, int]
    hypothesis_max: float
    hypothesis_point: float
    hypothesis_ok: bool
    trace: MinorantTrace

    def csv_rows(self) -> list[list]:
        rows = [["n", "phi_g", "envelope", "sup_h", "budget"]]
        for n in range(self.horizon):
            rows.append(
                [
                    n + 1,
                    repr(float(self.phi_g[n])),
                    repr(float(self.envelope_values[n])),
                    repr(float(self.trace.sup_h[n])),
                    repr(float(self.trace.budget[n])),
                ]
            )
        return rows

    def to_json(self) -> dict:
        return {
            "sequence_id": self.sequence_id,
            "functional_id": self.functional_id,
            "horizon": self.horizon,
            "lipschitz_bound": self.lipschitz_bound,
            "tolerance": self.tolerance,
            "phi_g": self.phi_g.tolist(),
            "envelope_values": self.envelope_values.tolist(),
            "first_passage": self.first_passage,
            "truncation_horizon": self.truncation_horizon,
            "truncation_increment": self.truncation_increment,
            "hypothesis_window": list(self.hypothesis_window),
            "hypothesis_max": self.hypothesis_max,
            "hypothesis_point": self.hypothesis_point,
            "hypothesis_ok": self.hypothesis_ok,
        }


def dominated_convergence_report(
    seq: FunctionSequence,
    phi: PositiveFunctional,
    horizon: int,
    L: float,
    tolerance: float = 1e-2,
    epsilon: float | None = None,
    diagnostic_window: int | None = None,
    sequence_id: str = "",
    functional_id: str = "",
) -> ConvergenceReport:
    """Sandwich phi(g_n) between 0 and envelope values of truncated tail sups.

    Terms must be nonnegative, bounded by the sequence bound, and
    L-Lipschitz on the grid so that each term is feasible for its own tail
    envelope; signed sequences go through their absolute values or a
    signed functional instead.
    """
    if not 1 <= horizon <= len(seq):
        raise ValidationError(f"horizon {horizon} outside 1..{len(seq)}")
    for n in range(1, horizon + 1):
        t = seq.term(n)
        if np.any(t.values < 0.0):
            i = int(np.argmin(t.values))
            raise ValidationError(
                f"term {n} is negative at x={seq.grid.points[i]}; the pipeline "
                f"needs nonnegative terms"
            )
        if not is_lipschitz(t, L):
            raise ValidationError(
                f"term {n} is not {L}-Lipschitz on the grid; the sandwich "
                f"needs every term feasible for its tail envelope"
            )
    if epsilon is None:
        epsilon = tolerance

    tails = tail_sup_envelopes(seq, horizon)
    tail_seq = FunctionSequence(tuple(tails), seq.bound)
    trace = greedy_minorant_trace(tail_seq, phi, epsilon, L)
    env_values = trace.envelope_values
    phi_g = np.array([apply(phi, seq.term(n)) for n in range(1, horizon + 1)])

    if np.any(phi_g < -1e-12) or np.any(phi_g > env_values + 1e-12):
        n = int(np.argmax(phi_g - env_values)) + 1
        raise InvariantViolationError(
            f"sandwich failed at n={n}: phi(g)={phi_g[n - 1]} vs envelope "
            f"{env_values[n - 1]}"
        )

    above = np.flatnonzero(phi_g >= tolerance)
    if above.size == 0:
        first_passage: int | None = 1
    elif above[-1] + 1 >= horizon:
        first_passage = None
    else:
        first_passage = int(above[-1]) + 2

    truncation_horizon: int | None = None
    truncation_increment: float | None = None
    extended = min(2 * horizon, len(seq))
    if extended > horizon:
        ext_tails = tail_sup_envelopes(seq, extended)
        increments = [
            float(np.max(ext_tails[n].values - tails[n].values))
            for n in range(horizon)
        ]
        truncation_horizon = extended
        truncation_increment = max(increments)

    if diagnostic_window is None:
        diagnostic_window = max(8, len(seq) // 8)
    diagnostic_window = min(diagnostic_window, len(seq))
    w_start = len(seq) - diagnostic_window + 1
    window_vals = np.stack(
        [np.abs(seq.term(k).values) for k in range(w_start, len(seq) + 1)], axis=0
    ).max(axis=0)
    worst = int(np.argmax(window_vals))

    return ConvergenceReport(
        sequence_id=sequence_id,
        functional_id=functional_id,
        horizon=horizon,
        lipschitz_bound=L,
        tolerance=tolerance,
        phi_g=phi_g,
        envelope_values=env_values,
        first_passage=first_passage,
        truncation_horizon=truncation_horizon,
        truncation_increment=truncation_increment,
        hypothesis_window=(w_start, len(seq)),
        hypothesis_max=float(window_vals[worst]),
        hypothesis_point=float(seq.grid.points[worst]),
        hypothesis_ok=bool(window_vals[worst] <= tolerance),
        trace=trace,
    )
