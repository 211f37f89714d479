"""Dominated convergence and uniform-norm convexification on sampled function spaces.

A numerical toolkit for function sequences on a finite grid model of a
compact interval: lattice envelopes, positive functionals and their
Lipschitz envelope extension, dominated-convergence evidence tables with
Dini certification, and LP-computed convexifications whose steps converge
uniformly on the chosen schedule.
"""

from .convexify import (
    ConvexificationStep,
    MinimaxSolution,
    SimplexWeights,
    VerificationVerdict,
    build_convexification,
    doubling_windows,
    reciprocal_schedule,
    solve_minimax,
    solve_minimax_oracle,
    verify_certificate,
    verify_convexification,
)
from .corpus import CorpusEntry, get_entry, list_entries, sliding_hump_grid
from .dominated import (
    ConvergenceReport,
    DiniVerdict,
    MinorantTrace,
    dini_certify,
    dominated_convergence_report,
    greedy_minorant_trace,
)
from .errors import (
    DomconvError,
    GridMismatchError,
    InvariantViolationError,
    ResolutionError,
    ValidationError,
)
from .functionals import (
    EnvelopeResult,
    PositiveFunctional,
    SignedFunctional,
    apply,
    apply_signed,
    envelope,
    greatest_lipschitz_minorant,
    is_lipschitz,
    meet_defect_bounds,
    trapezoid_functional,
)
from .grids import (
    FunctionSequence,
    Grid,
    SampledFunction,
    absolute,
    add,
    combine,
    lattice_join,
    lattice_meet,
    running_meet,
    sample,
    sampled,
    scale,
    sup_norm,
    tail_sup_envelope,
    tail_sup_envelopes,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceReport",
    "ConvexificationStep",
    "CorpusEntry",
    "DiniVerdict",
    "DomconvError",
    "EnvelopeResult",
    "FunctionSequence",
    "Grid",
    "GridMismatchError",
    "InvariantViolationError",
    "MinimaxSolution",
    "MinorantTrace",
    "PositiveFunctional",
    "ResolutionError",
    "SampledFunction",
    "SignedFunctional",
    "SimplexWeights",
    "ValidationError",
    "VerificationVerdict",
    "absolute",
    "add",
    "apply",
    "apply_signed",
    "build_convexification",
    "combine",
    "dini_certify",
    "dominated_convergence_report",
    "doubling_windows",
    "envelope",
    "get_entry",
    "greatest_lipschitz_minorant",
    "greedy_minorant_trace",
    "is_lipschitz",
    "lattice_join",
    "lattice_meet",
    "list_entries",
    "meet_defect_bounds",
    "reciprocal_schedule",
    "running_meet",
    "sample",
    "sampled",
    "scale",
    "sliding_hump_grid",
    "solve_minimax",
    "solve_minimax_oracle",
    "sup_norm",
    "tail_sup_envelope",
    "tail_sup_envelopes",
    "trapezoid_functional",
    "verify_certificate",
    "verify_convexification",
]
