"""Batch experiment runner: tables and JSON out, one verb per invocation.

Verbs: lattice-check, arzela, convexify, dini, envelope, corpus.  Flags
override config-file values, which override built-in defaults.  Exit codes
are 0 (all assertions passed), 1 (a mathematical assertion was violated or
a certification was refused), 2 (configuration or input error).  A fixed
seed makes every output byte-identical across runs and thread settings.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .convexify import (
    build_convexification,
    reciprocal_schedule,
    verify_convexification,
)
from .dominated import dini_certify, dominated_convergence_report
from .errors import DomconvError, InvariantViolationError, ValidationError
from .functionals import (
    apply,
    envelope,
    greatest_lipschitz_minorant,
    meet_defect_bounds,
    trapezoid_functional,
)
from .grids import FunctionSequence, Grid, SampledFunction, sampled

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2

DEFAULTS = {
    "grid": "auto",  # per-corpus recommended grid; an integer forces uniform
    "horizon": 200,
    "tol": 1e-2,
    "lipschitz": None,  # per corpus entry
    "backend": "lp",
    "seed": 0,
    "schedule": "1/n",  # or a positive constant target
    "count": 1000,
    "terms": 128,
    "steps": 8,
    "n": 1,
}


@dataclass
class RunConfig:
    """Resolved settings for one command invocation."""

    corpus: str | None = None
    grid: object = "auto"
    horizon: int = 200
    tol: float = 1e-2
    lipschitz: float | None = None
    backend: str = "lp"
    seed: int = 0
    schedule: str = "1/n"
    count: int = 1000
    terms: int = 128
    steps: int = 8
    n: int = 1
    out: str | None = None
    input: str | None = None

    def validate(self) -> None:
        for name in ("horizon", "count", "terms", "steps", "n"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"--{name} must be a positive integer")
        if not self.tol > 0.0:
            raise ValidationError("--tol must be positive")
        if self.lipschitz is not None and not self.lipschitz >= 0.0:
            raise ValidationError("--lipschitz must be >= 0")
        if self.grid != "auto" and int(self.grid) < 2:
            raise ValidationError("--grid must be 'auto' or an integer >= 2")


def _resolve(args: argparse.Namespace) -> RunConfig:
    file_values = {}
    if getattr(args, "config", None):
        try:
            file_values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config file {args.config}: {exc}")
        if not isinstance(file_values, dict):
            raise ValidationError("config file must hold a JSON object")
    cfg = RunConfig()
    for name in (
        "corpus",
        "grid",
        "horizon",
        "tol",
        "lipschitz",
        "backend",
        "seed",
        "schedule",
        "count",
        "terms",
        "steps",
        "n",
        "out",
        "input",
    ):
        value = getattr(args, name, None)
        if value is None:
            value = file_values.get(name, DEFAULTS.get(name, getattr(cfg, name)))
        setattr(cfg, name, value)
    for name in ("horizon", "seed", "count", "terms", "steps", "n"):
        setattr(cfg, name, int(getattr(cfg, name)))
    cfg.tol = float(cfg.tol)
    if cfg.lipschitz is not None:
        cfg.lipschitz = float(cfg.lipschitz)
    if cfg.grid != "auto":
        cfg.grid = int(cfg.grid)
    cfg.validate()
    return cfg


def _pick_grid(cfg: RunConfig, entry: corpus_mod.CorpusEntry | None, n_terms: int) -> Grid:
    if cfg.grid == "auto":
        if entry is None:
            return Grid.uniform(1025)
        return entry.recommended_grid(n_terms)
    return Grid.uniform(int(cfg.grid))


def _pick_lipschitz(
    cfg: RunConfig, entry: corpus_mod.CorpusEntry, n_terms: int, grid: Grid
) -> float:
    if cfg.lipschitz is not None:
        return cfg.lipschitz
    return entry.sequence_lipschitz(n_terms, grid)


def _parse_schedule(cfg: RunConfig):
    if cfg.schedule == "1/n":
        return reciprocal_schedule
    try:
        target = float(cfg.schedule)
    except ValueError:
        raise ValidationError(
            f"--schedule must be '1/n' or a positive number, got {cfg.schedule!r}"
        )
    if not target > 0.0:
        raise ValidationError("--schedule constant must be positive")
    return lambda n: target


def _load_sequence(
    cfg: RunConfig, default_corpus: str, n_terms: int
) -> tuple[FunctionSequence, str, float | None]:
    """Sequence from a JSON file (--input) or a corpus entry (--corpus)."""
    if cfg.input is not None:
        try:
            payload = json.loads(Path(cfg.input).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read input file {cfg.input}: {exc}")
        seq = FunctionSequence.from_json(payload)
        return seq, Path(cfg.input).name, cfg.lipschitz
    entry = corpus_mod.get_entry(cfg.corpus or default_corpus)
    grid = _pick_grid(cfg, entry, n_terms)
    seq = entry.sequence(n_terms, grid)
    return seq, entry.id, _pick_lipschitz(cfg, entry, n_terms, grid)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


def _emit(cfg: RunConfig, obj: dict, csv_rows=None) -> None:
    if cfg.out is None:
        return
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_json(out.with_suffix(".json"), obj)
    if csv_rows is not None:
        _write_csv(out.with_suffix(".csv"), csv_rows)


def cmd_lattice_check(cfg: RunConfig) -> int:
    """Exact lattice identity plus the envelope defect inequality on random data."""
    rng = np.random.default_rng(cfg.seed)
    sizes = [8, 64, cfg.grid if cfg.grid != "auto" else 1025]
    identity_violations = 0
    pairs = 0
    for size in sizes:
        grid = Grid.uniform(int(size))
        per_size = max(1, cfg.count // len(sizes))
        g = rng.uniform(-1.0, 1.0, (per_size, grid.size))
        h = rng.uniform(-1.0, 1.0, (per_size, grid.size))
        lhs = np.maximum(g, h) + np.minimum(g, h)
        identity_violations += int(np.sum(np.any(lhs != g + h, axis=1)))
        pairs += per_size

    grid = Grid.uniform(64)
    phi = trapezoid_functional(grid)
    defect_checked = 0
    defect_violations = 0
    max_slack = -np.inf
    for _ in range(max(1, cfg.count // 10)):
        L = float(rng.uniform(0.5, 40.0))
        f1 = sampled(grid, rng.uniform(0.0, 2.0, grid.size))
        f2 = sampled(grid, f1.values * rng.uniform(0.0, 1.0, grid.size))
        h = greatest_lipschitz_minorant(
            sampled(grid, f1.values * rng.uniform(0.0, 1.0, grid.size)), L
        )
        g = greatest_lipschitz_minorant(
            sampled(grid, f2.values * rng.uniform(0.0, 1.0, grid.size)), L
        )
        lhs, rhs = meet_defect_bounds(phi, f1, f2, g, h, L)
        defect_checked += 1
        max_slack = max(max_slack, lhs - rhs)
        if lhs > rhs + 1e-12:
            defect_violations += 1

    report = {
        "grids": [int(s) for s in sizes],
        "pairs_checked": pairs,
        "identity_violations": identity_violations,
        "defect_checked": defect_checked,
        "defect_violations": defect_violations,
        "max_defect_slack": repr(max_slack),
        "seed": cfg.seed,
    }
    print(
        f"lattice identity: {pairs} pairs, {identity_violations} violations; "
        f"defect inequality: {defect_checked} instances, {defect_violations} violations"
    )
    _emit(cfg, report)
    return EXIT_OK if identity_violations == 0 and defect_violations == 0 else EXIT_ASSERTION


def cmd_arzela(cfg: RunConfig) -> int:
    """Quadrature-functional convergence table for a sequence."""
    seq, label, L = _load_sequence(cfg, "sliding_hump", max(cfg.terms, cfg.horizon))
    if L is None:
        raise ValidationError("--lipschitz is required with --input sequences")
    phi = trapezoid_functional(seq.grid)
    report = dominated_convergence_report(
        seq,
        phi,
        horizon=min(cfg.horizon, len(seq)),
        L=L,
        tolerance=cfg.tol,
        sequence_id=label,
        functional_id="trapezoid",
    )
    print(
        f"{label}: horizon {report.horizon}, first passage below {cfg.tol!r}: "
        f"{report.first_passage}, hypothesis diagnostic "
        f"{'ok' if report.hypothesis_ok else 'FIRED'} at x={report.hypothesis_point!r} "
        f"(late-window max {report.hypothesis_max!r})"
    )
    _emit(cfg, report.to_json(), report.csv_rows())
    return EXIT_OK


def cmd_convexify(cfg: RunConfig) -> int:
    """Build and verify a convexification meeting the target schedule."""
    seq, label, _ = _load_sequence(cfg, "sliding_hump", cfg.terms)
    steps = build_convexification(
        seq,
        num_steps=min(cfg.steps, len(seq)),
        schedule=_parse_schedule(cfg),
        backend=cfg.backend,
    )
    verdict = verify_convexification(steps, seq)
    met = sum(1 for s in steps if s.met)
    print(
        f"{label}: {len(steps)} steps, {met} met their targets; "
        f"verification {'clean' if verdict.ok else 'FAILED'}"
    )
    for violation in verdict.violations:
        print(f"  violation: {violation}")
    csv_rows = [["n", "m", "achieved", "target", "met"]]
    for s in steps:
        csv_rows.append(
            [s.n, s.window[1], repr(s.achieved), repr(s.target), s.met]
        )
    _emit(
        cfg,
        {
            "steps": [s.to_json() for s in steps],
            "verdict": {"ok": verdict.ok, "violations": list(verdict.violations)},
        },
        csv_rows,
    )
    return EXIT_OK if verdict.ok else EXIT_ASSERTION


def cmd_dini(cfg: RunConfig) -> int:
    """Certify (or refuse) monotone uniform decay of a sequence."""
    seq, label, _ = _load_sequence(cfg, "monotone_power", cfg.terms)
    verdict = dini_certify(seq.terms, cfg.tol)
    print(f"{label}: {verdict.describe()}")
    _emit(cfg, verdict.to_json())
    return EXIT_OK if verdict.certified else EXIT_ASSERTION


def cmd_envelope(cfg: RunConfig) -> int:
    """Envelope value and witness for one function at a Lipschitz bound."""
    if cfg.input is not None:
        try:
            payload = json.loads(Path(cfg.input).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read input file {cfg.input}: {exc}")
        f = SampledFunction.from_json(payload)
        grid = f.grid
        L = cfg.lipschitz if cfg.lipschitz is not None else 1.0
        label = cfg.input
    else:
        entry = corpus_mod.get_entry(cfg.corpus or "power_gap")
        grid = _pick_grid(cfg, entry, cfg.n)
        f = entry.generate(cfg.n, grid)
        L = (
            cfg.lipschitz
            if cfg.lipschitz is not None
            else entry.lipschitz(cfg.n, grid)
        )
        label = f"{entry.id} term {cfg.n}"
    phi = trapezoid_functional(grid)
    result = envelope(phi, f, L)
    print(
        f"{label}: envelope value {result.value!r} at L={L!r} "
        f"(plain functional value {apply(phi, f)!r})"
    )
    _emit(cfg, result.to_json())
    return EXIT_OK


def cmd_corpus(cfg: RunConfig, action: str, entry_id: str | None) -> int:
    if action == "list":
        for entry in corpus_mod.list_entries():
            flags = []
            if entry.pointwise_null:
                flags.append("pointwise-null")
            if entry.uniformly_null:
                flags.append("uniformly-null")
            if entry.monotone_decreasing:
                flags.append("monotone")
            print(
                f"{entry.id}: bound {entry.bound!r}; {', '.join(flags) or 'no flags'}; "
                f"{entry.description}"
            )
        return EXIT_OK
    entry = corpus_mod.get_entry(entry_id or "")
    grid = _pick_grid(cfg, entry, cfg.n)
    f = entry.generate(cfg.n, grid)
    payload = f.to_json()
    text = json.dumps(payload, indent=2, sort_keys=True)
    if cfg.out is None:
        print(text)
    else:
        _emit(cfg, payload)
        print(f"{entry.id} term {cfg.n} on {grid.size} points written")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", help="grid size, or 'auto' for the corpus default")
    parser.add_argument("--horizon", type=int, help="tail truncation horizon")
    parser.add_argument("--tol", type=float, help="tolerance for the verb's checks")
    parser.add_argument("--lipschitz", type=float, help="Lipschitz bound override")
    parser.add_argument(
        "--backend",
        choices=["lp", "first-order", "highs"],
        help="minimax solver backend",
    )
    parser.add_argument("--seed", type=int, help="random seed for generated instances")
    parser.add_argument("--out", help="output path prefix (.json/.csv written)")
    parser.add_argument("--config", help="JSON config file; flags override it")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="domconv",
        description="Dominated convergence and convexification experiments on sampled grids.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("lattice-check", help="exact lattice identity + defect inequality")
    p.add_argument("--count", type=int, help="number of random instances")
    _add_common(p)

    p = sub.add_parser("arzela", help="quadrature convergence table for a corpus sequence")
    p.add_argument("--corpus", help="corpus id")
    p.add_argument("--terms", type=int, help="sequence length to generate")
    _add_common(p)

    p = sub.add_parser("convexify", help="build and verify a convexification")
    p.add_argument("--corpus", help="corpus id")
    p.add_argument("--terms", type=int, help="sequence length to generate")
    p.add_argument("--steps", type=int, help="number of convexification steps")
    _add_common(p)

    p = sub.add_parser("dini", help="certify monotone uniform decay")
    p.add_argument("--corpus", help="corpus id")
    p.add_argument("--terms", type=int, help="sequence length to generate")
    _add_common(p)

    p = sub.add_parser("envelope", help="envelope value and witness for one function")
    p.add_argument("--corpus", help="corpus id")
    p.add_argument("--n", type=int, help="term index")
    p.add_argument("--input", help="JSON file holding a sampled function")
    _add_common(p)

    p = sub.add_parser("corpus", help="list corpus entries or emit one term")
    p.add_argument("action", choices=["list", "emit"])
    p.add_argument("entry", nargs="?", help="corpus id (for emit)")
    p.add_argument("--n", type=int, help="term index")
    _add_common(p)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        if args.verb == "lattice-check":
            return cmd_lattice_check(cfg)
        if args.verb == "arzela":
            return cmd_arzela(cfg)
        if args.verb == "convexify":
            return cmd_convexify(cfg)
        if args.verb == "dini":
            return cmd_dini(cfg)
        if args.verb == "envelope":
            return cmd_envelope(cfg)
        if args.verb == "corpus":
            if args.action == "emit" and not args.entry:
                parser.error("corpus emit needs an entry id")
            return cmd_corpus(cfg, args.action, args.entry)
        parser.error(f"unknown verb {args.verb}")
    except InvariantViolationError as exc:
        print(f"mathematical assertion violated: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    except DomconvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
