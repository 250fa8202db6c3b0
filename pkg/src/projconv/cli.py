"""Command-line interface.

Exit codes::

    0  success
    1  check failed (verify found violations, stress found a contradiction,
       or the exhaustive budget was exceeded)
    2  bad input (system file, omega spec or arguments)
    3  simulated path was excluded (Y_n V = 0); the partial trace is written
    4  forge not applicable (the system converges, or no recipe applies)
    5  certification failed
    6  a requested corpus stratum cannot be built

Machine-readable output never contains timestamps, so identical inputs give
byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .decider import decide
from .engine import Mode, TraceStatus, init, iterate, status_of
from .errors import (
    BudgetExceeded, CertificationFailed, InternalExhaustive, NotApplicable,
    StratumUnsatisfiable, SystemFileError,
)
from .forge import DEFAULT_DELTA_MIN, DEFAULT_STEPS, certify, dispatch, forge, make_generator
from .formats import format_symbols, load_system, parse_omega, system_to_obj, write_trace_csv
from .harness import (
    PROFILES, CorpusSpec, Stratum, corpus_generate, cross_validate, default_corpus_spec, exhaustive_check,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_EXCLUDED = 3
EXIT_NOT_APPLICABLE = 4
EXIT_CERTIFICATION = 5
EXIT_STRATUM = 6


def _emit(obj, out) -> None:
    out.write(json.dumps(obj, indent=2) + "\n")


def _err(msg: str) -> None:
    print(f"projconv: {msg}", file=sys.stderr)


def cmd_decide(args, out) -> int:
    system = load_system(args.file)
    _emit(decide(system).as_dict(), out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    system = load_system(args.file)
    mode = Mode(args.mode)
    try:
        omega = parse_omega(args.omega, system.d)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_PARSE
    if omega == "forge":
        try:
            omega = forge(system)
        except (NotApplicable, InternalExhaustive) as exc:
            _err(f"forge: {exc}")
            return EXIT_NOT_APPLICABLE
    state = init(system, mode)
    records = iterate(state, omega, args.steps)
    if args.out in (None, "-"):
        write_trace_csv(records, out)
    else:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_trace_csv(records, fh)
    status = status_of(state)
    if status is TraceStatus.EXCLUDED:
        _err(f"path excluded at step {state.n}: the product annihilates V")
        return EXIT_EXCLUDED
    if status is TraceStatus.EXHAUSTED:
        _err(f"exact mode stopped at step {state.n}: bit limit reached")
    return EXIT_OK


def cmd_forge(args, out) -> int:
    system = load_system(args.file)
    try:
        case = dispatch(system)
    except (NotApplicable, InternalExhaustive) as exc:
        _err(f"forge: {exc}")
        return EXIT_NOT_APPLICABLE
    try:
        cert = certify(system, case, steps=args.steps, delta_min=args.delta_min, mode=Mode(args.mode))
    except CertificationFailed as exc:
        _emit({**case.as_dict(), "certified": False, "oscillation": exc.oscillation}, out)
        _err(f"certification failed: {exc}")
        return EXIT_CERTIFICATION
    omega_path = Path(args.omega_out) if args.omega_out else Path(args.file).with_suffix(".omega.txt")
    prefix = make_generator(system, case).prefix(cert.steps_used)
    omega_path.write_text(format_symbols(prefix, system.d) + "\n", encoding="utf-8")
    _emit({**cert.as_dict(), "certified": True, "omega_file": str(omega_path)}, out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    system = load_system(args.file)
    try:
        report = exhaustive_check(system, args.depth, budget=args.budget)
    except BudgetExceeded as exc:
        _err(str(exc))
        return EXIT_FAILED
    _emit(report.as_dict(), out)
    return EXIT_OK if report.ok else EXIT_FAILED


def parse_stratum(text: str) -> Stratum:
    """``profile,vpos|vzero,plain|singular=count``; the last two parts are optional."""
    body, _, count = text.partition("=")
    parts = [p.strip() for p in body.split(",")]
    if not 1 <= len(parts) <= 3 or parts[0] not in PROFILES:
        raise ValueError(f"bad stratum {text!r}; expected profile[,vpos|vzero[,plain|singular]][=count]")
    vflag = parts[1] if len(parts) > 1 else "vpos"
    sflag = parts[2] if len(parts) > 2 else "plain"
    if vflag not in ("vpos", "vzero") or sflag not in ("plain", "singular"):
        raise ValueError(f"bad stratum flags in {text!r}")
    try:
        n = int(count) if count else 1
    except ValueError:
        raise ValueError(f"bad stratum count in {text!r}") from None
    if n < 1:
        raise ValueError(f"stratum count must be positive in {text!r}")
    return Stratum(parts[0], vflag == "vpos", sflag == "singular", n)


def cmd_stress(args, out) -> int:
    try:
        strata = [parse_stratum(s) for s in args.stratum or ()]
    except ValueError as exc:
        _err(str(exc))
        return EXIT_PARSE
    if strata:
        spec = CorpusSpec(seed=args.seed, strata=tuple(strata))
    else:
        spec = default_corpus_spec(args.seed, args.count)
    try:
        corpus = corpus_generate(spec)
    except StratumUnsatisfiable as exc:
        _err(str(exc))
        return EXIT_STRATUM
    mode = Mode(args.mode)
    rows = []
    totals = {"systems": len(corpus), "classified": 0, "undecided": 0, "excluded": 0, "contradictions": 0}
    for idx, system in enumerate(corpus):
        rep = cross_validate(
            system, samples=args.samples, steps=args.steps, seed=args.seed * 1_000_003 + idx,
            mode=mode, raise_on_contradiction=False,
        )
        totals["classified"] += rep.classified
        totals["undecided"] += rep.undecided
        totals["excluded"] += rep.excluded
        totals["contradictions"] += len(rep.contradictions)
        rows.append({"index": idx, "system": system_to_obj(system), **rep.as_dict()})
    classified = totals["classified"]
    totals["undecided_rate"] = totals["undecided"] / classified if classified else 0.0
    report = {
        "seed": args.seed,
        "steps": args.steps,
        "samples": args.samples,
        "mode": mode.value,
        "totals": totals,
        "systems": rows,
    }
    _emit(report, out)
    return EXIT_OK if totals["contradictions"] == 0 else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="projconv",
        description="Convergence of normalized products of nonnegative 2x2 matrices.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("decide", help="print the convergence verdict as JSON")
    s.add_argument("file")
    s.set_defaults(func=cmd_decide)

    s = sub.add_parser("simulate", help="write a step-by-step trace as CSV")
    s.add_argument("file")
    s.add_argument("--omega", required=True, help="digits, cycle:<digits>, random:<seed> or forge")
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--mode", choices=[m.value for m in Mode], default="exact")
    s.add_argument("--out", default="-", help="CSV path (default: stdout)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("forge", help="build and certify a divergent path")
    s.add_argument("file")
    s.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    s.add_argument("--delta-min", type=float, default=DEFAULT_DELTA_MIN)
    s.add_argument("--mode", choices=[m.value for m in Mode], default="exact")
    s.add_argument("--omega-out", help="where to write the symbol prefix (default: FILE with .omega.txt)")
    s.set_defaults(func=cmd_forge)

    s = sub.add_parser("verify", help="exhaustively check the engine identities up to a depth")
    s.add_argument("file")
    s.add_argument("--depth", type=int, default=8)
    s.add_argument("--budget", type=int, default=200_000)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("stress", help="cross-validate the decider on a seeded corpus")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=60)
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--mode", choices=[m.value for m in Mode], default="exact")
    s.add_argument(
        "--stratum", action="append",
        help="profile[,vpos|vzero[,plain|singular]][=count]; repeatable, replaces the default corpus",
    )
    s.set_defaults(func=cmd_stress)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    for name in ("steps", "depth", "samples", "count"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            _err(f"--{name} must be >= 1")
            return EXIT_PARSE
    try:
        return args.func(args, out)
    except SystemFileError as exc:
        _err(str(exc))
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
