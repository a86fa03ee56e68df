"""Command-line driver: check, run, diff, fuzz, and space over `.lh` files.

Exit codes: 0 value, 1 blame, 2 type or parse error, 3 stuck, 4 budget
exceeded.  The LH_BUDGET environment variable overrides the default step
budget when --budget is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

from .harness import diff_modes, run_fuzz
from .metering import Meter, series_json, write_series_csv
from .semantics import (
    CHOOSE_POLICIES,
    DEFAULT_ORACLE,
    ImplicationOracle,
    Machine,
    Outcome,
    OutcomeKind,
    axiom_oracle,
)
from .surface import ParseError, parse, parse_type, print_term, print_type
from .syntax import Mode, Refinement, Term
from .typecheck import TypeCheckError, check_source

DEFAULT_BUDGET = 100_000

EXIT_VALUE = 0
EXIT_BLAME = 1
EXIT_TYPE_ERROR = 2
EXIT_STUCK = 3
EXIT_BUDGET = 4


@dataclass
class RunConfig:
    mode: Mode = Mode.EIDETIC
    budget: int = DEFAULT_BUDGET
    trace: bool = False
    space: bool = False
    json: bool = False
    choose_policy: str = "lex-min"
    oracle: str = "alpha-eq"
    axioms: Optional[str] = None


def _default_budget() -> int:
    env = os.environ.get("LH_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def _load_oracle(config: RunConfig) -> ImplicationOracle:
    if config.oracle == "alpha-eq":
        return DEFAULT_ORACLE
    if config.oracle == "axioms":
        if not config.axioms:
            raise SystemExit("--oracle axioms requires --axioms FILE")
        with open(config.axioms) as fh:
            raw_pairs = json.load(fh)
        pairs = []
        for lhs, rhs in raw_pairs:
            t1, t2 = parse_type(lhs), parse_type(rhs)
            if not (isinstance(t1, Refinement) and isinstance(t2, Refinement)):
                raise SystemExit("axioms must relate refinement types")
            pairs.append((t1, t2))
        return axiom_oracle(pairs)
    raise SystemExit(f"unknown oracle {config.oracle!r}")


def _machine(config: RunConfig) -> Machine:
    return Machine(config.mode, oracle=_load_oracle(config), choose_policy=config.choose_policy)


def _read_program(path: str, runtime_forms: bool) -> Term:
    with open(path) as fh:
        text = fh.read()
    term = parse(text)
    if not runtime_forms:
        check_source(term)
    return term


def _outcome_dict(out: Outcome) -> dict:
    return {
        "kind": out.kind.name.lower(),
        "value": print_term(out.term) if out.term is not None else None,
        "label": out.label,
        "steps": out.steps,
        "stuck_reason": out.stuck_reason,
    }


def _outcome_exit(out: Outcome) -> int:
    return {
        OutcomeKind.VALUE: EXIT_VALUE,
        OutcomeKind.BLAME: EXIT_BLAME,
        OutcomeKind.STUCK: EXIT_STUCK,
        OutcomeKind.BUDGET: EXIT_BUDGET,
    }[out.kind]


def _print_outcome(out: Outcome) -> None:
    if out.kind is OutcomeKind.VALUE:
        print(print_term(out.term))
    elif out.kind is OutcomeKind.BLAME:
        print(f"blame {out.label}")
    elif out.kind is OutcomeKind.STUCK:
        print(f"stuck: {out.stuck_reason}")
    else:
        print(f"budget exceeded after {out.steps} steps")


def cmd_check(args) -> int:
    try:
        term = _read_program(args.file, runtime_forms=False)
        ty = check_source(term)
    except (ParseError, TypeCheckError) as exc:
        if args.json:
            print(json.dumps({"ok": False, "error": str(exc)}))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_TYPE_ERROR
    if args.json:
        print(json.dumps({"ok": True, "type": print_type(ty)}))
    else:
        print(print_type(ty))
    return EXIT_VALUE


def run_file(path: str, config: RunConfig, runtime_forms: bool = False, series_out: Optional[str] = None) -> int:
    try:
        term = _read_program(path, runtime_forms)
    except (ParseError, TypeCheckError) as exc:
        if config.json:
            print(json.dumps({"error": str(exc)}))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_TYPE_ERROR

    mach = _machine(config)
    if config.space:
        meter = Meter(series=True)
        out = mach.eval(term, config.budget, trace=config.trace, meter=meter)
        stats, series = meter.max, meter.series
    else:
        out = mach.eval(term, config.budget, trace=config.trace)
        stats, series = None, None

    if config.json:
        payload = {
            "mode": config.mode.value,
            "budget": config.budget,
            "result": _outcome_dict(out),
        }
        if config.trace and out.trace is not None:
            payload["trace"] = [
                {"step": s.index, "rule": s.rule, "term": print_term(s.term)} for s in out.trace
            ]
        if stats is not None:
            payload["space"] = {"max": stats.as_dict(), "series": series_json(series)}
        print(json.dumps(payload, indent=2))
    else:
        if config.trace and out.trace is not None:
            for s in out.trace:
                print(f"{s.index:6d} {s.rule}")
        if stats is not None:
            print("max " + " ".join(f"{k}={v}" for k, v in stats.as_dict().items()))
        _print_outcome(out)

    if series_out and series is not None:
        with open(series_out, "w", newline="") as fh:
            write_series_csv(series, fh)
    return _outcome_exit(out)


def cmd_run(args) -> int:
    config = RunConfig(
        mode=Mode.parse(args.mode),
        budget=args.budget,
        trace=args.trace,
        space=args.space,
        json=args.json,
        choose_policy=args.choose,
        oracle=args.oracle,
        axioms=args.axioms,
    )
    return run_file(args.file, config, runtime_forms=args.runtime_forms, series_out=args.series)


def cmd_space(args) -> int:
    config = RunConfig(mode=Mode.parse(args.mode), budget=args.budget, space=True, json=args.json)
    return run_file(args.file, config, runtime_forms=args.runtime_forms, series_out=args.series)


def cmd_diff(args) -> int:
    try:
        term = _read_program(args.file, runtime_forms=False)
    except (ParseError, TypeCheckError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TYPE_ERROR
    report = diff_modes(term, args.budget)
    print(json.dumps(report.as_dict(), indent=2))
    return 1 if report.failed else 0


def cmd_fuzz(args) -> int:
    report = run_fuzz(
        count=args.count,
        min_size=args.min_size,
        max_size=args.size,
        seed=args.seed,
        budget=args.budget,
        check_traces=args.check_traces,
    )
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"ok={report.ok} failures={len(report.failures)} report={args.out}")
    else:
        print(text)
    return 0 if report.ok else 1


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", default="eidetic", help="classic|forgetful|heedful|eidetic (or c|f|h|e)")
    p.add_argument("--budget", type=int, default=_default_budget())
    p.add_argument("--json", action="store_true")
    p.add_argument("--runtime-forms", action="store_true", help="skip the source-program check")
    p.add_argument("--series", metavar="OUT.CSV", help="write the per-step space series as CSV")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="lh", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="typecheck a source program in all four modes")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("run", help="evaluate a program under one mode")
    p.add_argument("file")
    _add_run_flags(p)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--space", action="store_true")
    p.add_argument("--choose", default="lex-min", choices=sorted(CHOOSE_POLICIES))
    p.add_argument("--oracle", default="alpha-eq", choices=["alpha-eq", "axioms"])
    p.add_argument("--axioms", help="JSON file of [source-type, implied-type] pairs")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("space", help="evaluate with space metering")
    p.add_argument("file")
    _add_run_flags(p)
    p.set_defaults(fn=cmd_space)

    p = sub.add_parser("diff", help="compare all four modes on one program")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=10_000)
    p.set_defaults(fn=cmd_diff)

    p = sub.add_parser("fuzz", help="differential-test generated programs")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--size", type=int, default=30, help="maximum program size")
    p.add_argument("--min-size", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--check-traces", action="store_true")
    p.add_argument("--out", help="write the JSON report to a file")
    p.set_defaults(fn=cmd_fuzz)

    return top


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
