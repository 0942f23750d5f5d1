"""Command line driver.

`memlit check FILE` parses and validates a litmus file, enumerates its final
outcomes under the selected models, evaluates the assertion, and checks any
`# expected: MODEL VERDICT` annotations found in comments.

Exit codes: 0 every expectation matches (or none present), 1 mismatch,
2 usage/parse/validation error, 3 resource limit exceeded.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .axiomatic import enumerate_cxx11
from .dot import execution_dot, trace_dot
from .dsl import ParseError, format_expr, parse_expectations, parse_litmus
from .model import (
    DEFAULT_MAX_CANDIDATES,
    DEFAULT_MAX_STATES,
    OutcomeSet,
    Program,
    ResourceLimitError,
    Verdict,
    eval_assertion,
    validate,
)
from .sc import enumerate_sc
from .tso import enumerate_tso

MODELS = ("sc", "tso", "cxx11")
VERDICTS = ("allowed", "forbidden", "holds", "fails", "racy", "race-free")


@dataclass
class ModelReport:
    model: str
    outcomes: OutcomeSet
    verdict: Verdict
    seconds: float

    @property
    def explored(self) -> int:
        return self.outcomes.stats.explored if self.outcomes.stats else 0


@dataclass
class RunReport:
    name: str
    path: str
    condition: str
    models: dict[str, ModelReport] = field(default_factory=dict)
    expectations: list[tuple[str, str, Optional[str]]] = field(default_factory=list)
    # (model, expected, actual); actual None when the model was not run

    @property
    def matched(self) -> bool:
        return all(actual is None or actual == expected for _, expected, actual in self.expectations)


def _enumerate(model: str, program: Program, args: argparse.Namespace) -> OutcomeSet:
    if model == "sc":
        return enumerate_sc(program, weak_spurious=args.weak_spurious, max_states=args.max_states)
    if model == "tso":
        return enumerate_tso(program, weak_spurious=args.weak_spurious, max_states=args.max_states)
    return enumerate_cxx11(
        program,
        weak_spurious=args.weak_spurious,
        strict_s=args.strict_s,
        max_candidates=args.max_candidates,
    )


def _actual_verdict(report: ModelReport, expected: str) -> str:
    if expected in ("racy", "race-free"):
        return "racy" if report.outcomes.racy else "race-free"
    return report.verdict.kind


def build_report(program: Program, path: str, models: tuple[str, ...], expectations, args) -> RunReport:
    condition = f"{program.assertion.quantifier} {format_expr(program.assertion.formula)}"
    report = RunReport(program.name, path, condition)
    for model in models:
        started = time.perf_counter()
        outcomes = _enumerate(model, program, args)
        seconds = time.perf_counter() - started
        report.models[model] = ModelReport(model, outcomes, eval_assertion(program.assertion, outcomes), seconds)
    for model, expected in expectations:
        actual = _actual_verdict(report.models[model], expected) if model in report.models else None
        report.expectations.append((model, expected, actual))
    return report


def _print_report(report: RunReport, out) -> None:
    print(f"{report.name} ({report.path})", file=out)
    print(f"condition: {report.condition}", file=out)
    for model, m in report.models.items():
        ordered = m.outcomes.sorted_outcomes()
        marked = set(m.verdict.witnesses)
        print(
            f"{model}: {m.verdict.kind}"
            f" ({len(ordered)} outcomes, {m.explored} explored, {m.seconds:.2f}s)",
            file=out,
        )
        if m.outcomes.racy:
            print("  data race in at least one consistent execution: behavior undefined", file=out)
        for outcome in ordered:
            mark = "*" if outcome in marked else " "
            print(f"  {mark} {outcome.format()}", file=out)
    for model, expected, actual in report.expectations:
        if actual is None:
            print(f"expected {model} {expected}: skipped (model not run)", file=out)
        elif actual == expected:
            print(f"expected {model} {expected}: ok", file=out)
        else:
            print(f"expected {model} {expected}: MISMATCH (got {actual})", file=out)


def _print_compare(report: RunReport, out) -> None:
    print("comparison:", file=out)
    print(f"  {'model':<7} {'outcomes':>8}  {'verdict':<9} {'races':<5}", file=out)
    for model, m in report.models.items():
        races = "yes" if m.outcomes.racy else "no"
        print(f"  {model:<7} {len(m.outcomes.outcomes):>8}  {m.verdict.kind:<9} {races:<5}", file=out)
    sc = report.models.get("sc")
    tso = report.models.get("tso")
    if sc is not None and tso is not None:
        extra = sc.outcomes.outcomes - tso.outcomes.outcomes
        if extra:
            sample = sorted(extra, key=lambda o: o.format())[0]
            print(f"  SC within TSO: VIOLATED, e.g. {sample.format()}", file=out)
        else:
            strict = tso.outcomes.outcomes - sc.outcomes.outcomes
            note = f" (TSO adds {len(strict)})" if strict else " (equal)"
            print(f"  SC within TSO: holds{note}", file=out)


def _json_document(report: RunReport) -> dict:
    doc: dict = {
        "name": report.name,
        "file": report.path,
        "condition": report.condition,
        "match": report.matched,
        "models": {},
        "expectations": [
            {"model": m, "expected": e, "actual": a, "match": a is None or a == e}
            for m, e, a in report.expectations
        ],
    }
    for model, m in report.models.items():
        doc["models"][model] = {
            "verdict": m.verdict.kind,
            "racy": m.outcomes.racy,
            "outcomes": [o.format() for o in m.outcomes.sorted_outcomes()],
            "witnesses": [o.format() for o in m.verdict.witnesses],
            "explored": m.explored,
            "seconds": round(m.seconds, 6),
        }
    return doc


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name) or "litmus"


def _write_dots(report: RunReport, program: Program, directory: Path, out) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    base = _safe_name(report.name)
    for model, m in report.models.items():
        witnesses = m.outcomes.witnesses or {}
        for i, outcome in enumerate(m.outcomes.sorted_outcomes()):
            witness = witnesses.get(outcome)
            if witness is None:
                continue
            title = f"{base}-{model}-{i}"
            if model == "cxx11":
                text = execution_dot(program, witness, title=title)
            else:
                text = trace_dot(program, witness, title=title)
            target = directory / f"{title}.dot"
            target.write_text(text)
            print(f"wrote {target}", file=out)


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="memlit", description="litmus test checker for SC, x86-TSO, and C++11 atomics")
    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", help="run a litmus file under one or all models")
    check.add_argument("file", help="litmus file")
    check.add_argument("--model", choices=MODELS + ("all",), default="all")
    check.add_argument("--compare", action="store_true", help="per-model summary table plus the SC-within-TSO check")
    check.add_argument("--dot", metavar="DIR", help="write one witness graph per (model, outcome)")
    check.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES, metavar="N")
    check.add_argument("--max-candidates", type=int, default=DEFAULT_MAX_CANDIDATES, metavar="N")
    check.add_argument("--no-weak-spurious", dest="weak_spurious", action="store_false",
                       help="forbid spurious cas_weak failures")
    check.add_argument("--strict-s", dest="strict_s", action=argparse.BooleanOptionalAction, default=True,
                       help="require the seq_cst order S to embed hb and mo")
    check.add_argument("--json-ish", metavar="FILE", help="write a single-document JSON summary")
    args = parser.parse_args(argv)

    try:
        raw = Path(args.file).read_bytes()
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return 2

    try:
        program = parse_litmus(raw)
    except ParseError as exc:
        for d in exc.diagnostics:
            where = f":{d.span.line}:{d.span.column}" if d.span else ""
            print(f"{args.file}{where}: error: {d.message}", file=sys.stderr)
        return 2

    problems = validate(program)
    if problems:
        for d in problems:
            place = "" if d.thread is None else f" (thread {d.thread}, instruction {d.instruction})"
            print(f"{args.file}: error: {d.rule}: {d.message}{place}", file=sys.stderr)
        return 2

    expectations = parse_expectations(raw)
    for model, verdict in expectations:
        if model not in MODELS or verdict not in VERDICTS:
            print(f"{args.file}: error: malformed expectation '{model} {verdict}'", file=sys.stderr)
            return 2

    models = MODELS if (args.model == "all" or args.compare) else (args.model,)
    try:
        report = build_report(program, args.file, models, expectations, args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    _print_report(report, sys.stdout)
    if args.compare:
        _print_compare(report, sys.stdout)
    if args.json_ish:
        Path(args.json_ish).write_text(json.dumps(_json_document(report), indent=2) + "\n")
    if args.dot:
        _write_dots(report, program, Path(args.dot), sys.stdout)
    return 0 if report.matched else 1


if __name__ == "__main__":
    sys.exit(main())
