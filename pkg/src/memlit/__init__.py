"""Exhaustive litmus-test checking under SC, x86-TSO, and C++11 atomics."""

from .axiomatic import (
    AXIOMS,
    CandidateExecution,
    ExecutionJudgment,
    check_axioms,
    compute_hb,
    compute_sb,
    compute_sw,
    detect_races,
    enumerate_cxx11,
    release_sequence,
)
from .dot import execution_dot, trace_dot
from .dsl import (
    ParseDiagnostic,
    ParseError,
    SourceSpan,
    format_instruction,
    parse_expectations,
    parse_litmus,
    print_litmus,
)
from .model import (
    Assertion,
    Diagnostic,
    Event,
    EventKind,
    Instruction,
    Kind,
    MemoryOrder,
    Outcome,
    OutcomeSet,
    Program,
    ResourceLimitError,
    TraceStep,
    Verdict,
    eval_assertion,
    force_seq_cst,
    make_outcome,
    validate,
    with_fences_after_stores,
)
from .relation import Relation, linear_extensions, transitive_closure
from .sc import enumerate_sc
from .tso import enumerate_tso

__version__ = "0.1.0"

__all__ = [
    "AXIOMS",
    "Assertion",
    "CandidateExecution",
    "Diagnostic",
    "Event",
    "EventKind",
    "ExecutionJudgment",
    "Instruction",
    "Kind",
    "MemoryOrder",
    "Outcome",
    "OutcomeSet",
    "ParseDiagnostic",
    "ParseError",
    "Program",
    "Relation",
    "ResourceLimitError",
    "SourceSpan",
    "TraceStep",
    "Verdict",
    "check_axioms",
    "compute_hb",
    "compute_sb",
    "compute_sw",
    "detect_races",
    "enumerate_cxx11",
    "enumerate_sc",
    "enumerate_tso",
    "eval_assertion",
    "execution_dot",
    "force_seq_cst",
    "format_instruction",
    "linear_extensions",
    "make_outcome",
    "parse_expectations",
    "parse_litmus",
    "print_litmus",
    "release_sequence",
    "trace_dot",
    "transitive_closure",
    "validate",
    "with_fences_after_stores",
]
