from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from memlit.dsl import (
    ParseError,
    format_expr,
    format_instruction,
    parse_expectations,
    parse_litmus,
    print_litmus,
)
from memlit.model import (
    And,
    Instruction,
    Kind,
    MemAtom,
    MemoryOrder,
    Not,
    Or,
    RegAtom,
)

from support import programs

DEKKER = """name: dekker
init: x = 0 y = 0
thread P0:
  store x 1 seq_cst
  r1 = load y seq_cst
thread P1:
  store y 1 seq_cst
  r1 = load x seq_cst
exists: P0:r1 = 0 /\\ P1:r1 = 0
"""


def errors_of(text):
    with pytest.raises(ParseError) as exc:
        parse_litmus(text)
    return [d.message for d in exc.value.diagnostics]


class TestParsing:
    def test_dekker_shape(self):
        p = parse_litmus(DEKKER)
        assert p.name == "dekker"
        assert p.init == {"x": 0, "y": 0}
        assert p.thread_names == ("P0", "P1")
        assert [i.kind for i in p.threads[0]] == [Kind.STORE, Kind.LOAD]
        assert p.threads[0][0].order is MemoryOrder.SEQ_CST
        assert p.assertion.quantifier == "exists"
        assert p.assertion.formula == And(RegAtom("P0", "r1", 0), RegAtom("P1", "r1", 0))

    def test_omitted_order_defaults_to_seq_cst(self):
        p = parse_litmus(
            "name: t\ninit: x = 0\nthread P0:\n  store x 1\n  r1 = load x\nexists: x = 1\n"
        )
        assert all(i.order is MemoryOrder.SEQ_CST for i in p.threads[0])

    def test_na_accesses_take_no_order(self):
        p = parse_litmus(
            "name: t\ninit: x = 0\nthread P0:\n  na_store x 1\n  r1 = na_load x\nexists: x = 1\n"
        )
        assert all(i.order is None for i in p.threads[0])
        assert any(
            "trailing input" in m
            for m in errors_of("name: t\ninit: x = 0\nthread P0:\n  na_store x 1 relaxed\nexists: x = 1\n")
        )

    def test_cas_single_order_derives_failure(self):
        p = parse_litmus(
            "name: t\ninit: x = 0\nthread P0:\n  r1 = cas_strong x 0 1 release\nexists: x = 1\n"
        )
        cas = p.threads[0][0]
        assert cas.order is MemoryOrder.RELEASE
        assert cas.failure_order is MemoryOrder.RELAXED

    def test_cas_two_orders_explicit(self):
        p = parse_litmus(
            "name: t\ninit: x = 0\nthread P0:\n  r1 = cas_weak x 0 1 acq_rel relaxed\nexists: x = 1\n"
        )
        cas = p.threads[0][0]
        assert cas.kind is Kind.CAS_WEAK
        assert cas.order is MemoryOrder.ACQ_REL
        assert cas.failure_order is MemoryOrder.RELAXED

    def test_register_operand(self):
        p = parse_litmus(
            "name: t\ninit: x = 0\nthread P0:\n  r1 = load x\n  store x r1\nexists: x = 0\n"
        )
        assert p.threads[0][1].operand == "r1"

    def test_init_continuation_lines(self):
        p = parse_litmus("name: t\ninit: x = 1\n  y = 2\nthread P0:\n  r1 = load x\nexists: x = 1\n")
        assert p.init == {"x": 1, "y": 2}

    def test_comments_and_blank_lines_ignored(self):
        text = "# top\n\nname: t  # trailing\ninit: x = 0\nthread P0:\n  # inside\n  r1 = load x\nexists: x = 0\n"
        p = parse_litmus(text)
        assert len(p.threads[0]) == 1

    def test_or_not_parens(self):
        p = parse_litmus(
            "name: t\ninit: x = 0\nthread P0:\n  r1 = load x\nforall: !(x = 1 \\/ P0:r1 = 2)\n"
        )
        assert p.assertion.quantifier == "forall"
        assert p.assertion.formula == Not(Or(MemAtom("x", 1), RegAtom("P0", "r1", 2)))

    def test_precedence_and_binds_tighter_than_or(self):
        p = parse_litmus(
            "name: t\ninit: x = 0 y = 0\nthread P0:\n  r1 = load x\nexists: x = 1 \\/ y = 1 /\\ x = 0\n"
        )
        assert p.assertion.formula == Or(MemAtom("x", 1), And(MemAtom("y", 1), MemAtom("x", 0)))


class TestParseErrors:
    def test_missing_name(self):
        assert any("name header" in m for m in errors_of("init: x = 0\n"))

    def test_missing_condition(self):
        msgs = errors_of("name: t\ninit: x = 0\nthread P0:\n  r1 = load x\n")
        assert any("exists or forall" in m for m in msgs)

    def test_reserved_word_as_location(self):
        msgs = errors_of("name: t\ninit: x = 0\nthread P0:\n  store thread 1\nexists: x = 0\n")
        assert any("reserved" in m for m in msgs)

    def test_value_too_large(self):
        msgs = errors_of("name: t\ninit: x = 999\nthread P0:\n  r1 = load x\nexists: x = 0\n")
        assert any("0..255" in m for m in msgs)

    def test_unknown_order_token(self):
        msgs = errors_of("name: t\ninit: x = 0\nthread P0:\n  store x 1 sequential\nexists: x = 0\n")
        assert msgs

    def test_duplicate_thread(self):
        msgs = errors_of(
            "name: t\ninit: x = 0\nthread P0:\n  r1 = load x\nthread P0:\n  r1 = load x\nexists: x = 0\n"
        )
        assert any("duplicate" in m for m in msgs)

    def test_content_after_condition(self):
        msgs = errors_of(
            "name: t\ninit: x = 0\nthread P0:\n  r1 = load x\nexists: x = 0\nthread P1:\n  r1 = load x\n"
        )
        assert any("after the condition" in m for m in msgs)

    def test_all_errors_collected(self):
        text = "name: t\ninit: x = 300\nthread P0:\n  r1 = load q order\n  bogus\nexists: x = 0\n"
        with pytest.raises(ParseError) as exc:
            parse_litmus(text)
        assert len(exc.value.diagnostics) >= 2

    def test_spans_inside_input(self):
        text = "name: t\ninit: x = 0\nthread P0:\n  ???\nexists: x = 0\n"
        with pytest.raises(ParseError) as exc:
            parse_litmus(text)
        data = text.encode()
        for d in exc.value.diagnostics:
            assert 0 <= d.span.start <= d.span.end <= len(data)
            assert d.span.line >= 1 and d.span.column >= 1


class TestPrinting:
    def test_instruction_formats(self):
        assert (
            format_instruction(Instruction(Kind.STORE, location="x", operand=1, order=MemoryOrder.SEQ_CST))
            == "store x 1 seq_cst"
        )
        assert (
            format_instruction(
                Instruction(
                    Kind.CAS_STRONG, location="x", dest="r1", expected=1, desired=2,
                    order=MemoryOrder.RELEASE, failure_order=MemoryOrder.RELAXED,
                )
            )
            == "r1 = cas_strong x 1 2 release relaxed"
        )
        assert format_instruction(Instruction(Kind.FENCE, order=MemoryOrder.SEQ_CST)) == "fence seq_cst"
        assert format_instruction(Instruction(Kind.NA_LOAD, location="x", dest="r1")) == "r1 = na_load x"

    def test_expr_minimal_parens(self):
        e = Or(MemAtom("x", 1), And(MemAtom("y", 1), Not(MemAtom("x", 0))))
        assert format_expr(e) == "x = 1 \\/ y = 1 /\\ !x = 0"
        f = And(Or(MemAtom("x", 1), MemAtom("y", 1)), MemAtom("x", 0))
        assert format_expr(f) == "(x = 1 \\/ y = 1) /\\ x = 0"

    def test_round_trip_dekker(self):
        p = parse_litmus(DEKKER)
        assert parse_litmus(print_litmus(p)) == p

    def test_print_contains_store_lines_in_order(self):
        text = print_litmus(parse_litmus(DEKKER))
        assert text.index("store x 1 seq_cst") < text.index("r1 = load y seq_cst")


class TestExpectations:
    def test_extraction(self):
        text = "# expected: sc forbidden\nname: t\n# expected:  tso   allowed\n"
        assert parse_expectations(text) == (("sc", "forbidden"), ("tso", "allowed"))

    def test_bytes_input(self):
        assert parse_expectations(b"# expected: cxx11 racy\n") == (("cxx11", "racy"),)

    def test_no_annotations(self):
        assert parse_expectations("name: t\n") == ()


@given(programs(max_threads=3, max_total=6))
@settings(max_examples=120)
def test_round_trip_identity(p):
    assert parse_litmus(print_litmus(p)) == p


@given(st.binary(max_size=200))
@settings(max_examples=300)
def test_fuzz_never_crashes(data):
    try:
        parse_litmus(data)
    except ParseError:
        pass
