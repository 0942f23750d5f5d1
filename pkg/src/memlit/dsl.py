"""Line-oriented litmus-test format.

    name: IDENT
    init: (LOC = NUM)*            assignments may continue on following lines
    thread IDENT:
        REG = load LOC order?
        store LOC (NUM|REG) order?
        REG = na_load LOC
        na_store LOC (NUM|REG)
        REG = exchange LOC (NUM|REG) order?
        REG = fetch_add LOC (NUM|REG) order?      (also _sub/_and/_or/_xor)
        REG = cas_strong LOC NUM NUM order? order?
        REG = cas_weak   LOC NUM NUM order? order?
        fence order
    (exists|forall): bexpr

Orders: relaxed consume acquire release acq_rel seq_cst; omitted means
seq_cst.  A CAS with one order derives its failure order (release->relaxed,
acq_rel->acquire, else the same).  bexpr atoms are THREAD:REG = NUM or
LOC = NUM, combined with /\\ \\/ ! and parentheses.  '#' starts a comment;
keywords are reserved and cannot name threads, locations, or registers.

parse_litmus collects every diagnosable error (with source spans) before
raising ParseError; print_litmus emits a canonical form with explicit
orders, and parse(print(p)) == p for any grammar-representable program.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .model import (
    And,
    Assertion,
    BoolExpr,
    Instruction,
    Kind,
    MAX_VALUE,
    MemAtom,
    MemoryOrder,
    Not,
    Or,
    Program,
    RegAtom,
    CAS_KINDS,
    FETCH_KINDS,
    derive_failure_order,
)

ORDER_TOKENS = {o.value: o for o in MemoryOrder}

RESERVED = frozenset(
    {"name", "init", "thread", "exists", "forall"}
    | {k.value for k in Kind}
    | set(ORDER_TOKENS)
)


@dataclass(frozen=True)
class SourceSpan:
    line: int  # 1-based
    column: int  # 1-based
    start: int  # byte offset, inclusive
    end: int  # byte offset, exclusive

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("span start after end")


@dataclass(frozen=True)
class ParseDiagnostic:
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"line {self.span.line}, col {self.span.column}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics) or "parse error")
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class _Token:
    type: str  # ident | num | sym
    text: str
    span: SourceSpan


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<num>[0-9]+)
      | (?P<and>/\\)
      | (?P<or>\\/)
      | (?P<sym>[=:()!])
    """,
    re.VERBOSE,
)


def _decode(text: Union[str, bytes]) -> tuple[str, list[ParseDiagnostic]]:
    if isinstance(text, str):
        return text, []
    try:
        return text.decode("utf-8"), []
    except UnicodeDecodeError as exc:
        span = SourceSpan(1, 1, exc.start, min(exc.end, len(text)))
        decoded = text.decode("utf-8", errors="replace")
        return decoded, [ParseDiagnostic("input is not valid UTF-8", span)]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.diagnostics: list[ParseDiagnostic] = []
        self.lines: list[tuple[int, int, str]] = []  # (line number, byte offset, content)
        offset = 0
        for n, raw in enumerate(text.split("\n"), start=1):
            self.lines.append((n, offset, raw))
            offset += len(raw.encode("utf-8")) + 1

    def error(self, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(ParseDiagnostic(message, span))

    def _line_span(self, line_no: int, line_offset: int, raw: str) -> SourceSpan:
        return SourceSpan(line_no, 1, line_offset, line_offset + len(raw.encode("utf-8")))

    def _eof_span(self) -> SourceSpan:
        size = len(self.text.encode("utf-8"))
        return SourceSpan(max(len(self.lines), 1), 1, size, size)

    def tokenize(self, line_no: int, line_offset: int, raw: str) -> Optional[list[_Token]]:
        content = raw.split("#", 1)[0]
        tokens: list[_Token] = []
        pos = 0
        while pos < len(content):
            m = _TOKEN_RE.match(content, pos)
            if m is None:
                start = line_offset + len(content[:pos].encode("utf-8"))
                bad = content[pos]
                span = SourceSpan(line_no, pos + 1, start, start + len(bad.encode("utf-8")))
                self.error(f"unexpected character {bad!r}", span)
                return None
            kind = m.lastgroup
            pos = m.end()
            if kind == "ws":
                continue
            start = line_offset + len(content[: m.start()].encode("utf-8"))
            end = line_offset + len(content[: m.end()].encode("utf-8"))
            span = SourceSpan(line_no, m.start() + 1, start, end)
            if kind == "ident":
                tokens.append(_Token("ident", m.group(), span))
            elif kind == "num":
                tokens.append(_Token("num", m.group(), span))
            else:
                tokens.append(_Token("sym", m.group(), span))
        return tokens

    # -- small token-list helpers ------------------------------------------

    def _take_value(self, tokens: list[_Token], i: int, what: str) -> tuple[Optional[int], int]:
        """Parse NUM in 0..MAX_VALUE; returns (value, next index)."""
        if i >= len(tokens) or tokens[i].type != "num":
            span = tokens[i].span if i < len(tokens) else tokens[-1].span
            self.error(f"expected {what}", span)
            return None, i
        value = int(tokens[i].text)
        if value > MAX_VALUE:
            self.error(f"value {value} out of range (0..{MAX_VALUE})", tokens[i].span)
            return None, i + 1
        return value, i + 1

    def _take_ident(self, tokens: list[_Token], i: int, what: str) -> tuple[Optional[str], int]:
        if i >= len(tokens) or tokens[i].type != "ident":
            span = tokens[i].span if i < len(tokens) else tokens[-1].span
            self.error(f"expected {what}", span)
            return None, i
        name = tokens[i].text
        if name in RESERVED:
            self.error(f"{name!r} is a reserved word and cannot be a {what}", tokens[i].span)
            return None, i + 1
        return name, i + 1

    def _take_operand(self, tokens: list[_Token], i: int) -> tuple[Union[int, str, None], int]:
        if i < len(tokens) and tokens[i].type == "num":
            return self._take_value(tokens, i, "operand")
        return self._take_ident(tokens, i, "operand register")

    def _take_order(self, tokens: list[_Token], i: int) -> tuple[Optional[MemoryOrder], int]:
        """Optional trailing memory order; None means omitted."""
        if i < len(tokens) and tokens[i].type == "ident" and tokens[i].text in ORDER_TOKENS:
            return ORDER_TOKENS[tokens[i].text], i + 1
        return None, i

    def _expect_end(self, tokens: list[_Token], i: int) -> bool:
        if i < len(tokens):
            self.error(f"unexpected trailing input {tokens[i].text!r}", tokens[i].span)
            return False
        return True

    def _expect_sym(self, tokens: list[_Token], i: int, sym: str) -> tuple[bool, int]:
        if i < len(tokens) and tokens[i].type == "sym" and tokens[i].text == sym:
            return True, i + 1
        span = tokens[i].span if i < len(tokens) else tokens[-1].span
        self.error(f"expected {sym!r}", span)
        return False, i

    # -- instructions -------------------------------------------------------

    def parse_instruction(self, tokens: list[_Token]) -> Optional[Instruction]:
        head = tokens[0]
        if head.type != "ident":
            self.error("expected an instruction", head.span)
            return None

        if head.text == "store" or head.text == "na_store":
            loc, i = self._take_ident(tokens, 1, "location")
            operand, i = self._take_operand(tokens, i)
            if head.text == "store":
                order, i = self._take_order(tokens, i)
                order = order or MemoryOrder.SEQ_CST
            else:
                order = None
            if not self._expect_end(tokens, i) or loc is None or operand is None:
                return None
            kind = Kind.STORE if head.text == "store" else Kind.NA_STORE
            return Instruction(kind, location=loc, operand=operand, order=order)

        if head.text == "fence":
            order, i = self._take_order(tokens, 1)
            if order is None:
                span = tokens[1].span if len(tokens) > 1 else head.span
                self.error("fence requires a memory order", span)
                return None
            if not self._expect_end(tokens, i):
                return None
            return Instruction(Kind.FENCE, order=order)

        # remaining forms: REG = op ...
        dest, i = self._take_ident(tokens, 0, "destination register")
        ok, i = self._expect_sym(tokens, i, "=")
        if dest is None or not ok:
            return None
        if i >= len(tokens) or tokens[i].type != "ident":
            span = tokens[i].span if i < len(tokens) else tokens[-1].span
            self.error("expected an operation name", span)
            return None
        op = tokens[i]
        i += 1

        if op.text in ("load", "na_load"):
            loc, i = self._take_ident(tokens, i, "location")
            if op.text == "load":
                order, i = self._take_order(tokens, i)
                order = order or MemoryOrder.SEQ_CST
            else:
                order = None
            if not self._expect_end(tokens, i) or loc is None:
                return None
            kind = Kind.LOAD if op.text == "load" else Kind.NA_LOAD
            return Instruction(kind, location=loc, dest=dest, order=order)

        if op.text == "exchange" or op.text in {k.value for k in FETCH_KINDS}:
            loc, i = self._take_ident(tokens, i, "location")
            operand, i = self._take_operand(tokens, i)
            order, i = self._take_order(tokens, i)
            if not self._expect_end(tokens, i) or loc is None or operand is None:
                return None
            return Instruction(
                Kind(op.text),
                location=loc,
                dest=dest,
                operand=operand,
                order=order or MemoryOrder.SEQ_CST,
            )

        if op.text in ("cas_strong", "cas_weak"):
            loc, i = self._take_ident(tokens, i, "location")
            expected, i = self._take_value(tokens, i, "expected value")
            desired, i = self._take_value(tokens, i, "desired value")
            success, i = self._take_order(tokens, i)
            failure, i = self._take_order(tokens, i)
            if not self._expect_end(tokens, i):
                return None
            if loc is None or expected is None or desired is None:
                return None
            success = success or MemoryOrder.SEQ_CST
            failure = failure or derive_failure_order(success)
            return Instruction(
                Kind(op.text),
                location=loc,
                dest=dest,
                expected=expected,
                desired=desired,
                order=success,
                failure_order=failure,
            )

        self.error(f"unknown operation {op.text!r}", op.span)
        return None

    # -- boolean conditions ---------------------------------------------------

    def parse_bexpr(self, tokens: list[_Token], i: int) -> tuple[Optional[BoolExpr], int]:
        return self._parse_or(tokens, i)

    def _parse_or(self, tokens: list[_Token], i: int) -> tuple[Optional[BoolExpr], int]:
        left, i = self._parse_and(tokens, i)
        while left is not None and i < len(tokens) and tokens[i].text == "\\/":
            right, i = self._parse_and(tokens, i + 1)
            if right is None:
                return None, i
            left = Or(left, right)
        return left, i

    def _parse_and(self, tokens: list[_Token], i: int) -> tuple[Optional[BoolExpr], int]:
        left, i = self._parse_unary(tokens, i)
        while left is not None and i < len(tokens) and tokens[i].text == "/\\":
            right, i = self._parse_unary(tokens, i + 1)
            if right is None:
                return None, i
            left = And(left, right)
        return left, i

    def _parse_unary(self, tokens: list[_Token], i: int) -> tuple[Optional[BoolExpr], int]:
        if i >= len(tokens):
            self.error("expected a condition", tokens[-1].span)
            return None, i
        tok = tokens[i]
        if tok.text == "!":
            inner, i = self._parse_unary(tokens, i + 1)
            return (Not(inner) if inner is not None else None), i
        if tok.text == "(":
            inner, i = self._parse_or(tokens, i + 1)
            ok, i = self._expect_sym(tokens, i, ")")
            return (inner if ok else None), i
        # atom: IDENT (":" IDENT)? "=" NUM
        first, i = self._take_ident(tokens, i, "thread, register, or location name")
        if first is None:
            return None, i
        if i < len(tokens) and tokens[i].text == ":":
            reg, i = self._take_ident(tokens, i + 1, "register")
            ok, i = self._expect_sym(tokens, i, "=")
            value, i = self._take_value(tokens, i, "value")
            if reg is None or not ok or value is None:
                return None, i
            return RegAtom(first, reg, value), i
        ok, i = self._expect_sym(tokens, i, "=")
        value, i = self._take_value(tokens, i, "value")
        if not ok or value is None:
            return None, i
        return MemAtom(first, value), i

    # -- whole file -----------------------------------------------------------

    def parse(self) -> Optional[Program]:
        name: Optional[str] = None
        init: dict[str, int] = {}
        init_seen = False
        thread_names: list[str] = []
        threads: list[list[Instruction]] = []
        assertion: Optional[Assertion] = None

        for line_no, line_offset, raw in self.lines:
            tokens = self.tokenize(line_no, line_offset, raw)
            if not tokens:
                continue
            head = tokens[0]
            line_span = self._line_span(line_no, line_offset, raw)

            if assertion is not None:
                self.error("content after the condition line", line_span)
                continue

            if head.text == "name":
                ok, i = self._expect_sym(tokens, 1, ":")
                ident, i = self._take_ident(tokens, i, "test name")
                self._expect_end(tokens, i)
                if name is not None:
                    self.error("duplicate name header", head.span)
                elif ok and ident is not None:
                    name = ident
                continue

            if head.text == "init":
                ok, i = self._expect_sym(tokens, 1, ":")
                if init_seen:
                    self.error("duplicate init section", head.span)
                init_seen = True
                while ok and i < len(tokens):
                    loc, i = self._take_ident(tokens, i, "location")
                    ok2, i = self._expect_sym(tokens, i, "=")
                    value, i = self._take_value(tokens, i, "value")
                    if loc is None or not ok2 or value is None:
                        break
                    if loc in init:
                        self.error(f"duplicate init location {loc!r}", line_span)
                    init[loc] = value
                continue

            if head.text == "thread":
                ident, i = self._take_ident(tokens, 1, "thread name")
                ok, i = self._expect_sym(tokens, i, ":")
                self._expect_end(tokens, i)
                if ident is not None and ok:
                    if ident in thread_names:
                        self.error(f"duplicate thread name {ident!r}", tokens[1].span)
                    thread_names.append(ident)
                    threads.append([])
                continue

            if head.text in ("exists", "forall"):
                ok, i = self._expect_sym(tokens, 1, ":")
                if not ok:
                    continue
                expr, i = self.parse_bexpr(tokens, i)
                self._expect_end(tokens, i)
                if expr is not None:
                    assertion = Assertion(head.text, expr)
                continue

            if not threads:
                # before the first thread: only init continuation lines.
                if init_seen and len(tokens) == 3 and tokens[1].text == "=":
                    loc, i = self._take_ident(tokens, 0, "location")
                    ok, i = self._expect_sym(tokens, i, "=")
                    value, i = self._take_value(tokens, i, "value")
                    if loc is not None and ok and value is not None:
                        if loc in init:
                            self.error(f"duplicate init location {loc!r}", line_span)
                        init[loc] = value
                    continue
                self.error("expected a thread or section header", line_span)
                continue

            instr = self.parse_instruction(tokens)
            if instr is not None:
                threads[-1].append(instr)

        if name is None:
            self.error("expected name header", self._eof_span())
        if not init_seen:
            self.error("expected init section", self._eof_span())
        if not threads:
            self.error("expected at least one thread", self._eof_span())
        if assertion is None:
            self.error("expected an exists or forall condition", self._eof_span())

        if self.diagnostics:
            return None
        assert name is not None and assertion is not None
        return Program(
            name=name,
            init=init,
            thread_names=tuple(thread_names),
            threads=tuple(tuple(body) for body in threads),
            assertion=assertion,
        )


def parse_litmus(text: Union[str, bytes]) -> Program:
    """Parse a litmus test; raises ParseError carrying every diagnostic."""
    decoded, errors = _decode(text)
    parser = _Parser(decoded)
    parser.diagnostics.extend(errors)
    program = parser.parse()
    if program is None or parser.diagnostics:
        raise ParseError(parser.diagnostics)
    return program


# ---------------------------------------------------------------------------
# printing


def _format_operand(operand: Union[int, str]) -> str:
    return str(operand)


def format_instruction(instr: Instruction) -> str:
    k = instr.kind
    if k is Kind.STORE:
        return f"store {instr.location} {_format_operand(instr.operand)} {instr.order}"
    if k is Kind.NA_STORE:
        return f"na_store {instr.location} {_format_operand(instr.operand)}"
    if k is Kind.LOAD:
        return f"{instr.dest} = load {instr.location} {instr.order}"
    if k is Kind.NA_LOAD:
        return f"{instr.dest} = na_load {instr.location}"
    if k in CAS_KINDS:
        return (
            f"{instr.dest} = {k.value} {instr.location} "
            f"{instr.expected} {instr.desired} {instr.order} {instr.failure_order}"
        )
    if k is Kind.FENCE:
        return f"fence {instr.order}"
    return f"{instr.dest} = {k.value} {instr.location} {_format_operand(instr.operand)} {instr.order}"


_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_ATOM = 4


def format_expr(expr: BoolExpr, min_prec: int = 0) -> str:
    if isinstance(expr, RegAtom):
        text, prec = f"{expr.thread}:{expr.register} = {expr.value}", _PREC_ATOM
    elif isinstance(expr, MemAtom):
        text, prec = f"{expr.location} = {expr.value}", _PREC_ATOM
    elif isinstance(expr, Not):
        text, prec = "!" + format_expr(expr.operand, _PREC_ATOM), _PREC_NOT
    elif isinstance(expr, And):
        text = f"{format_expr(expr.left, _PREC_AND)} /\\ {format_expr(expr.right, _PREC_AND + 1)}"
        prec = _PREC_AND
    elif isinstance(expr, Or):
        text = f"{format_expr(expr.left, _PREC_OR)} \\/ {format_expr(expr.right, _PREC_OR + 1)}"
        prec = _PREC_OR
    else:
        raise TypeError(f"not a boolean expression: {expr!r}")
    return f"({text})" if prec < min_prec else text


def print_litmus(program: Program) -> str:
    """Canonical text for a program; parse_litmus inverts it exactly."""
    lines = [f"name: {program.name}"]
    pairs = " ".join(f"{loc} = {val}" for loc, val in sorted(program.init.items()))
    lines.append(f"init: {pairs}".rstrip())
    for name, body in zip(program.thread_names, program.threads):
        lines.append(f"thread {name}:")
        for instr in body:
            lines.append(f"    {format_instruction(instr)}")
    lines.append(f"{program.assertion.quantifier}: {format_expr(program.assertion.formula)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# expectation annotations (comments, not grammar)

_EXPECT_RE = re.compile(r"#\s*expected:\s*(\S+)\s+(\S+)")


def parse_expectations(text: Union[str, bytes]) -> tuple[tuple[str, str], ...]:
    """Extract (model, verdict) pairs from '# expected: MODEL VERDICT' comments."""
    decoded, _ = _decode(text)
    found = []
    for line in decoded.split("\n"):
        m = _EXPECT_RE.search(line)
        if m:
            found.append((m.group(1), m.group(2)))
    return tuple(found)
