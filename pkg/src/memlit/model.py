"""Program, instruction, event, and outcome model shared by every backend.

Values are 8-bit naturals (0..255); fetch_add and fetch_sub wrap modulo 256.
Programs are straight-line: no branches, no loops, at most 4 threads with at
most 8 instructions each.  Registers are thread-local and write-once-visible
(an operand register must have been assigned earlier in the same thread).
"""

from __future__ import annotations

import enum
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional, Union

MAX_THREADS = 4
MAX_INSTRUCTIONS = 8
MAX_VALUE = 255

DEFAULT_MAX_STATES = 1_000_000
DEFAULT_MAX_CANDIDATES = 1_000_000


class ResourceLimitError(Exception):
    """An exploration exceeded its configured state or candidate budget."""

    def __init__(self, limit_name: str, limit: int):
        super().__init__(f"{limit_name} limit exceeded ({limit})")
        self.limit_name = limit_name
        self.limit = limit


class MemoryOrder(enum.Enum):
    RELAXED = "relaxed"
    CONSUME = "consume"
    ACQUIRE = "acquire"
    RELEASE = "release"
    ACQ_REL = "acq_rel"
    SEQ_CST = "seq_cst"

    def __str__(self) -> str:
        return self.value


_ORDER_ABBREV = {
    MemoryOrder.RELAXED: "rlx",
    MemoryOrder.CONSUME: "cns",
    MemoryOrder.ACQUIRE: "acq",
    MemoryOrder.RELEASE: "rel",
    MemoryOrder.ACQ_REL: "acq_rel",
    MemoryOrder.SEQ_CST: "sc",
}


def order_abbrev(order: Optional[MemoryOrder]) -> str:
    return "na" if order is None else _ORDER_ABBREV[order]


def derive_failure_order(success: MemoryOrder) -> MemoryOrder:
    """Failure order implied by a CAS given only its success order.

    release maps to relaxed and acq_rel to acquire; everything else carries
    over unchanged.  The pre-C++17 "no stronger than success" restriction is
    deliberately not enforced anywhere.
    """
    if success is MemoryOrder.RELEASE:
        return MemoryOrder.RELAXED
    if success is MemoryOrder.ACQ_REL:
        return MemoryOrder.ACQUIRE
    return success


class Kind(enum.Enum):
    LOAD = "load"
    STORE = "store"
    NA_LOAD = "na_load"
    NA_STORE = "na_store"
    EXCHANGE = "exchange"
    FETCH_ADD = "fetch_add"
    FETCH_SUB = "fetch_sub"
    FETCH_AND = "fetch_and"
    FETCH_OR = "fetch_or"
    FETCH_XOR = "fetch_xor"
    CAS_STRONG = "cas_strong"
    CAS_WEAK = "cas_weak"
    FENCE = "fence"

    def __str__(self) -> str:
        return self.value

FETCH_KINDS = frozenset(
    {Kind.FETCH_ADD, Kind.FETCH_SUB, Kind.FETCH_AND, Kind.FETCH_OR, Kind.FETCH_XOR}
)
CAS_KINDS = frozenset({Kind.CAS_STRONG, Kind.CAS_WEAK})
RMW_KINDS = FETCH_KINDS | CAS_KINDS | {Kind.EXCHANGE}

_FETCH_FUNCTIONS: dict[Kind, Callable[[int, int], int]] = {
    Kind.FETCH_ADD: lambda a, b: (a + b) & MAX_VALUE,
    Kind.FETCH_SUB: lambda a, b: (a - b) & MAX_VALUE,
    Kind.FETCH_AND: lambda a, b: a & b,
    Kind.FETCH_OR: lambda a, b: a | b,
    Kind.FETCH_XOR: lambda a, b: a ^ b,
}

READ_ORDERS = frozenset({MemoryOrder.RELAXED, MemoryOrder.ACQUIRE, MemoryOrder.SEQ_CST})
WRITE_ORDERS = frozenset({MemoryOrder.RELAXED, MemoryOrder.RELEASE, MemoryOrder.SEQ_CST})
RMW_ORDERS = frozenset(
    {
        MemoryOrder.RELAXED,
        MemoryOrder.ACQUIRE,
        MemoryOrder.RELEASE,
        MemoryOrder.ACQ_REL,
        MemoryOrder.SEQ_CST,
    }
)
# acq_rel fences act as both an acquire and a release fence; relaxed fences
# are accepted and have no effect.
FENCE_ORDERS = frozenset(
    {
        MemoryOrder.RELAXED,
        MemoryOrder.ACQUIRE,
        MemoryOrder.RELEASE,
        MemoryOrder.ACQ_REL,
        MemoryOrder.SEQ_CST,
    }
)


@dataclass(frozen=True)
class Instruction:
    """One straight-line instruction.

    Field use by kind:
      load/na_load        location, dest
      store/na_store      location, operand (literal or register name)
      exchange/fetch_*    location, dest, operand
      cas_strong/cas_weak location, dest, expected, desired, failure_order
      fence               order only
    na_load/na_store carry no memory order (order is None).
    """

    kind: Kind
    location: Optional[str] = None
    dest: Optional[str] = None
    operand: Union[int, str, None] = None
    expected: Optional[int] = None
    desired: Optional[int] = None
    order: Optional[MemoryOrder] = None
    failure_order: Optional[MemoryOrder] = None

    @property
    def is_rmw(self) -> bool:
        return self.kind in RMW_KINDS

    @property
    def is_cas(self) -> bool:
        return self.kind in CAS_KINDS

    @property
    def is_fence(self) -> bool:
        return self.kind is Kind.FENCE

    @property
    def is_atomic(self) -> bool:
        return self.kind not in (Kind.NA_LOAD, Kind.NA_STORE)

    @property
    def reads_memory(self) -> bool:
        return self.kind in (Kind.LOAD, Kind.NA_LOAD) or self.is_rmw

    @property
    def writes_memory(self) -> bool:
        return self.kind in (Kind.STORE, Kind.NA_STORE) or self.is_rmw


def rmw_written_value(instr: Instruction, old: int, operand_value: Optional[int]) -> int:
    """Value an RMW writes on success, given the value it read."""
    if instr.kind is Kind.EXCHANGE:
        assert operand_value is not None
        return operand_value
    if instr.kind in FETCH_KINDS:
        assert operand_value is not None
        return _FETCH_FUNCTIONS[instr.kind](old, operand_value)
    if instr.kind in CAS_KINDS:
        assert instr.desired is not None
        return instr.desired
    raise ValueError(f"not an RMW instruction: {instr.kind}")


# ---------------------------------------------------------------------------
# assertions


@dataclass(frozen=True)
class RegAtom:
    thread: str
    register: str
    value: int


@dataclass(frozen=True)
class MemAtom:
    location: str
    value: int


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[RegAtom, MemAtom, Not, And, Or]


@dataclass(frozen=True)
class Assertion:
    quantifier: str  # "exists" | "forall"
    formula: BoolExpr


def atoms(expr: BoolExpr) -> Iterator[Union[RegAtom, MemAtom]]:
    if isinstance(expr, (RegAtom, MemAtom)):
        yield expr
    elif isinstance(expr, Not):
        yield from atoms(expr.operand)
    else:
        yield from atoms(expr.left)
        yield from atoms(expr.right)


# ---------------------------------------------------------------------------
# programs


@dataclass(frozen=True)
class Program:
    name: str
    init: Mapping[str, int]
    thread_names: tuple[str, ...]
    threads: tuple[tuple[Instruction, ...], ...]
    assertion: Assertion

    @cached_property
    def locations(self) -> tuple[str, ...]:
        locs = set(self.init)
        for body in self.threads:
            for instr in body:
                if instr.location is not None:
                    locs.add(instr.location)
        return tuple(sorted(locs))

    def initial_value(self, location: str) -> int:
        return self.init.get(location, 0)

    def thread_registers(self, thread: int) -> tuple[str, ...]:
        seen: list[str] = []
        for instr in self.threads[thread]:
            if instr.dest is not None and instr.dest not in seen:
                seen.append(instr.dest)
        return tuple(seen)

    def thread_index(self, name: str) -> int:
        return self.thread_names.index(name)


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    message: str
    thread: Optional[int] = None
    instruction: Optional[int] = None

    def __str__(self) -> str:
        where = ""
        if self.thread is not None:
            where = f"thread {self.thread}"
            if self.instruction is not None:
                where += f" instruction {self.instruction}"
            where += ": "
        return f"{where}{self.rule}: {self.message}"


def _literal_ok(value: Optional[int]) -> bool:
    return value is None or 0 <= value <= MAX_VALUE


def _check_shape(instr: Instruction) -> Optional[str]:
    k = instr.kind
    if k is Kind.FENCE:
        if instr.location or instr.dest or instr.operand is not None:
            return "fence takes no location, register, or operand"
        return None
    if instr.location is None:
        return "missing location"
    if k in (Kind.LOAD, Kind.NA_LOAD):
        if instr.dest is None or instr.operand is not None:
            return "load takes a destination register and no operand"
    elif k in (Kind.STORE, Kind.NA_STORE):
        if instr.operand is None or instr.dest is not None:
            return "store takes an operand and no destination register"
    elif k in CAS_KINDS:
        if instr.dest is None or instr.expected is None or instr.desired is None:
            return "cas takes a destination register and two literals"
        if instr.operand is not None:
            return "cas takes no operand"
    elif k in RMW_KINDS:
        if instr.dest is None or instr.operand is None:
            return "rmw takes a destination register and an operand"
    if k not in CAS_KINDS and (
        instr.expected is not None or instr.desired is not None
    ):
        return "expected/desired are cas-only fields"
    if k not in CAS_KINDS and instr.failure_order is not None:
        return "failure order is a cas-only field"
    return None


def _order_diagnostics(instr: Instruction) -> Iterator[tuple[str, str]]:
    k = instr.kind
    if k in (Kind.NA_LOAD, Kind.NA_STORE):
        if instr.order is not None:
            yield "order on non-atomic access", f"{k} carries no memory order"
        return
    if instr.order is None:
        yield "missing memory order", f"{k} requires a memory order"
        return
    orders = [("order", instr.order)]
    if instr.is_cas:
        if instr.failure_order is None:
            yield "missing memory order", "cas requires a failure order"
        else:
            orders.append(("failure order", instr.failure_order))
    for slot, order in orders:
        if order is MemoryOrder.CONSUME:
            yield "consume rejected", f"memory_order_consume is not supported ({slot})"
            continue
        if k is Kind.LOAD or slot == "failure order":
            if order is MemoryOrder.RELEASE:
                yield "release on read operation", f"{slot} {order} is write-only"
            elif order is MemoryOrder.ACQ_REL:
                yield "acq_rel on non-RMW", f"{slot} {order} requires a read-modify-write"
        elif k is Kind.STORE:
            if order is MemoryOrder.ACQUIRE:
                yield "acquire on write operation", f"{slot} {order} is read-only"
            elif order is MemoryOrder.ACQ_REL:
                yield "acq_rel on non-RMW", f"{slot} {order} requires a read-modify-write"
        # RMW success orders and fence orders admit everything but consume.


def validate(program: Program) -> list[Diagnostic]:
    """Structural and memory-order checks.  Empty result means acceptable.

    Pure: no side effects, same diagnostics for the same program.
    """
    diags: list[Diagnostic] = []

    def bad(rule: str, message: str, thread: Optional[int] = None, instr: Optional[int] = None) -> None:
        diags.append(Diagnostic(rule, message, thread, instr))

    if len(program.threads) > MAX_THREADS:
        bad("thread limit exceeded", f"{len(program.threads)} threads, limit {MAX_THREADS}")
    if len(program.thread_names) != len(program.threads):
        bad("malformed program", "thread name count does not match thread count")
    if len(set(program.thread_names)) != len(program.thread_names):
        bad("duplicate thread name", "thread names must be unique")

    for loc, value in program.init.items():
        if not _literal_ok(value):
            bad("value out of range", f"init {loc} = {value} outside 0..{MAX_VALUE}")

    written: list[set[str]] = []
    for t, body in enumerate(program.threads):
        regs: set[str] = set()
        if len(body) > MAX_INSTRUCTIONS:
            bad(
                "instruction limit exceeded",
                f"{len(body)} instructions, limit {MAX_INSTRUCTIONS}",
                thread=t,
            )
        for i, instr in enumerate(body):
            shape = _check_shape(instr)
            if shape is not None:
                bad("malformed instruction", shape, thread=t, instr=i)
                continue
            for rule, message in _order_diagnostics(instr):
                bad(rule, message, thread=t, instr=i)
            if isinstance(instr.operand, int) and not _literal_ok(instr.operand):
                bad("value out of range", f"operand {instr.operand} outside 0..{MAX_VALUE}", t, i)
            if not _literal_ok(instr.expected) or not _literal_ok(instr.desired):
                bad("value out of range", "cas literal outside 0..255", t, i)
            if isinstance(instr.operand, str) and instr.operand not in regs:
                bad("unwritten register", f"operand register {instr.operand} not yet assigned", t, i)
            if instr.dest is not None:
                regs.add(instr.dest)
        written.append(regs)

    known_locs = set(program.locations)
    names = {name: idx for idx, name in enumerate(program.thread_names)}
    for atom in atoms(program.assertion.formula):
        if isinstance(atom, RegAtom):
            if atom.thread not in names:
                bad("unknown assertion thread", f"no thread named {atom.thread}")
            elif atom.register not in written[names[atom.thread]]:
                bad(
                    "unwritten assertion register",
                    f"{atom.thread}:{atom.register} is never assigned",
                )
            if not _literal_ok(atom.value):
                bad("value out of range", f"assertion value {atom.value} outside 0..255")
        else:
            if atom.location not in known_locs:
                bad("unknown assertion location", f"{atom.location} does not appear in the program")
            if not _literal_ok(atom.value):
                bad("value out of range", f"assertion value {atom.value} outside 0..255")
    return diags


# ---------------------------------------------------------------------------
# outcomes and verdicts


@dataclass(frozen=True)
class Outcome:
    """Final register values (keyed by thread name) plus final memory.

    Complete over every destination register and every program location, so
    outcomes from different backends compare exactly.
    """

    registers: tuple[tuple[str, str, int], ...]  # (thread name, register, value)
    memory: tuple[tuple[str, int], ...]

    @cached_property
    def _reg_map(self) -> dict[tuple[str, str], int]:
        return {(t, r): v for t, r, v in self.registers}

    @cached_property
    def _mem_map(self) -> dict[str, int]:
        return dict(self.memory)

    def register(self, thread: str, name: str) -> Optional[int]:
        return self._reg_map.get((thread, name))

    def location(self, loc: str) -> Optional[int]:
        return self._mem_map.get(loc)

    def format(self) -> str:
        regs = " ".join(f"{t}:{r}={v}" for t, r, v in self.registers)
        mem = " ".join(f"{loc}={v}" for loc, v in self.memory)
        if regs and mem:
            return f"{regs} | {mem}"
        return regs or mem


def make_outcome(
    program: Program,
    registers: list[Mapping[str, int]],
    memory: Mapping[str, int],
) -> Outcome:
    regs: list[tuple[str, str, int]] = []
    for t, name in enumerate(program.thread_names):
        for reg in sorted(registers[t]):
            regs.append((name, reg, registers[t][reg]))
    mem = tuple((loc, memory.get(loc, program.initial_value(loc))) for loc in program.locations)
    return Outcome(tuple(regs), mem)


@dataclass
class ExplorationStats:
    explored: int = 0
    complete_runs: int = 0


@dataclass(frozen=True)
class OutcomeSet:
    """Deduplicated final outcomes plus a race flag.

    stats and witnesses are exploration byproducts and do not participate in
    equality; witnesses maps an outcome to one execution that produced it.
    """

    outcomes: frozenset[Outcome]
    racy: bool = False
    stats: Optional[ExplorationStats] = field(default=None, compare=False, repr=False)
    witnesses: Optional[Mapping[Outcome, object]] = field(default=None, compare=False, repr=False)

    def sorted_outcomes(self) -> list[Outcome]:
        return sorted(self.outcomes, key=Outcome.format)


def satisfies(expr: BoolExpr, outcome: Outcome) -> bool:
    if isinstance(expr, RegAtom):
        return outcome.register(expr.thread, expr.register) == expr.value
    if isinstance(expr, MemAtom):
        return outcome.location(expr.location) == expr.value
    if isinstance(expr, Not):
        return not satisfies(expr.operand, outcome)
    if isinstance(expr, And):
        return satisfies(expr.left, outcome) and satisfies(expr.right, outcome)
    if isinstance(expr, Or):
        return satisfies(expr.left, outcome) or satisfies(expr.right, outcome)
    raise TypeError(f"not a boolean expression: {expr!r}")


@dataclass(frozen=True)
class Verdict:
    kind: str  # exists: "allowed" | "forbidden"; forall: "holds" | "fails"
    witnesses: tuple[Outcome, ...]


def eval_assertion(assertion: Assertion, outcomes: OutcomeSet) -> Verdict:
    """exists: allowed iff some outcome satisfies the formula.
    forall: holds iff every outcome does; witnesses carry the relevant
    outcomes (satisfying ones for allowed, violating ones for fails).
    """
    ordered = outcomes.sorted_outcomes()
    if assertion.quantifier == "exists":
        hits = tuple(o for o in ordered if satisfies(assertion.formula, o))
        return Verdict("allowed" if hits else "forbidden", hits)
    misses = tuple(o for o in ordered if not satisfies(assertion.formula, o))
    return Verdict("fails" if misses else "holds", misses)


# ---------------------------------------------------------------------------
# events (used by the axiomatic backend and by graph export)

INIT_THREAD = -1


class EventKind(enum.Enum):
    READ = "R"
    WRITE = "W"
    RMW = "RMW"
    FENCE = "F"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Event:
    """One memory event; (thread, index) identifies the source instruction.

    Initialization pseudo-writes use thread INIT_THREAD and index the
    location's position; they are modification-order-first for their location
    and happen-before every program event.
    """

    id: int
    thread: int
    index: int
    kind: EventKind
    atomic: bool
    order: Optional[MemoryOrder]
    location: Optional[str]
    value_read: Optional[int] = None
    value_written: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind is EventKind.FENCE:
            if self.location is not None:
                raise ValueError("fence events carry no location")
        elif self.location is None:
            raise ValueError(f"{self.kind} event requires a location")
        if self.kind is EventKind.READ and self.value_written is not None:
            raise ValueError("read events carry no written value")
        if self.kind is EventKind.WRITE and self.value_read is not None:
            raise ValueError("write events carry no read value")

    @property
    def is_init(self) -> bool:
        return self.thread == INIT_THREAD

    @property
    def reads_memory(self) -> bool:
        return self.kind in (EventKind.READ, EventKind.RMW)

    @property
    def writes_memory(self) -> bool:
        return self.kind in (EventKind.WRITE, EventKind.RMW)

    def describe(self) -> str:
        if self.is_init:
            return f"init {self.location}={self.value_written}"
        bits = [f"T{self.thread}#{self.index}", self.kind.value]
        if self.location is not None:
            if self.kind is EventKind.READ:
                bits.append(f"{self.location}={self.value_read}")
            elif self.kind is EventKind.WRITE:
                bits.append(f"{self.location}={self.value_written}")
            else:
                bits.append(f"{self.location}={self.value_read}->{self.value_written}")
        bits.append(order_abbrev(self.order if self.atomic else None))
        return " ".join(bits)


# ---------------------------------------------------------------------------
# traces (witnesses of the operational backends)


@dataclass(frozen=True)
class TraceStep:
    kind: str  # "exec" | "dequeue"
    thread: int
    text: str


# ---------------------------------------------------------------------------
# program transforms used by tests and experiments


def force_seq_cst(program: Program) -> Program:
    """Atomic everything, every order seq_cst (non-atomics become atomic)."""
    new_threads = []
    for body in program.threads:
        instrs = []
        for instr in body:
            if instr.kind is Kind.NA_LOAD:
                instr = replace(instr, kind=Kind.LOAD, order=MemoryOrder.SEQ_CST)
            elif instr.kind is Kind.NA_STORE:
                instr = replace(instr, kind=Kind.STORE, order=MemoryOrder.SEQ_CST)
            else:
                instr = replace(
                    instr,
                    order=MemoryOrder.SEQ_CST,
                    failure_order=MemoryOrder.SEQ_CST if instr.is_cas else None,
                )
            instrs.append(instr)
        new_threads.append(tuple(instrs))
    return replace(program, threads=tuple(new_threads))


def with_fences_after_stores(program: Program) -> Program:
    """Insert a seq_cst fence after every plain store (TSO: an mfence)."""
    fence = Instruction(Kind.FENCE, order=MemoryOrder.SEQ_CST)
    new_threads = []
    for body in program.threads:
        instrs: list[Instruction] = []
        for instr in body:
            instrs.append(instr)
            if instr.kind in (Kind.STORE, Kind.NA_STORE):
                instrs.append(fence)
        new_threads.append(tuple(instrs))
    return replace(program, threads=tuple(new_threads))
