"""Sequential consistency: every interleaving against one shared memory.

Memory orders and fences are ignored; non-atomic accesses behave like plain
ones.  The only nondeterminism besides thread choice is the spurious-failure
branch of cas_weak, exposed as an extra successor state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import (
    DEFAULT_MAX_STATES,
    ExplorationStats,
    Instruction,
    Kind,
    Outcome,
    OutcomeSet,
    Program,
    ResourceLimitError,
    TraceStep,
    make_outcome,
    rmw_written_value,
)


@dataclass(frozen=True)
class ScState:
    memory: tuple[tuple[str, int], ...]
    pcs: tuple[int, ...]
    registers: tuple[tuple[tuple[str, int], ...], ...]


def initial_state(program: Program) -> ScState:
    memory = tuple((loc, program.initial_value(loc)) for loc in program.locations)
    return ScState(memory, (0,) * len(program.threads), ((),) * len(program.threads))


def runnable(program: Program, state: ScState) -> list[int]:
    return [t for t, pc in enumerate(state.pcs) if pc < len(program.threads[t])]


def _operand_value(instr: Instruction, regs: dict[str, int]) -> Optional[int]:
    if isinstance(instr.operand, str):
        return regs[instr.operand]
    return instr.operand


def _step(
    program: Program, state: ScState, thread: int, weak_spurious: bool
) -> list[tuple[ScState, str]]:
    pc = state.pcs[thread]
    if pc >= len(program.threads[thread]):
        raise ValueError(f"thread {thread} has no next instruction")
    instr = program.threads[thread][pc]
    memory = dict(state.memory)
    regs = dict(state.registers[thread])

    def pack(memory: dict[str, int], regs: dict[str, int]) -> ScState:
        new_mem = tuple(sorted(memory.items()))
        new_regs = list(state.registers)
        new_regs[thread] = tuple(sorted(regs.items()))
        pcs = list(state.pcs)
        pcs[thread] = pc + 1
        return ScState(new_mem, tuple(pcs), tuple(new_regs))

    k = instr.kind
    if k in (Kind.STORE, Kind.NA_STORE):
        value = _operand_value(instr, regs)
        memory[instr.location] = value
        return [(pack(memory, regs), f"{k.value} {instr.location} {value}")]
    if k in (Kind.LOAD, Kind.NA_LOAD):
        value = memory[instr.location]
        regs[instr.dest] = value
        return [(pack(memory, regs), f"{instr.dest} = {k.value} {instr.location} -> {value}")]
    if k is Kind.FENCE:
        return [(pack(memory, regs), "fence")]

    old = memory[instr.location]
    if instr.is_cas:
        succ: list[tuple[ScState, str]] = []
        regs[instr.dest] = old
        if old == instr.expected:
            written = dict(memory)
            written[instr.location] = instr.desired
            succ.append(
                (pack(written, regs), f"{instr.dest} = {k.value} {instr.location} -> {old} (success)")
            )
            if k is Kind.CAS_WEAK and weak_spurious:
                succ.append(
                    (
                        pack(memory, regs),
                        f"{instr.dest} = {k.value} {instr.location} -> {old} (spurious failure)",
                    )
                )
        else:
            succ.append(
                (pack(memory, regs), f"{instr.dest} = {k.value} {instr.location} -> {old} (failure)")
            )
        return succ

    # exchange / fetch_*
    operand = _operand_value(instr, regs)
    regs[instr.dest] = old
    memory[instr.location] = rmw_written_value(instr, old, operand)
    return [
        (
            pack(memory, regs),
            f"{instr.dest} = {k.value} {instr.location} -> {old} (wrote {memory[instr.location]})",
        )
    ]


def sc_step(
    program: Program, state: ScState, thread: int, *, weak_spurious: bool = True
) -> tuple[ScState, ...]:
    """Successor states for one thread step; two of them only for cas_weak."""
    return tuple(s for s, _ in _step(program, state, thread, weak_spurious))


def _final_outcome(program: Program, state: ScState) -> Outcome:
    regs = [dict(r) for r in state.registers]
    return make_outcome(program, regs, dict(state.memory))


def enumerate_sc(
    program: Program,
    *,
    weak_spurious: bool = True,
    memoize: bool = True,
    max_states: int = DEFAULT_MAX_STATES,
) -> OutcomeSet:
    stats = ExplorationStats()
    witnesses: dict[Outcome, tuple[TraceStep, ...]] = {}
    seen: set[ScState] = set()
    path: list[TraceStep] = []

    def visit(state: ScState) -> None:
        if memoize:
            if state in seen:
                return
            seen.add(state)
        stats.explored += 1
        if stats.explored > max_states:
            raise ResourceLimitError("state", max_states)
        threads = runnable(program, state)
        if not threads:
            stats.complete_runs += 1
            outcome = _final_outcome(program, state)
            if outcome not in witnesses:
                witnesses[outcome] = tuple(path)
            return
        for t in threads:
            for succ, text in _step(program, state, t, weak_spurious):
                path.append(TraceStep("exec", t, text))
                visit(succ)
                path.pop()

    visit(initial_state(program))
    return OutcomeSet(
        frozenset(witnesses), racy=False, stats=stats, witnesses=dict(witnesses)
    )
