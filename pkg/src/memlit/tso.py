"""Total store order: per-thread FIFO store buffers over one shared memory.

Mapping from the source language: every store (atomic or not, any order) is
buffered; every load reads its own newest buffered value for the location,
falling back to shared memory; fence seq_cst is an mfence and cannot execute
until the thread's own buffer is empty; weaker fences do nothing; every RMW
is a locked instruction that drains the buffer, acts directly on memory, and
releases the machine lock within the same atomic step (so the lock is free
in every quiescent state, but transitions still honor it).  A buffered write
may propagate to memory at any time via a dequeue transition, except while
another thread holds the lock.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import (
    DEFAULT_MAX_STATES,
    ExplorationStats,
    Instruction,
    Kind,
    MemoryOrder,
    Outcome,
    OutcomeSet,
    Program,
    ResourceLimitError,
    TraceStep,
    make_outcome,
    rmw_written_value,
)


@dataclass(frozen=True)
class TsoState:
    memory: tuple[tuple[str, int], ...]
    buffers: tuple[tuple[tuple[str, int], ...], ...]  # per thread, oldest first
    pcs: tuple[int, ...]
    registers: tuple[tuple[tuple[str, int], ...], ...]
    lock_owner: Optional[int] = None


@dataclass(frozen=True)
class TsoTransition:
    kind: str  # "exec" | "dequeue"
    thread: int


def initial_state(program: Program) -> TsoState:
    n = len(program.threads)
    memory = tuple((loc, program.initial_value(loc)) for loc in program.locations)
    return TsoState(memory, ((),) * n, (0,) * n, ((),) * n)


def _blocked(state: TsoState, thread: int) -> bool:
    return state.lock_owner is not None and state.lock_owner != thread


def tso_enabled(program: Program, state: TsoState) -> tuple[TsoTransition, ...]:
    enabled = []
    for t in range(len(program.threads)):
        pc = state.pcs[t]
        if pc < len(program.threads[t]) and not _blocked(state, t):
            instr = program.threads[t][pc]
            # mfence: blocked until the thread's own buffer has drained.
            if (
                instr.kind is Kind.FENCE
                and instr.order is MemoryOrder.SEQ_CST
                and state.buffers[t]
            ):
                pass
            else:
                enabled.append(TsoTransition("exec", t))
        if state.buffers[t] and not _blocked(state, t):
            enabled.append(TsoTransition("dequeue", t))
    return tuple(enabled)


def _buffer_lookup(buffer: tuple[tuple[str, int], ...], loc: str) -> Optional[int]:
    for entry_loc, value in reversed(buffer):
        if entry_loc == loc:
            return value
    return None


def _operand_value(instr: Instruction, regs: dict[str, int]) -> Optional[int]:
    if isinstance(instr.operand, str):
        return regs[instr.operand]
    return instr.operand


def _apply(
    program: Program, state: TsoState, transition: TsoTransition, weak_spurious: bool
) -> list[tuple[TsoState, TraceStep]]:
    t = transition.thread
    if transition not in tso_enabled(program, state):
        raise ValueError(f"transition {transition} is not enabled")

    if transition.kind == "dequeue":
        (loc, value), *rest = state.buffers[t]
        memory = dict(state.memory)
        memory[loc] = value
        buffers = list(state.buffers)
        buffers[t] = tuple(rest)
        succ = TsoState(
            tuple(sorted(memory.items())),
            tuple(buffers),
            state.pcs,
            state.registers,
            state.lock_owner,
        )
        return [(succ, TraceStep("dequeue", t, f"{loc} = {value}"))]

    pc = state.pcs[t]
    instr = program.threads[t][pc]
    memory = dict(state.memory)
    regs = dict(state.registers[t])
    buffer = list(state.buffers[t])

    def pack(memory: dict[str, int], regs: dict[str, int], buffer: list[tuple[str, int]]) -> TsoState:
        buffers = list(state.buffers)
        buffers[t] = tuple(buffer)
        new_regs = list(state.registers)
        new_regs[t] = tuple(sorted(regs.items()))
        pcs = list(state.pcs)
        pcs[t] = pc + 1
        return TsoState(tuple(sorted(memory.items())), tuple(buffers), tuple(pcs), tuple(new_regs))

    k = instr.kind
    if k in (Kind.STORE, Kind.NA_STORE):
        value = _operand_value(instr, regs)
        buffer.append((instr.location, value))
        return [(pack(memory, regs, buffer), TraceStep("exec", t, f"{k.value} {instr.location} {value} -> buffer"))]

    if k in (Kind.LOAD, Kind.NA_LOAD):
        forwarded = _buffer_lookup(state.buffers[t], instr.location)
        if forwarded is not None:
            value, src = forwarded, "buffer"
        else:
            value, src = memory[instr.location], "memory"
        regs[instr.dest] = value
        return [
            (
                pack(memory, regs, buffer),
                TraceStep("exec", t, f"{instr.dest} = {k.value} {instr.location} -> {value} ({src})"),
            )
        ]

    if k is Kind.FENCE:
        return [(pack(memory, regs, buffer), TraceStep("exec", t, f"fence {instr.order}"))]

    # Locked RMW: take the lock, flush the buffer, act on memory, flush
    # again, release; all inside this one transition.
    for loc, value in buffer:
        memory[loc] = value
    buffer = []
    old = memory[instr.location]

    if instr.is_cas:
        regs[instr.dest] = old
        results: list[tuple[TsoState, TraceStep]] = []
        if old == instr.expected:
            written = dict(memory)
            written[instr.location] = instr.desired
            results.append(
                (
                    pack(written, regs, buffer),
                    TraceStep("exec", t, f"{instr.dest} = {k.value} {instr.location} -> {old} (locked, success)"),
                )
            )
            if k is Kind.CAS_WEAK and weak_spurious:
                results.append(
                    (
                        pack(memory, regs, buffer),
                        TraceStep(
                            "exec", t, f"{instr.dest} = {k.value} {instr.location} -> {old} (locked, spurious failure)"
                        ),
                    )
                )
        else:
            results.append(
                (
                    pack(memory, regs, buffer),
                    TraceStep("exec", t, f"{instr.dest} = {k.value} {instr.location} -> {old} (locked, failure)"),
                )
            )
        return results

    operand = _operand_value(instr, regs)
    regs[instr.dest] = old
    memory[instr.location] = rmw_written_value(instr, old, operand)
    return [
        (
            pack(memory, regs, buffer),
            TraceStep(
                "exec", t, f"{instr.dest} = {k.value} {instr.location} -> {old} (locked, wrote {memory[instr.location]})"
            ),
        )
    ]


def tso_apply(
    program: Program,
    state: TsoState,
    transition: TsoTransition,
    *,
    weak_spurious: bool = True,
) -> tuple[TsoState, ...]:
    """Apply one enabled transition; cas_weak success yields two states."""
    return tuple(s for s, _ in _apply(program, state, transition, weak_spurious))


def _final_outcome(program: Program, state: TsoState) -> Outcome:
    regs = [dict(r) for r in state.registers]
    return make_outcome(program, regs, dict(state.memory))


def enumerate_tso(
    program: Program,
    *,
    weak_spurious: bool = True,
    max_states: int = DEFAULT_MAX_STATES,
) -> OutcomeSet:
    stats = ExplorationStats()
    witnesses: dict[Outcome, tuple[TraceStep, ...]] = {}
    seen: set[TsoState] = set()
    path: list[TraceStep] = []

    def visit(state: TsoState) -> None:
        if state in seen:
            return
        seen.add(state)
        stats.explored += 1
        if stats.explored > max_states:
            raise ResourceLimitError("state", max_states)
        transitions = tso_enabled(program, state)
        if not transitions:
            # all threads done and all buffers drained
            stats.complete_runs += 1
            outcome = _final_outcome(program, state)
            if outcome not in witnesses:
                witnesses[outcome] = tuple(path)
            return
        for transition in transitions:
            for succ, step in _apply(program, state, transition, weak_spurious):
                path.append(step)
                visit(succ)
                path.pop()

    visit(initial_state(program))
    return OutcomeSet(frozenset(witnesses), racy=False, stats=stats, witnesses=dict(witnesses))
