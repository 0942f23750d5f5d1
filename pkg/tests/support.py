"""Reference oracles and random-program strategies.

The oracles re-derive the operational semantics from scratch on plain dicts
so the backends are checked against an independent implementation, not
against themselves.
"""

from __future__ import annotations

from hypothesis import strategies as st

from memlit.model import (
    Assertion,
    Instruction,
    Kind,
    MemAtom,
    MemoryOrder,
    Outcome,
    Program,
    make_outcome,
    validate,
)

_FETCH = {
    Kind.FETCH_ADD: lambda a, b: (a + b) % 256,
    Kind.FETCH_SUB: lambda a, b: (a - b) % 256,
    Kind.FETCH_AND: lambda a, b: a & b,
    Kind.FETCH_OR: lambda a, b: a | b,
    Kind.FETCH_XOR: lambda a, b: a ^ b,
}


def _operand(instr: Instruction, regs: dict[str, int]) -> int:
    return regs[instr.operand] if isinstance(instr.operand, str) else instr.operand


def _final_outcome(program: Program, mem, regs) -> Outcome:
    return make_outcome(program, [dict(r) for r in regs], dict(mem))


def sc_outcomes(program: Program, weak_spurious: bool = True) -> frozenset[Outcome]:
    """Every interleaving, executed on a single shared memory."""
    results: set[Outcome] = set()

    def step(mem, regs, pcs):
        progressed = False
        for t, body in enumerate(program.threads):
            pc = pcs[t]
            if pc >= len(body):
                continue
            progressed = True
            instr = body[pc]
            next_pcs = pcs[:t] + (pc + 1,) + pcs[t + 1 :]
            for mem2, regs2 in _sc_effects(mem, regs, t, instr, weak_spurious):
                step(mem2, regs2, next_pcs)
        if not progressed:
            results.add(_final_outcome(program, mem, regs))

    step(
        {loc: program.initial_value(loc) for loc in program.locations},
        [dict() for _ in program.threads],
        tuple(0 for _ in program.threads),
    )
    return frozenset(results)


def _sc_effects(mem, regs, t, instr, weak_spurious):
    def with_reg(value, new_mem=None):
        regs2 = [dict(r) for r in regs]
        regs2[t][instr.dest] = value
        return (new_mem if new_mem is not None else dict(mem), regs2)

    k = instr.kind
    if k in (Kind.STORE, Kind.NA_STORE):
        mem2 = dict(mem)
        mem2[instr.location] = _operand(instr, regs[t])
        return [(mem2, [dict(r) for r in regs])]
    if k in (Kind.LOAD, Kind.NA_LOAD):
        return [with_reg(mem[instr.location])]
    if k is Kind.FENCE:
        return [(dict(mem), [dict(r) for r in regs])]
    old = mem[instr.location]
    if k in (Kind.CAS_STRONG, Kind.CAS_WEAK):
        outs = []
        if old == instr.expected:
            mem2 = dict(mem)
            mem2[instr.location] = instr.desired
            outs.append(with_reg(old, mem2))
            if k is Kind.CAS_WEAK and weak_spurious:
                outs.append(with_reg(old))
        else:
            outs.append(with_reg(old))
        return outs
    if k is Kind.EXCHANGE:
        mem2 = dict(mem)
        mem2[instr.location] = _operand(instr, regs[t])
        return [with_reg(old, mem2)]
    mem2 = dict(mem)
    mem2[instr.location] = _FETCH[k](old, _operand(instr, regs[t]))
    return [with_reg(old, mem2)]


def tso_outcomes(program: Program, weak_spurious: bool = True) -> frozenset[Outcome]:
    """Exhaustive search over (memory, buffers, pcs, registers) states
    with explicit nondeterministic dequeues and store-to-load forwarding."""
    results: set[Outcome] = set()
    n = len(program.threads)
    start = (
        tuple(sorted((loc, program.initial_value(loc)) for loc in program.locations)),
        tuple(() for _ in range(n)),
        tuple(0 for _ in range(n)),
        tuple(() for _ in range(n)),
    )
    seen = {start}
    frontier = [start]
    while frontier:
        state = frontier.pop()
        mem_t, bufs, pcs, regs_t = state
        mem = dict(mem_t)
        regs = [dict(r) for r in regs_t]
        successors = []
        for t in range(n):
            if bufs[t]:
                loc, val = bufs[t][0]
                mem2 = dict(mem)
                mem2[loc] = val
                successors.append((mem2, _replace(bufs, t, bufs[t][1:]), pcs, regs_t))
            pc = pcs[t]
            if pc >= len(program.threads[t]):
                continue
            instr = program.threads[t][pc]
            if instr.kind is Kind.FENCE:
                if instr.order is MemoryOrder.SEQ_CST and bufs[t]:
                    continue  # waits for its own buffer to drain
                successors.append((mem, bufs, _advance(pcs, t), regs_t))
                continue
            if instr.kind in (Kind.STORE, Kind.NA_STORE):
                entry = (instr.location, _operand(instr, regs[t]))
                successors.append((mem, _replace(bufs, t, bufs[t] + (entry,)), _advance(pcs, t), regs_t))
                continue
            if instr.kind in (Kind.LOAD, Kind.NA_LOAD):
                value = mem[instr.location]
                for loc, val in bufs[t]:
                    if loc == instr.location:
                        value = val  # newest buffered write wins
                successors.append((mem, bufs, _advance(pcs, t), _set_reg(regs_t, t, instr.dest, value)))
                continue
            # locked RMW: drain own buffer, then read-modify-write memory
            drained = dict(mem)
            for loc, val in bufs[t]:
                drained[loc] = val
            old = drained[instr.location]
            bufs2 = _replace(bufs, t, ())
            regs2 = _set_reg(regs_t, t, instr.dest, old)
            if instr.kind in (Kind.CAS_STRONG, Kind.CAS_WEAK):
                if old == instr.expected:
                    written = dict(drained)
                    written[instr.location] = instr.desired
                    successors.append((written, bufs2, _advance(pcs, t), regs2))
                    if instr.kind is Kind.CAS_WEAK and weak_spurious:
                        successors.append((drained, bufs2, _advance(pcs, t), regs2))
                else:
                    successors.append((drained, bufs2, _advance(pcs, t), regs2))
            else:
                written = dict(drained)
                if instr.kind is Kind.EXCHANGE:
                    written[instr.location] = _operand(instr, regs[t])
                else:
                    written[instr.location] = _FETCH[instr.kind](old, _operand(instr, regs[t]))
                successors.append((written, bufs2, _advance(pcs, t), regs2))
        if not successors:
            results.add(_final_outcome(program, mem, regs))
            continue
        for mem2, bufs2, pcs2, regs2 in successors:
            key = (tuple(sorted(mem2.items())) if isinstance(mem2, dict) else mem2, bufs2, pcs2, regs2)
            if key not in seen:
                seen.add(key)
                frontier.append(key)
    return frozenset(results)


def _replace(bufs, t, new):
    return bufs[:t] + (new,) + bufs[t + 1 :]


def _advance(pcs, t):
    return pcs[:t] + (pcs[t] + 1,) + pcs[t + 1 :]


def _set_reg(regs_t, t, dest, value):
    d = dict(regs_t[t])
    d[dest] = value
    return regs_t[:t] + (tuple(sorted(d.items())),) + regs_t[t + 1 :]


def value_universe(program: Program) -> frozenset[int]:
    """Closure of every value any execution could place in memory.

    Register contents are always values read back out of memory, so outcome
    registers are bounded by this set too.
    """
    values = set(program.init.values())
    instrs = [instr for thread in program.threads for instr in thread]
    changed = True
    while changed:
        changed = False
        for instr in instrs:
            if instr.kind in (Kind.STORE, Kind.NA_STORE, Kind.EXCHANGE):
                new = values if isinstance(instr.operand, str) else {instr.operand}
            elif instr.kind in (Kind.CAS_STRONG, Kind.CAS_WEAK):
                new = {instr.desired}
            elif instr.kind in _FETCH:
                ops = values if isinstance(instr.operand, str) else {instr.operand}
                new = {_FETCH[instr.kind](old, op) for old in values for op in ops}
            else:
                continue
            if not new <= values:
                values |= new
                changed = True
    return frozenset(values)


def reachable_pairs(universe, pairs) -> frozenset[tuple[int, int]]:
    """Brute-force reachability: (a, b) iff a nonempty path a -> b."""
    succ: dict[int, set[int]] = {u: set() for u in universe}
    for a, b in pairs:
        succ[a].add(b)
    out = set()
    for a in universe:
        stack = list(succ[a])
        seen = set()
        while stack:
            b = stack.pop()
            if b in seen:
                continue
            seen.add(b)
            out.add((a, b))
            stack.extend(succ[b])
    return frozenset(out)


# ---------------------------------------------------------------------------
# random programs


_READ = [MemoryOrder.RELAXED, MemoryOrder.ACQUIRE, MemoryOrder.SEQ_CST]
_WRITE = [MemoryOrder.RELAXED, MemoryOrder.RELEASE, MemoryOrder.SEQ_CST]
_RMW = [
    MemoryOrder.RELAXED,
    MemoryOrder.ACQUIRE,
    MemoryOrder.RELEASE,
    MemoryOrder.ACQ_REL,
    MemoryOrder.SEQ_CST,
]
_FENCE = _RMW


@st.composite
def instructions(draw, atomic_only: bool = False, with_cas: bool = True):
    locs = st.sampled_from(["x", "y"])
    regs = st.sampled_from(["r1", "r2"])
    vals = st.integers(0, 3)
    kinds = ["load", "store", "fetch", "exchange", "fence"]
    if with_cas:
        kinds.append("cas")
    if not atomic_only:
        kinds += ["na_load", "na_store"]
    choice = draw(st.sampled_from(kinds))
    if choice == "load":
        return Instruction(Kind.LOAD, location=draw(locs), dest=draw(regs), order=draw(st.sampled_from(_READ)))
    if choice == "store":
        return Instruction(Kind.STORE, location=draw(locs), operand=draw(vals), order=draw(st.sampled_from(_WRITE)))
    if choice == "na_load":
        return Instruction(Kind.NA_LOAD, location=draw(locs), dest=draw(regs))
    if choice == "na_store":
        return Instruction(Kind.NA_STORE, location=draw(locs), operand=draw(vals))
    if choice == "fence":
        return Instruction(Kind.FENCE, order=draw(st.sampled_from(_FENCE)))
    if choice == "exchange":
        return Instruction(
            Kind.EXCHANGE, location=draw(locs), dest=draw(regs), operand=draw(vals), order=draw(st.sampled_from(_RMW))
        )
    if choice == "cas":
        order = draw(st.sampled_from(_RMW))
        return Instruction(
            draw(st.sampled_from([Kind.CAS_STRONG, Kind.CAS_WEAK])),
            location=draw(locs),
            dest=draw(regs),
            expected=draw(vals),
            desired=draw(vals),
            order=order,
            failure_order=draw(st.sampled_from(_READ)),
        )
    fetch_kind = draw(st.sampled_from(sorted(_FETCH, key=lambda k: k.value)))
    return Instruction(
        fetch_kind, location=draw(locs), dest=draw(regs), operand=draw(vals), order=draw(st.sampled_from(_RMW))
    )


@st.composite
def programs(draw, max_threads: int = 3, max_total: int = 6, atomic_only: bool = False, with_cas: bool = True):
    n_threads = draw(st.integers(1, max_threads))
    budget = max_total
    threads = []
    for t in range(n_threads):
        top = max(1, min(3, budget - (n_threads - t - 1)))
        count = draw(st.integers(1, top))
        budget -= count
        threads.append(tuple(draw(instructions(atomic_only=atomic_only, with_cas=with_cas)) for _ in range(count)))
    program = Program(
        name="generated",
        init={"x": 0, "y": 0},
        thread_names=tuple(f"P{t}" for t in range(n_threads)),
        threads=tuple(threads),
        assertion=Assertion("exists", MemAtom("x", 0)),
    )
    assert not validate(program), validate(program)
    return program
