"""Axiomatic release/acquire/seq_cst model with race detection.

A candidate execution fixes, for a program, a reads-from map (rf), one
modification order per location (mo, initialization first), and one total
order S over the seq_cst events.  Initialization is modeled as a pseudo-write
per location that is mo-first and happens-before every program event.  CAS
instructions contribute an RMW event when they succeed and a plain read at
the failure order when they fail; both branches are enumerated.

Candidates are judged against these axioms (names appear in judgments):

  HB-IRREFLEXIVE  happens-before (the transitive closure of sequenced-before
                  and synchronizes-with) has no cycle.
  HB-MO           same-location writes ordered by hb use the same order in mo.
  COHERENT-READ   a read neither observes an hb-later write nor one separated
                  from it by an hb-interposed write to the same location.
  SC-READ         a seq_cst read observes the last seq_cst write to its
                  location that precedes it in S, or a non-seq_cst write that
                  does not happen-before that write.
  RMW-IMMEDIATE   an RMW reads the immediate mo-predecessor of its own write.
  SC-FENCE-1..4   the four seq_cst fence rules: (1) a read after (in sb) a
                  seq_cst fence X observes the last seq_cst write preceding X
                  in S or something mo-later; (2) a seq_cst read B observes a
                  write A or something mo-later if A is sequenced before a
                  seq_cst fence that S-precedes B; (3) with fences on both
                  sides ordered by S, the read side cannot observe anything
                  mo-earlier than A; (4) with fences on both sides ordered by
                  S, the writes themselves must agree with mo.

When hb is cyclic, the hb-dependent checks (HB-MO, COHERENT-READ, SC-READ)
are skipped and only HB-IRREFLEXIVE plus the hb-independent axioms are
reported.

Synchronizes-with edges come from four rules, all built on (hypothetical)
release sequences: release write to acquire read via the sequence, release
fence to acquire fence, release fence to acquire read, and release write to
acquire fence.  A release sequence starts at a release-class atomic write and
extends through contiguous mo-successors that are atomic writes by the same
thread or atomic RMWs by any thread.

Reads may only return grounded values: a candidate whose data flow is
circular (a load feeding a store that the load itself observes) is rejected
rather than allowed to conjure values out of thin air.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Optional, Union

from .model import (
    CAS_KINDS,
    DEFAULT_MAX_CANDIDATES,
    Event,
    EventKind,
    ExplorationStats,
    INIT_THREAD,
    Instruction,
    Kind,
    MemoryOrder,
    Outcome,
    OutcomeSet,
    Program,
    ResourceLimitError,
    make_outcome,
    rmw_written_value,
)
from .relation import Relation, linear_extensions, transitive_closure

AXIOMS = (
    "HB-IRREFLEXIVE",
    "HB-MO",
    "COHERENT-READ",
    "SC-READ",
    "RMW-IMMEDIATE",
    "SC-FENCE-1",
    "SC-FENCE-2",
    "SC-FENCE-3",
    "SC-FENCE-4",
)

ACQUIRE_CLASS = frozenset({MemoryOrder.ACQUIRE, MemoryOrder.ACQ_REL, MemoryOrder.SEQ_CST})
RELEASE_CLASS = frozenset({MemoryOrder.RELEASE, MemoryOrder.ACQ_REL, MemoryOrder.SEQ_CST})


@dataclass(frozen=True)
class CandidateExecution:
    """events must be ordered by id (events[i].id == i), initialization
    pseudo-writes included.  rf maps read event ids to write event ids; mo
    maps each location to its write ids, initialization first; sc_order is
    a permutation of the seq_cst event ids."""

    events: tuple[Event, ...]
    rf: Mapping[int, int]
    mo: Mapping[str, tuple[int, ...]]
    sc_order: tuple[int, ...]

    def __post_init__(self) -> None:
        for i, e in enumerate(self.events):
            if e.id != i:
                raise ValueError("events must be ordered by id")
        for r_id, w_id in self.rf.items():
            r, w = self.events[r_id], self.events[w_id]
            if not r.reads_memory or not w.writes_memory:
                raise ValueError(f"rf pair ({w_id} -> {r_id}) is not write-to-read")
            if r_id == w_id:
                raise ValueError("an event cannot read from itself")
            if r.location != w.location:
                raise ValueError(f"rf pair ({w_id} -> {r_id}) mixes locations")
            if r.value_read != w.value_written:
                raise ValueError(f"rf pair ({w_id} -> {r_id}) disagrees on the value")
        writes_by_loc: dict[str, set[int]] = {}
        for e in self.events:
            if e.writes_memory:
                writes_by_loc.setdefault(e.location, set()).add(e.id)
        if set(self.mo) != set(writes_by_loc):
            raise ValueError("mo must cover exactly the written locations")
        for loc, order in self.mo.items():
            if set(order) != writes_by_loc[loc] or len(order) != len(writes_by_loc[loc]):
                raise ValueError(f"mo for {loc} is not a permutation of its writes")
            if not self.events[order[0]].is_init:
                raise ValueError(f"mo for {loc} must start at the initialization write")
        sc_ids = {e.id for e in self.events if e.order is MemoryOrder.SEQ_CST}
        if set(self.sc_order) != sc_ids or len(self.sc_order) != len(sc_ids):
            raise ValueError("sc_order must be a permutation of the seq_cst events")

    def event(self, event_id: int) -> Event:
        return self.events[event_id]

    def mo_position(self, event_id: int) -> int:
        return self._mo_pos[event_id]

    @property
    def _mo_pos(self) -> dict[int, int]:
        pos = self.__dict__.get("_mo_pos_cache")
        if pos is None:
            pos = {w: i for order in self.mo.values() for i, w in enumerate(order)}
            self.__dict__["_mo_pos_cache"] = pos
        return pos


@dataclass(frozen=True)
class ExecutionJudgment:
    consistent: bool
    violated: tuple[str, ...]
    races: tuple[tuple[int, int], ...]
    sb: Relation
    sw: Relation
    hb: Relation


# ---------------------------------------------------------------------------
# event layout


@dataclass(frozen=True)
class _Layout:
    locations: tuple[str, ...]
    init_ids: dict[str, int]
    event_ids: dict[tuple[int, int], int]
    n_events: int


def _layout(program: Program) -> _Layout:
    locations = program.locations
    init_ids = {loc: i for i, loc in enumerate(locations)}
    event_ids: dict[tuple[int, int], int] = {}
    next_id = len(locations)
    for t, body in enumerate(program.threads):
        for i in range(len(body)):
            event_ids[(t, i)] = next_id
            next_id += 1
    return _Layout(locations, init_ids, event_ids, next_id)


def _init_events(program: Program, lay: _Layout) -> list[Event]:
    return [
        Event(
            id=lay.init_ids[loc],
            thread=INIT_THREAD,
            index=lay.init_ids[loc],
            kind=EventKind.WRITE,
            atomic=True,
            order=None,
            location=loc,
            value_written=program.initial_value(loc),
        )
        for loc in lay.locations
    ]


def compute_sb(program: Program) -> Relation:
    """Sequenced-before: the per-thread total order, transitively closed.
    The universe covers every event id, initialization writes included."""
    lay = _layout(program)
    pairs = set()
    for t, body in enumerate(program.threads):
        ids = [lay.event_ids[(t, i)] for i in range(len(body))]
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                pairs.add((ids[i], ids[j]))
    return Relation(frozenset(range(lay.n_events)), frozenset(pairs))


def _sequenced(a: Event, b: Event) -> bool:
    return a.thread == b.thread and a.thread != INIT_THREAD and a.index < b.index


# ---------------------------------------------------------------------------
# release sequences and synchronizes-with


def _sequence_from(events: tuple[Event, ...], mo: Mapping[str, tuple[int, ...]], head: Event) -> tuple[int, ...]:
    order = mo[head.location]
    start = order.index(head.id)
    seq = [head.id]
    for w_id in order[start + 1 :]:
        e = events[w_id]
        if e.atomic and (e.kind is EventKind.RMW or e.thread == head.thread):
            seq.append(w_id)
        else:
            break
    return tuple(seq)


def release_sequence(candidate: CandidateExecution, head_id: int) -> tuple[int, ...]:
    """Maximal release sequence headed by a release-class atomic write:
    contiguous mo-successors that are same-thread atomic writes or RMWs from
    any thread."""
    head = candidate.events[head_id]
    if not (head.writes_memory and head.atomic and head.order in RELEASE_CLASS):
        raise ValueError(f"event {head_id} does not head a release sequence")
    return _sequence_from(candidate.events, candidate.mo, head)


def _sw_pairs(
    events: tuple[Event, ...],
    rf: Mapping[int, int],
    mo: Mapping[str, tuple[int, ...]],
) -> frozenset[tuple[int, int]]:
    atomic_writes = [e for e in events if e.writes_memory and e.atomic and not e.is_init]
    atomic_reads = [e for e in events if e.reads_memory and e.atomic]
    release_writes = [e for e in atomic_writes if e.order in RELEASE_CLASS]
    acquire_reads = [e for e in atomic_reads if e.order in ACQUIRE_CLASS]
    release_fences = [e for e in events if e.kind is EventKind.FENCE and e.order in RELEASE_CLASS]
    acquire_fences = [e for e in events if e.kind is EventKind.FENCE and e.order in ACQUIRE_CLASS]

    # hypothetical release sequences, keyed by head; actual sequences are the
    # same walk and release_sequence() guards the head's class.
    hyp = {w.id: _sequence_from(events, mo, w) for w in atomic_writes}

    pairs: set[tuple[int, int]] = set()
    for w in release_writes:
        seq = hyp[w.id]
        for r in acquire_reads:
            if rf.get(r.id) in seq:
                pairs.add((w.id, r.id))

    for fa in release_fences:
        for fb in acquire_fences:
            if fa.id == fb.id:
                continue
            if _fence_fence_sync(events, rf, hyp, atomic_writes, atomic_reads, fa, fb):
                pairs.add((fa.id, fb.id))

    for fa in release_fences:
        for r in acquire_reads:
            for x in atomic_writes:
                if x.location == r.location and _sequenced(fa, x) and rf.get(r.id) in hyp[x.id]:
                    pairs.add((fa.id, r.id))
                    break

    for w in release_writes:
        seq = hyp[w.id]
        for fb in acquire_fences:
            for y in atomic_reads:
                if y.location == w.location and _sequenced(y, fb) and rf.get(y.id) in seq:
                    pairs.add((w.id, fb.id))
                    break

    return frozenset(pairs)


def _fence_fence_sync(events, rf, hyp, atomic_writes, atomic_reads, fa: Event, fb: Event) -> bool:
    for x in atomic_writes:
        if not _sequenced(fa, x):
            continue
        seq = hyp[x.id]
        for y in atomic_reads:
            if y.location == x.location and _sequenced(y, fb) and rf.get(y.id) in seq:
                return True
    return False


def compute_sw(candidate: CandidateExecution) -> Relation:
    universe = frozenset(range(len(candidate.events)))
    return Relation(universe, _sw_pairs(candidate.events, candidate.rf, candidate.mo))


def _hb(sb: Relation, sw_pairs: frozenset[tuple[int, int]], events: tuple[Event, ...]) -> Relation:
    init_edges = {
        (i.id, e.id) for i in events if i.is_init for e in events if not e.is_init
    }
    return transitive_closure(Relation(sb.universe, sb.pairs | sw_pairs | init_edges))


def compute_hb(program: Program, candidate: CandidateExecution) -> Relation:
    """Transitive closure of sb, sw, and the initialization edges."""
    sb = compute_sb(program)
    if len(candidate.events) != len(sb.universe):
        raise ValueError("candidate does not match the program's event layout")
    return _hb(sb, _sw_pairs(candidate.events, candidate.rf, candidate.mo), candidate.events)


# ---------------------------------------------------------------------------
# axiom checks (each returns True when violated)


def _hb_mo_violated(events, mo_pos, hb_pairs) -> bool:
    for a, b in hb_pairs:
        ea, eb = events[a], events[b]
        if (
            ea.writes_memory
            and eb.writes_memory
            and ea.location == eb.location
            and mo_pos[a] > mo_pos[b]
        ):
            return True
    return False


def _coherent_read_violated(events, rf, hb_pairs) -> bool:
    for r_id, w_id in rf.items():
        if (r_id, w_id) in hb_pairs:
            return True
        loc = events[r_id].location
        for c in events:
            if (
                c.writes_memory
                and c.location == loc
                and c.id != w_id
                and c.id != r_id
                and (w_id, c.id) in hb_pairs
                and (c.id, r_id) in hb_pairs
            ):
                return True
    return False


def _rmw_immediate_violated(events, rf, mo) -> bool:
    for e in events:
        if e.kind is EventKind.RMW:
            order = mo[e.location]
            i = order.index(e.id)
            if i == 0 or order[i - 1] != rf.get(e.id):
                return True
    return False


def _last_sc_write_before(events, s, limit_pos, location) -> Optional[int]:
    found = None
    for eid in s[:limit_pos]:
        e = events[eid]
        if e.writes_memory and e.location == location:
            found = eid
    return found


def _sc_read_violated(events, rf, s, s_pos, hb_pairs) -> bool:
    for b_id in s:
        b = events[b_id]
        if not b.reads_memory:
            continue
        w_id = rf[b_id]
        a_id = _last_sc_write_before(events, s, s_pos[b_id], b.location)
        w = events[w_id]
        if a_id is None:
            ok = w.order is not MemoryOrder.SEQ_CST
        else:
            ok = w_id == a_id or (
                w.order is not MemoryOrder.SEQ_CST and (w_id, a_id) not in hb_pairs
            )
        if not ok:
            return True
    return False


def _sc_fence_violations(events, rf, mo_pos, s, s_pos) -> list[str]:
    fences = [events[i] for i in s if events[i].kind is EventKind.FENCE]
    if not fences:
        return []
    atomic_reads = [e for e in events if e.reads_memory and e.atomic]
    atomic_writes = [e for e in events if e.writes_memory and e.atomic and not e.is_init]
    violated = []

    # 1: fence X sequenced before read B constrains B by the last seq_cst
    #    write preceding X in S.
    hit = False
    for x in fences:
        for b in atomic_reads:
            if not _sequenced(x, b):
                continue
            a_id = _last_sc_write_before(events, s, s_pos[x.id], b.location)
            if a_id is not None and mo_pos[rf[b.id]] < mo_pos[a_id]:
                hit = True
    if hit:
        violated.append("SC-FENCE-1")

    # 2: write A sequenced before fence X, X S-before seq_cst read B.
    hit = False
    for b in atomic_reads:
        if b.order is not MemoryOrder.SEQ_CST:
            continue
        for a in atomic_writes:
            if a.location != b.location or a.id == b.id:
                continue
            for x in fences:
                if _sequenced(a, x) and s_pos[x.id] < s_pos[b.id] and mo_pos[rf[b.id]] < mo_pos[a.id]:
                    hit = True
    if hit:
        violated.append("SC-FENCE-2")

    # 3: write A sb fence X, fence Y sb read B, X S-before Y.
    hit = False
    for a in atomic_writes:
        for b in atomic_reads:
            if b.location != a.location or b.id == a.id:
                continue
            if mo_pos[rf[b.id]] >= mo_pos[a.id]:
                continue
            if _fence_bracket(fences, s_pos, a, b):
                hit = True
    if hit:
        violated.append("SC-FENCE-3")

    # 4: write A sb fence X, fence Y sb write B, X S-before Y forces mo order.
    hit = False
    for a in atomic_writes:
        for b in atomic_writes:
            if b.location != a.location or b.id == a.id:
                continue
            if mo_pos[b.id] > mo_pos[a.id]:
                continue
            if _fence_bracket(fences, s_pos, a, b):
                hit = True
    if hit:
        violated.append("SC-FENCE-4")

    return violated


def _fence_bracket(fences, s_pos, a: Event, b: Event) -> bool:
    for x in fences:
        if not _sequenced(a, x):
            continue
        for y in fences:
            if _sequenced(y, b) and s_pos[x.id] < s_pos[y.id]:
                return True
    return False


def _race_pairs(events, hb_pairs) -> tuple[tuple[int, int], ...]:
    races = []
    for i, a in enumerate(events):
        if a.location is None:
            continue
        for b in events[i + 1 :]:
            if (
                b.location == a.location
                and b.thread != a.thread
                and (a.writes_memory or b.writes_memory)
                and not (a.atomic and b.atomic)
                and (a.id, b.id) not in hb_pairs
                and (b.id, a.id) not in hb_pairs
            ):
                races.append((a.id, b.id))
    return tuple(sorted(races))


def detect_races(program: Program, candidate: CandidateExecution) -> tuple[tuple[int, int], ...]:
    """Conflicting same-location accesses from different threads, at least
    one non-atomic, unordered by happens-before.  Pairs are (lower id,
    higher id), sorted."""
    hb = compute_hb(program, candidate)
    return _race_pairs(candidate.events, hb.pairs)


def check_axioms(program: Program, candidate: CandidateExecution) -> ExecutionJudgment:
    sb = compute_sb(program)
    if len(candidate.events) != len(sb.universe):
        raise ValueError("candidate does not match the program's event layout")
    events = candidate.events
    rf = candidate.rf
    mo = candidate.mo
    mo_pos = candidate._mo_pos
    sw_pairs = _sw_pairs(events, rf, mo)
    sw = Relation(sb.universe, sw_pairs)
    hb = _hb(sb, sw_pairs, events)
    s = candidate.sc_order
    s_pos = {eid: i for i, eid in enumerate(s)}

    violated: list[str] = []
    cyclic = any(a == b for a, b in hb.pairs)
    if cyclic:
        violated.append("HB-IRREFLEXIVE")
    else:
        if _hb_mo_violated(events, mo_pos, hb.pairs):
            violated.append("HB-MO")
        if _coherent_read_violated(events, rf, hb.pairs):
            violated.append("COHERENT-READ")
        if _sc_read_violated(events, rf, s, s_pos, hb.pairs):
            violated.append("SC-READ")
    if _rmw_immediate_violated(events, rf, mo):
        violated.append("RMW-IMMEDIATE")
    violated.extend(_sc_fence_violations(events, rf, mo_pos, s, s_pos))

    consistent = not violated
    races = _race_pairs(events, hb.pairs) if consistent else ()
    return ExecutionJudgment(consistent, tuple(violated), races, sb, sw, hb)


# ---------------------------------------------------------------------------
# candidate enumeration


@dataclass(frozen=True)
class _Skeleton:
    id: int
    thread: int
    index: int
    kind: EventKind
    atomic: bool
    order: Optional[MemoryOrder]
    location: Optional[str]
    instr: Instruction
    cas_success: Optional[bool] = None

    @property
    def reads_memory(self) -> bool:
        return self.kind in (EventKind.READ, EventKind.RMW)

    @property
    def writes_memory(self) -> bool:
        return self.kind in (EventKind.WRITE, EventKind.RMW)


def _skeletons(program: Program, lay: _Layout, branching: Mapping[tuple[int, int], bool]) -> list[_Skeleton]:
    skels = []
    for t, body in enumerate(program.threads):
        for i, instr in enumerate(body):
            eid = lay.event_ids[(t, i)]
            k = instr.kind
            success: Optional[bool] = None
            if k is Kind.FENCE:
                kind, order, atomic = EventKind.FENCE, instr.order, True
            elif k in (Kind.LOAD, Kind.NA_LOAD):
                kind, order, atomic = EventKind.READ, instr.order, k is Kind.LOAD
            elif k in (Kind.STORE, Kind.NA_STORE):
                kind, order, atomic = EventKind.WRITE, instr.order, k is Kind.STORE
            elif k in CAS_KINDS:
                success = branching[(t, i)]
                if success:
                    kind, order, atomic = EventKind.RMW, instr.order, True
                else:
                    kind, order, atomic = EventKind.READ, instr.failure_order, True
            else:
                kind, order, atomic = EventKind.RMW, instr.order, True
            skels.append(
                _Skeleton(eid, t, i, kind, atomic, order, instr.location, instr, success)
            )
    return skels


def _defining_events(program: Program, lay: _Layout) -> dict[int, int]:
    """For each event whose instruction names a register operand, the event
    of the defining (most recent earlier same-thread dest) instruction."""
    defs: dict[int, int] = {}
    for t, body in enumerate(program.threads):
        last_def: dict[str, int] = {}
        for i, instr in enumerate(body):
            if isinstance(instr.operand, str):
                defs[lay.event_ids[(t, i)]] = last_def[instr.operand]
            if instr.dest is not None:
                last_def[instr.dest] = lay.event_ids[(t, i)]
    return defs


def _ground(
    skels: list[_Skeleton],
    init_events: list[Event],
    rf: Mapping[int, int],
    defs: Mapping[int, int],
    weak_spurious: bool,
) -> Optional[list[Event]]:
    """Propagate values along rf and register flow; None when a value cannot
    be grounded in an actual write or a CAS branch contradicts its read."""
    value_read: dict[int, int] = {}
    value_written: dict[int, int] = {e.id: e.value_written for e in init_events}

    def operand_value(skel: _Skeleton) -> Optional[int]:
        op = skel.instr.operand
        if isinstance(op, str):
            return value_read.get(defs[skel.id])
        return op

    changed = True
    while changed:
        changed = False
        for skel in skels:
            if skel.reads_memory and skel.id not in value_read:
                src = rf[skel.id]
                if src in value_written:
                    value_read[skel.id] = value_written[src]
                    changed = True
            if skel.writes_memory and skel.id not in value_written:
                instr = skel.instr
                if skel.kind is EventKind.WRITE:
                    value = operand_value(skel)
                elif instr.kind in CAS_KINDS:
                    value = instr.desired
                else:
                    old = value_read.get(skel.id)
                    op = operand_value(skel)
                    value = None if old is None or op is None else rmw_written_value(instr, old, op)
                if value is not None:
                    value_written[skel.id] = value
                    changed = True

    events = list(init_events)
    for skel in skels:
        vr = value_read.get(skel.id)
        vw = value_written.get(skel.id)
        if skel.reads_memory and vr is None:
            return None
        if skel.writes_memory and vw is None:
            return None
        if skel.cas_success is not None:
            expected = skel.instr.expected
            if skel.cas_success and vr != expected:
                return None
            if not skel.cas_success and vr == expected:
                # spurious failure: only weak CAS, and only when enabled
                if skel.instr.kind is not Kind.CAS_WEAK or not weak_spurious:
                    return None
        events.append(
            Event(
                id=skel.id,
                thread=skel.thread,
                index=skel.index,
                kind=skel.kind,
                atomic=skel.atomic,
                order=skel.order,
                location=skel.location,
                value_read=vr if skel.reads_memory else None,
                value_written=vw if skel.writes_memory else None,
            )
        )
    return events


def _static_write_value(skel: _Skeleton) -> Optional[int]:
    instr = skel.instr
    if skel.kind is EventKind.WRITE and isinstance(instr.operand, int):
        return instr.operand
    if instr.kind in CAS_KINDS and skel.cas_success:
        return instr.desired
    if instr.kind is Kind.EXCHANGE and isinstance(instr.operand, int):
        return instr.operand
    return None


def _mo_extensions(loc_writes: list[_Skeleton], init_id: int, universe_size: int) -> list[tuple[int, ...]]:
    ids = [init_id] + [w.id for w in loc_writes]
    pairs = {(init_id, w.id) for w in loc_writes}
    for a, b in itertools.combinations(loc_writes, 2):
        if a.thread == b.thread:
            pairs.add((a.id, b.id) if a.index < b.index else (b.id, a.id))
    partial = Relation(frozenset(range(universe_size)), frozenset(pairs))
    return list(linear_extensions(partial, ids))


def _candidate_outcome(
    program: Program,
    lay: _Layout,
    events: list[Event],
    mo: Mapping[str, tuple[int, ...]],
) -> Outcome:
    regs: list[dict[str, int]] = []
    for t, body in enumerate(program.threads):
        values: dict[str, int] = {}
        for i, instr in enumerate(body):
            if instr.dest is not None:
                values[instr.dest] = events[lay.event_ids[(t, i)]].value_read
        regs.append(values)
    memory = {loc: events[mo[loc][-1]].value_written for loc in mo}
    return make_outcome(program, regs, memory)


def enumerate_cxx11(
    program: Program,
    *,
    weak_spurious: bool = True,
    strict_s: bool = True,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> OutcomeSet:
    """All assertion-relevant outcomes of axiom-consistent candidates.

    Enumerates CAS branchings, rf maps, per-location modification orders and,
    when needed, total orders S over the seq_cst events.  S choices stop at
    the first consistent one per (rf, mo): outcomes and races never depend on
    which consistent S witnessed them.  strict_s additionally requires S to
    embed happens-before and modification order between seq_cst events
    (matching the standard's "consistent with" wording); disabling it shows
    how underconstrained S rewrites seq_cst programs.
    """
    lay = _layout(program)
    sb = compute_sb(program)
    universe = sb.universe
    init_events = _init_events(program, lay)
    init_edge_ids = [e.id for e in init_events]
    defs = _defining_events(program, lay)
    stats = ExplorationStats()
    witnesses: dict[Outcome, CandidateExecution] = {}
    racy = False

    cas_sites = [
        (t, i)
        for t, body in enumerate(program.threads)
        for i, instr in enumerate(body)
        if instr.kind in CAS_KINDS
    ]

    def bump() -> None:
        stats.explored += 1
        if stats.explored > max_candidates:
            raise ResourceLimitError("candidate", max_candidates)

    for combo in itertools.product((True, False), repeat=len(cas_sites)):
        branching = dict(zip(cas_sites, combo))
        skels = _skeletons(program, lay, branching)
        by_id: dict[int, _Skeleton] = {s.id: s for s in skels}

        writers: dict[str, list[int]] = {loc: [lay.init_ids[loc]] for loc in lay.locations}
        static_value: dict[int, Optional[int]] = {
            e.id: e.value_written for e in init_events
        }
        for s in skels:
            if s.writes_memory:
                writers[s.location].append(s.id)
                static_value[s.id] = _static_write_value(s)

        reads = [s for s in skels if s.reads_memory]
        choices: Optional[list[list[int]]] = []
        for r in reads:
            opts = []
            expect = r.instr.expected if r.cas_success else None
            for w_id in writers[r.location]:
                if w_id == r.id:
                    continue
                w = by_id.get(w_id)
                if w is not None and w.thread == r.thread and w.index > r.index:
                    continue  # reading one's own future write always violates hb
                if expect is not None and static_value[w_id] is not None and static_value[w_id] != expect:
                    continue  # successful CAS must read its expected value
                opts.append(w_id)
            if not opts:
                choices = None
                break
            choices.append(opts)
        if choices is None:
            continue

        mo_lists = [
            _mo_extensions([s for s in skels if s.writes_memory and s.location == loc], lay.init_ids[loc], lay.n_events)
            for loc in lay.locations
        ]

        for rf_combo in itertools.product(*choices):
            rf = dict(zip([r.id for r in reads], rf_combo))
            events = _ground(skels, init_events, rf, defs, weak_spurious)
            if events is None:
                continue
            events_t = tuple(events)
            for mo_combo in itertools.product(*mo_lists):
                bump()
                mo = dict(zip(lay.locations, mo_combo))
                mo_pos = {w: i for order in mo.values() for i, w in enumerate(order)}
                sw_pairs = _sw_pairs(events_t, rf, mo)
                hb = _hb(sb, sw_pairs, events_t)
                if any(a == b for a, b in hb.pairs):
                    continue
                if _hb_mo_violated(events_t, mo_pos, hb.pairs):
                    continue
                if _coherent_read_violated(events_t, rf, hb.pairs):
                    continue
                if _rmw_immediate_violated(events_t, rf, mo):
                    continue

                sc_ids = [e.id for e in events_t if e.order is MemoryOrder.SEQ_CST]
                if strict_s:
                    sc_set = set(sc_ids)
                    constraint = {(a, b) for a, b in hb.pairs if a in sc_set and b in sc_set}
                    for order in mo.values():
                        in_s = [w for w in order if w in sc_set]
                        constraint.update(itertools.combinations(in_s, 2))
                    sc_partial = Relation(frozenset(sc_ids), frozenset(constraint))
                    try:
                        extensions = linear_extensions(sc_partial, sc_ids)
                    except ValueError:
                        continue  # hb and mo already contradict on S events
                else:
                    extensions = linear_extensions(Relation.empty(sc_ids), sc_ids)

                for s_order in extensions:
                    bump()
                    s_pos = {eid: i for i, eid in enumerate(s_order)}
                    if _sc_read_violated(events_t, rf, s_order, s_pos, hb.pairs):
                        continue
                    if _sc_fence_violations(events_t, rf, mo_pos, s_order, s_pos):
                        continue
                    candidate = CandidateExecution(events_t, dict(rf), mo, s_order)
                    outcome = _candidate_outcome(program, lay, events, mo)
                    if _race_pairs(events_t, hb.pairs):
                        racy = True
                    if outcome not in witnesses:
                        witnesses[outcome] = candidate
                    break

    return OutcomeSet(frozenset(witnesses), racy=racy, stats=stats, witnesses=dict(witnesses))
