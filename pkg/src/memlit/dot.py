"""Graphviz (dot) rendering of executions and interleaving traces.

Output is deterministic: nodes by event id or step number, edges sorted.
An empty trace still yields a syntactically valid (header-only) graph.
"""

from __future__ import annotations

from collections.abc import Sequence

from .axiomatic import CandidateExecution, compute_sw
from .model import Event, Program, TraceStep


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _event_label(event: Event) -> str:
    if event.is_init:
        return event.describe()
    # "T0#1 W x=1 rel" -> "T0: W x=1 rel"
    _, rest = event.describe().split(" ", 1)
    return f"T{event.thread}: {rest}"


def execution_dot(program: Program, candidate: CandidateExecution, *, title: str = "execution") -> str:
    """Candidate execution as a digraph: sb between consecutive same-thread
    events, rf write-to-read, mo between mo-adjacent writes, sw edges."""
    events = candidate.events
    lines = [
        f"digraph {_quote(title)} {{",
        "  rankdir=TB;",
        '  node [shape=box, fontname="monospace"];',
    ]
    for e in events:
        lines.append(f"  e{e.id} [label={_quote(_event_label(e))}];")

    edges: list[tuple[int, int, str]] = []
    by_thread: dict[int, list[Event]] = {}
    for e in events:
        if not e.is_init:
            by_thread.setdefault(e.thread, []).append(e)
    for thread_events in by_thread.values():
        thread_events.sort(key=lambda e: e.index)
        for a, b in zip(thread_events, thread_events[1:]):
            edges.append((a.id, b.id, "sb"))
    for r_id, w_id in candidate.rf.items():
        edges.append((w_id, r_id, "rf"))
    for order in candidate.mo.values():
        for a, b in zip(order, order[1:]):
            edges.append((a, b, "mo"))
    for a, b in compute_sw(candidate).pairs:
        edges.append((a, b, "sw"))

    style = {
        "sb": "",
        "rf": ", color=red, fontcolor=red",
        "mo": ", color=blue, fontcolor=blue",
        "sw": ", color=darkgreen, fontcolor=darkgreen, style=dashed",
    }
    rank = {"sb": 0, "rf": 1, "mo": 2, "sw": 3}
    for a, b, name in sorted(edges, key=lambda e: (rank[e[2]], e[0], e[1])):
        lines.append(f"  e{a} -> e{b} [label={_quote(name)}{style[name]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def trace_dot(program: Program, trace: Sequence[TraceStep], *, title: str = "trace") -> str:
    """Interleaving trace, steps numbered in global order.

    Edges: program-order between consecutive instruction steps of one thread,
    propagation from a buffered store to the dequeue that publishes it.
    """
    lines = [
        f"digraph {_quote(title)} {{",
        "  rankdir=TB;",
        '  node [shape=box, fontname="monospace"];',
    ]
    for i, step in enumerate(trace):
        name = program.thread_names[step.thread]
        if step.kind == "dequeue":
            label = f"{i + 1}. {name} dequeue: {step.text}"
            lines.append(f"  s{i} [label={_quote(label)}, style=dashed];")
        else:
            label = f"{i + 1}. {name}: {step.text}"
            lines.append(f"  s{i} [label={_quote(label)}];")

    last_exec: dict[int, int] = {}
    pending: dict[int, list[int]] = {}
    edges: list[tuple[int, int, str]] = []
    for i, step in enumerate(trace):
        if step.kind == "dequeue":
            queue = pending.get(step.thread)
            if queue:
                edges.append((queue.pop(0), i, "prop"))
            continue
        prev = last_exec.get(step.thread)
        if prev is not None:
            edges.append((prev, i, "po"))
        last_exec[step.thread] = i
        if step.text.endswith("-> buffer"):
            pending.setdefault(step.thread, []).append(i)

    style = {"po": "", "prop": ", color=blue, fontcolor=blue, style=dashed"}
    for a, b, name in sorted(edges, key=lambda e: (e[2], e[0], e[1])):
        lines.append(f"  s{a} -> s{b} [label={_quote(name)}{style[name]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
