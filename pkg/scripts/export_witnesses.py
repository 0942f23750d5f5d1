#!/usr/bin/env python3
"""Export one dot graph per witnessed outcome for the given litmus files.

Axiomatic witnesses become event graphs (sb/rf/mo/sw edges); operational
witnesses become numbered traces with program-order and propagation edges.
Render with e.g.: dot -Tsvg out/dekker-tso-0.dot > dekker-tso-0.svg
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from memlit.axiomatic import enumerate_cxx11
from memlit.dot import execution_dot, trace_dot
from memlit.dsl import parse_litmus
from memlit.sc import enumerate_sc
from memlit.tso import enumerate_tso

ENUMERATE = {"sc": enumerate_sc, "tso": enumerate_tso, "cxx11": enumerate_cxx11}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("files", nargs="+", help="litmus files to export")
    parser.add_argument("--out", default="witnesses", help="output directory")
    parser.add_argument(
        "--model", choices=(*ENUMERATE, "all"), default="all", help="which model(s) to run"
    )
    args = parser.parse_args()

    models = tuple(ENUMERATE) if args.model == "all" else (args.model,)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = 0
    for name in args.files:
        program = parse_litmus(Path(name).read_bytes())
        for model in models:
            outcomes = ENUMERATE[model](program)
            for i, outcome in enumerate(outcomes.sorted_outcomes()):
                witness = outcomes.witnesses[outcome]
                title = f"{program.name}-{model}-{i}"
                render = execution_dot if model == "cxx11" else trace_dot
                target = out_dir / f"{title}.dot"
                target.write_text(render(program, witness, title=title))
                print(f"{target}  # {outcome.format()}")
                written += 1
    print(f"{written} graphs under {out_dir}/", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
