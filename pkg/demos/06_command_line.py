"""
Driving everything from the command line
========================================

The ``fdlab`` console script exposes four subcommands: ``validate`` a stored
run against an algorithm and an oracle class, ``transform`` an algorithm
into its stall- or delay-wrapped form (as a JSON document that can be piped
back in), ``verify`` a preservation claim exhaustively, and ``probe`` for a
single problem-violating run.  Exit codes are part of the interface:
0 success, 1 invalid-or-found, 2 usage error, 3 budget exceeded.

This demo calls the entry point in-process so it runs without installation;
each call prints the equivalent shell command first.
"""

import io
import json
import sys
import tempfile
from pathlib import Path

from fdlab import FDSpec, builtin_algorithm, canonical_json, enumerate_runs, run_to_doc
from fdlab import EnumerationBounds
from fdlab.cli import main


def fdlab(*argv: str, stdin: str | None = None) -> int:
    print(f"$ fdlab {' '.join(argv)}")
    saved = sys.stdin
    try:
        if stdin is not None:
            sys.stdin = io.StringIO(stdin)
        code = main(list(argv))
    finally:
        sys.stdin = saved
    print(f"(exit {code})\n")
    return code


workdir = Path(tempfile.mkdtemp(prefix="fdlab-demo-"))

# --- validate: store a run, then judge it ----------------------------------
alg, _, _ = builtin_algorithm("flood-consensus-p", 2)
bounds = EnumerationBounds(n=2, horizon=3, max_steps=3)
runs = list(enumerate_runs(alg, FDSpec.always_accurate(), bounds))
trace = workdir / "run.json"
trace.write_text(canonical_json(run_to_doc(runs[40], alg)))
fdlab("validate", str(trace), "--algorithm", "flood-consensus-p", "--fd", "P", "--n", "2")

# Tamper with the stored times so they run backwards; the validator objects
# and the exit code flips to 1.
doc = json.loads(trace.read_text())
doc["times"] = doc["times"][::-1]
bad = workdir / "bad.json"
bad.write_text(canonical_json(doc))
fdlab("validate", str(bad), "--algorithm", "flood-consensus-p", "--fd", "P", "--n", "2")

# --- transform: wrap, and nest by piping the JSON back in ------------------
fdlab("transform", "sos", "strong-consensus-m", "--n", "2")

# ``--json`` emits an algorithm.v1 document; feeding it back through stdin
# stacks a second wrapper (a shell would write: ... --json | fdlab transform das -).
buffer = io.StringIO()
saved_out = sys.stdout
try:
    sys.stdout = buffer
    main(["transform", "sos", "strong-consensus-m", "--n", "2", "--json"])
finally:
    sys.stdout = saved_out
fdlab("transform", "das", "-", stdin=buffer.getvalue())

# --- verify: machine-check a preservation claim ----------------------------
fdlab("verify", "sos", "strong-consensus-m", "--n", "2", "--horizon", "3",
      "--max-steps", "3", "--history-budget", "1")

# --- probe: hunt for a violating run ---------------------------------------
# Flooding under an always-accurate oracle never violates plain agreement
# within these bounds (exit 0)...
fdlab("probe", "flood-consensus-p", "--fd", "P", "--problem", "consensus",
      "--n", "2", "--horizon", "3", "--max-steps", "4")

# ...but the anchored variant is violated (exit 1, the "found" exit), and
# the witness comes back as a run.v1 document after the summary line.
buffer = io.StringIO()
saved_out = sys.stdout
try:
    sys.stdout = buffer
    code = main(["probe", "flood-consensus-p", "--fd", "P",
                 "--problem", "strong-consensus",
                 "--n", "2", "--horizon", "3", "--max-steps", "4"])
finally:
    sys.stdout = saved_out
header, _, witness_json = buffer.getvalue().partition("\n")
print("$ fdlab probe flood-consensus-p --fd P --problem strong-consensus "
      "--n 2 --horizon 3 --max-steps 4")
print(header)
print(f"(exit {code}, witness document suppressed here)\n")
assert code == 1

# The witness is an ordinary stored run: save it and it validates cleanly —
# the run is legal, it is the problem that rejects it.
witness = workdir / "witness.json"
witness.write_text(witness_json)
fdlab("validate", str(witness), "--algorithm", "flood-consensus-p", "--fd", "P",
      "--n", "2")
