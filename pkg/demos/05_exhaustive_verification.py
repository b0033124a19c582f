"""
Exhaustive verification over bounded run spaces
===============================================

Everything in the model is finite, so claims are settled by enumeration:
walk every valid run within explicit bounds and check the claim on each.
This demo sizes a run space before touching it, proves a solvability claim,
hunts down a counterexample for a claim that is false, and machine-checks
both wrapper-preservation arguments at small bounds.
"""

import os

from fdlab import (
    BudgetExceeded,
    EnumerationBounds,
    FDSpec,
    builtin_algorithm,
    check_solves,
    counterexample_probe,
    enumerate_runs,
    estimate_run_families,
    init_combinations,
    interpret_run,
    verify_das,
    verify_sos,
)

alg, interp, predicate = builtin_algorithm("flood-consensus-p", 2)
bounds = EnumerationBounds(n=2, horizon=3, max_steps=4, history_budget=1)

# --- sizing before walking -------------------------------------------------
# A family is one (pattern, history, initial states) choice; schedules are
# enumerated inside each family.  The estimate is a cheap upper bound used
# to refuse hopeless requests before any work happens.
families = estimate_run_families(bounds, len(init_combinations(alg)))
total = sum(1 for _ in enumerate_runs(alg, FDSpec.always_accurate(), bounds))
print(f"family estimate: {families}, runs actually enumerated: {total}")

# The walk refuses to exceed its cap (set per call here; the FDLAB_RUN_CAP
# environment variable changes the default for a whole session).
try:
    list(enumerate_runs(alg, FDSpec.always_accurate(),
                        EnumerationBounds(n=2, horizon=3, max_steps=4, run_cap=10)))
except BudgetExceeded as exc:
    print(f"cap honored: {exc}")
print(f"FDLAB_RUN_CAP currently: {os.environ.get('FDLAB_RUN_CAP', '(unset)')}")

# --- an exhaustive solvability verdict -------------------------------------
# Flooding under the always-accurate oracle solves plain agreement on every
# fair run in bounds.  Runs that merely ran out of horizon count as
# undecided, not as violations.
report = check_solves(alg, FDSpec.always_accurate(), interp, predicate, bounds)
print(f"\n{report.algorithm} under {report.fd} solves {report.problem}: {report.solves}")
print(f"  checked {report.checked_runs} runs "
      f"({report.decided_runs} decided, {report.undecided_runs} undecided) "
      f"in {report.elapsed_seconds:.2f}s")

# --- hunting a counterexample ----------------------------------------------
# The same machine does NOT solve the anchored variant: with an accurate
# oracle nobody is ever suspected, so the minimum can be a value proposed
# only by a process that later crashes.  The probe returns the first fair
# run that genuinely violates the problem.
_, _, anchored = builtin_algorithm("strong-consensus-m", 2)
probe = counterexample_probe(alg, FDSpec.always_accurate(), interp, anchored, bounds)
print(f"\nanchored agreement violated: {probe.found} (run #{probe.checked_runs})")
print(f"  {probe.detail}")
word = interpret_run(probe.run, interp)
print(f"  final letters {word[-1]}, crashes "
      f"{[sorted(c) for c in probe.run.pattern.crashed]}")

# --- machine-checking the wrapper arguments --------------------------------
# verify_sos: every run of the stalled machine under full foresight maps to
# a run of the plain machine on the matching initial-crash pattern, with the
# same observable sequence up to stutter insertion, and the problem verdict
# carries over.  verify_das: same story one notch down the Pk ladder.
strong, s_interp, s_pred = builtin_algorithm("strong-consensus-m", 2)
small = EnumerationBounds(n=2, horizon=3, max_steps=3, history_budget=1)
sos = verify_sos(strong, s_interp, s_pred, small)
print(f"\nstall preservation:  ok={sos.ok}  "
      f"({sos.checked_runs} runs, {sos.families} families, "
      f"{sos.elapsed_seconds:.2f}s)")
das = verify_das(alg, interp, predicate, 0, small)
print(f"delay preservation:  ok={das.ok}  "
      f"({das.checked_runs} runs under {das.fd}, {das.elapsed_seconds:.2f}s)")

# Sabotaged mappings are caught: skip the clock shift and the delay
# argument collapses, with named clauses saying exactly what broke.
broken = verify_das(alg, interp, predicate, 0, small, time_shift=False)
print(f"delay without shift: ok={broken.ok}  "
      f"({broken.failure_count} clause failures, "
      f"e.g. {broken.failures[0].clause})")
