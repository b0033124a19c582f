"""
Building a run by hand and checking its validity
================================================

A run records who moved when, what each mover consumed and produced, and what
the failure oracle told it — all against a crash pattern and an oracle
history.  The validator re-derives every obligation from scratch and reports
each violated condition with coordinates, so this demo builds a small legal
run, then breaks it in two ways and shows what gets flagged.
"""

from fdlab import (
    FailurePattern,
    FDSpec,
    History,
    Message,
    Run,
    Step,
    builtin_algorithm,
    validate_run,
)

# Two processes run the flooding consensus machine: each sends its proposal
# to the other, collects values, and decides the minimum.
alg, _, _ = builtin_algorithm("flood-consensus-p", 2)

# Nobody crashes over time points 0..3, and the always-accurate oracle
# therefore suspects nobody anywhere.
pattern = FailurePattern.from_crash_times(2, 3, {})
history = History.from_function(2, 3, lambda p, t: frozenset())

# Process 0 proposes 1, process 1 proposes 0.
init = (alg.initial_states(0)[1], alg.initial_states(1)[0])

# Drive the machine manually.  A transition returns (next state, dispatch);
# a dispatch is a (receiver, payload) pair that we promote to a full message
# by adding the sender and a serial tag (step index * n + actor, the same
# numbering the enumeration engine uses).
s0, d0 = alg.transition(0, init[0], None, frozenset())
msg0 = Message(0, d0[0], d0[1], 0 * 2 + 0)
step0 = Step(0, init[0], None, frozenset(), s0, msg0)

s1, d1 = alg.transition(1, init[1], None, frozenset())
msg1 = Message(1, d1[0], d1[1], 1 * 2 + 1)
step1 = Step(1, init[1], None, frozenset(), s1, msg1)

# Each process now consumes the other's message; once it knows both values
# and suspects nobody it decides the minimum, so process 0 decides 0.
s0b, _ = alg.transition(0, s0, msg1.transmission(), frozenset())
step2 = Step(0, s0, msg1, frozenset(), s0b, None)
s1b, _ = alg.transition(1, s1, msg0.transmission(), frozenset())
step3 = Step(1, s1, msg0, frozenset(), s1b, None)

run = Run(pattern, history, init, (step0, step1, step2, step3), (0, 1, 2, 3))
report = validate_run(run, alg, FDSpec.always_accurate())
print(f"hand-built run valid: {report.valid}")
print(f"final states: {[alg.state_str(s) for s in (s0b, s1b)]}")

# Breakage one: claim process 1 received a message nobody sent.  The
# validator flags the phantom receipt and the state discontinuity it causes.
phantom = Message(0, 1, "1", 99)
bad_step = Step(1, s1, phantom, frozenset(), s1b, None)
bad = Run(pattern, history, init, (step0, step1, step2, bad_step), (0, 1, 2, 3))
report = validate_run(bad, alg, FDSpec.always_accurate())
print(f"\nphantom receipt valid: {report.valid}")
for v in report.violations:
    print(f"  {v.condition} at step {v.step_index}: {v.detail}")

# Breakage two: let a crashed process keep moving.  Crash process 1 at time
# 2 and watch its step at time 3 get rejected.  Note what is NOT flagged:
# the history still suspects nobody, which is fine for a finite prefix —
# the always-accurate class forbids false suspicion but only owes detection
# of the crash eventually, and "eventually" is judged at the horizon by the
# membership checks in fdlab.detectors, not by the run validator.
crashed = FailurePattern.from_crash_times(2, 3, {1: 2})
bad2 = Run(crashed, history, init, (step0, step1, step2, step3), (0, 1, 2, 3))
report = validate_run(bad2, alg, FDSpec.always_accurate())
print(f"\npost-crash activity valid: {report.valid}")
for v in report.violations:
    print(f"  {v.condition}: {v.detail}")
