"""
The stall and delay wrappers, and mapping their runs back
=========================================================

Two wrappers turn an algorithm for one oracle class into an algorithm for a
weaker one, without touching its decision logic:

* stall wrapper — a process that finds ITSELF in its own suspect set while
  still in an initial state steps into an absorbing silent state.  Under a
  full-foresight oracle the doomed silence themselves at once, so late
  crashes become indistinguishable from crashes at time 0.
* delay wrapper — every process spends its first step on a silent no-op.
  One step of patience absorbs one notch of oracle inaccuracy: a machine
  for "accurate after k" runs happily under "accurate after k+1".

Each wrapper comes with a run mapping that translates wrapped executions
back into executions of the wrapped machine; this demo runs both mappings
end to end and re-validates the results.
"""

from fdlab import (
    DelayState,
    EnumerationBounds,
    FailurePattern,
    FDSpec,
    StallState,
    builtin_algorithm,
    das_run_mapping,
    delay_a_step,
    derive_interpretation_sos,
    enumerate_runs,
    stall_on_suspect,
    strip_faulty_steps,
    to_initial_crash_run,
    validate_run,
)

# --- the stall wrapper, mechanically ---------------------------------------
base, interp, _ = builtin_algorithm("strong-consensus-m", 2)
stalled = stall_on_suspect(base)
q = base.initial_states(1)[0]
post, sent = stalled.transition(1, q, None, frozenset({1}))  # self-suspicion
print(f"wrapped machine:        {stalled.name}")
print(f"self-suspecting step:   {stalled.state_str(q)} -> {stalled.state_str(post)}, "
      f"sends {sent}")
again, sent = stalled.transition(1, post, None, frozenset({1}))
print(f"stall states absorb:    {stalled.state_str(again)}, sends {sent}")

# The derived interpretation keeps the wrapper invisible to problems: a
# stall state shows the letter of the initial state it came from.
view = derive_interpretation_sos(interp, base)
print(f"observable letter:      {view.of(1, q)!r} == {view.of(1, StallState(q))!r}")

# --- stall mapping: late crash -> crash at time zero -----------------------
# Under full foresight, a process doomed to crash at time 2 suspects itself
# from time 0 and therefore stalls before doing anything visible.  Its steps
# are all silent, so they can be deleted and the crash moved to time 0.
late_crash = FailurePattern.from_crash_times(2, 3, {1: 2})
bounds = EnumerationBounds(n=2, horizon=3, max_steps=4, patterns=(late_crash,))
wrapped_run = next(
    r
    for r in enumerate_runs(stalled, FDSpec.foresight(), bounds)
    if any(isinstance(s.post, StallState) for s in r.schedule)
)
print(f"\nwrapped run: {len(wrapped_run.schedule)} steps, "
      f"actors {[s.actor for s in wrapped_run.schedule]}")
mapped = to_initial_crash_run(strip_faulty_steps(wrapped_run))
print(f"mapped run:  {len(mapped.schedule)} steps, "
      f"actors {[s.actor for s in mapped.schedule]}")
print(f"mapped pattern crashes from time 0: {[sorted(c) for c in mapped.pattern.crashed]}")
report = validate_run(mapped, base, FDSpec.foresight())
print(f"mapped run is a valid run of the unwrapped machine: {report.valid}")

# --- the delay wrapper, mechanically ---------------------------------------
flood, _, _ = builtin_algorithm("flood-consensus-p", 2)
delayed = delay_a_step(flood)
d0 = delayed.initial_states(0)[0]
post, sent = delayed.transition(0, d0, None, frozenset())
print(f"\nwrapped machine:        {delayed.name}")
print(f"first step is a no-op:  {delayed.state_str(d0)} -> {delayed.state_str(post)}, "
      f"sends {sent}")

# --- delay mapping: one notch down the Pk ladder ---------------------------
# Run the delayed machine under "accurate after 1" with a crash at time 1;
# the canonical history then suspects the victim already at time 0, which
# plain accuracy would never allow.  Dropping the no-ops and advancing the
# clock one step turns this into a valid run of the undelayed machine whose
# history is accurate after 0.
crash_at_one = FailurePattern.from_crash_times(2, 3, {1: 1})
bounds = EnumerationBounds(n=2, horizon=3, max_steps=4, patterns=(crash_at_one,))
wrapped_run = next(
    r
    for r in enumerate_runs(delayed, FDSpec.accurate_after(1), bounds)
    if sum(1 for s in r.schedule if not isinstance(s.pre, DelayState)) >= 2
)
print(f"\nwrapped run times:  {wrapped_run.times}")
mapped = das_run_mapping(wrapped_run)
print(f"mapped run times:   {mapped.times}")
report = validate_run(mapped, flood, FDSpec.accurate_after(0))
print(f"valid one oracle notch down: {report.valid}")

# The clock shift is what earns the stronger oracle: keep the original
# timing and the time-0 suspicion of the still-live process is flagged.
unshifted = das_run_mapping(wrapped_run, time_shift=False)
report = validate_run(unshifted, flood, FDSpec.accurate_after(0))
print(f"without the time shift:      {report.valid}")
for v in report.violations[:1]:
    print(f"  {v.condition}: {v.detail}")
