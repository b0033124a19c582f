"""
Failure oracles: three classes of history and how they nest
===========================================================

An oracle history fills one suspect set per (process, time) cell.  Three
classes constrain those cells:

* ``P``  — always accurate: never suspect a live process, and suspect every
  crash by the horizon.
* ``M``  — foresight: every live observer names exactly the processes that
  will ever crash, right from time 0.
* ``Pk:<k>`` — accurate after ``k``: false suspicion is forgiven while the
  target is alive no later than ``k``; accuracy is owed only to processes
  alive past both ``k`` and the observation time.

This demo prints the canonical (least-information) member of each class for
one crash scenario, cross-judges them, walks the ``Pk`` ladder, and counts
the bounded deviations the enumeration machinery explores.
"""

from fdlab import (
    FailurePattern,
    FDSpec,
    canonical_history,
    history_in_pk,
    history_matches,
    perturbed_histories,
)

# Two processes over time points 0..4; process 1 crashes at time 2.
pattern = FailurePattern.from_crash_times(2, 4, {1: 2})


def show(title, history):
    print(title)
    for p in range(history.n):
        cells = [
            "{" + ",".join(map(str, sorted(history.at(p, t)))) + "}"
            for t in range(history.horizon + 1)
        ]
        print(f"  process {p} suspects: " + " ".join(f"{c:>5}" for c in cells))


show("canonical P (track the crash as it happens):",
     canonical_history(FDSpec.always_accurate(), pattern))
show("canonical M (name the doomed from the start):",
     canonical_history(FDSpec.foresight(), pattern))
show("canonical Pk:3 (as P, plus anything crashed by k=3):",
     canonical_history(FDSpec.accurate_after(3), pattern))

# Cross-judging shows the classes genuinely differ.  The P-canonical history
# is silent before the crash, which M reads as missing foresight; the
# M-canonical history suspects process 1 while it is still alive, which P
# reads as false suspicion.
p_hist = canonical_history(FDSpec.always_accurate(), pattern)
m_hist = canonical_history(FDSpec.foresight(), pattern)
for name, spec, h in [
    ("P-canonical judged by M", FDSpec.foresight(), p_hist),
    ("M-canonical judged by P", FDSpec.always_accurate(), m_hist),
]:
    verdict = history_matches(spec, h, pattern)
    first = verdict.violations[0]
    print(f"\n{name}: prefix_consistent={verdict.prefix_consistent}")
    print(f"  first violation: {first.condition} — observer {first.observer} "
          f"about {first.subject} at time {first.time}")

# The Pk ladder.  Suspecting process 1 from time 0 is premature (it only
# crashes at 2), so the history sits outside Pk until k reaches the crash
# time, after which the early suspicion is forgiven.
early = m_hist  # every cell is {1}: suspicion two time points early
print("\naccusing process 1 from time 0, judged along the Pk ladder:")
for k in range(pattern.horizon + 1):
    verdict = history_in_pk(early, pattern, k)
    print(f"  k={k}: prefix_consistent={verdict.prefix_consistent}")

# The enumeration machinery does not stop at canonical histories: it also
# tries every variant that rewrites a bounded number of cells yet stays in
# the class.  P is rigid early (accuracy pins live cells) and free late
# (extra suspicion of the already-crashed is harmless).
variants = perturbed_histories(FDSpec.always_accurate(), pattern, 1)
print(f"\nP members within one rewritten cell of canonical: {len(variants)}")
show("one such variant:", variants[1])
