"""
Observable sequences, stutter insertion, and problem predicates
===============================================================

Problems never look at machine internals.  An interpretation maps each local
state to a letter, a run becomes a sequence of letter rows (one row per
configuration, one column per process), and a problem is a predicate over
(sequence, crash pattern).  Because wrappers slow machines down, the key
relation between sequences is *stutter insertion*: extra rows may appear as
long as each column only lingers on a value it already passes through.
"""

from fdlab import (
    ConsensusPredicate,
    EnumerationBounds,
    FailurePattern,
    FDSpec,
    ProblemPredicate,
    StrongConsensusPredicate,
    builtin_algorithm,
    check_crash_time_independence,
    enumerate_runs,
    eval_consensus,
    eval_strong_consensus,
    interpret_run,
    is_one_stutter,
    is_stutter,
    stutter_expansions,
)

# --- from run to observable sequence ---------------------------------------
# Enumerate a few tiny runs of the flooding machine and interpret one that
# reaches a decision.  Letters read "<proposal>|<decision>", "-" = undecided.
alg, interp, _ = builtin_algorithm("flood-consensus-p", 2)
bounds = EnumerationBounds(n=2, horizon=3, max_steps=4)
word = next(
    w
    for run in enumerate_runs(alg, FDSpec.always_accurate(), bounds)
    if "-" not in "".join((w := interpret_run(run, interp))[-1])
)
print("one decided run, as letter rows (process 0 | process 1):")
for row in word:
    print(f"  {row[0]}   {row[1]}")

# --- the stutter-insertion relation ----------------------------------------
# w' is one insertion away from w when it adds a single row whose letters
# are copied from the rows around the insertion point, componentwise.
w = (("a", "x"), ("b", "y"))
blend = (("a", "x"), ("b", "x"), ("b", "y"))  # row 1 blends neighbors
print(f"\nblend row is one insertion:          {is_one_stutter(w, blend)}")

# At the boundaries there is only one neighbor, so a row pushed in front
# must copy the first row exactly.
front_copy = (("a", "x"), ("a", "x"), ("b", "y"))
front_blend = (("a", "y"), ("a", "x"), ("b", "y"))
print(f"front copy is one insertion:          {is_one_stutter(w, front_copy)}")
print(f"front blend is one insertion:         {is_one_stutter(w, front_blend)}")

# ``is_stutter`` closes the relation under repetition (any number of
# insertions), decided by dynamic programming rather than search.
many = (("a", "x"), ("a", "x"), ("b", "x"), ("b", "y"), ("b", "y"))
alien = (("a", "x"), ("c", "x"), ("b", "y"))  # "c" appears from nowhere
print(f"two insertions reachable:             {is_stutter(w, many)}")
print(f"alien letter reachable:               {is_stutter(w, alien)}")
count = sum(1 for _ in stutter_expansions(w, 4))
print(f"expansions of w up to 4 rows:         {count}")

# --- problem predicates ----------------------------------------------------
# Plain agreement: one decided value, drawn from the proposals, and every
# survivor has decided by the end.  The anchored variant additionally
# demands the decided value be the proposal of some SURVIVOR.
nobody_crashes = FailurePattern.from_crash_times(2, 2, {})
zero_crashes = FailurePattern.from_crash_times(2, 2, {0: 0})
# proposals (0, 1); the survivor adopts the dead process's value 0
adopted = (("0|-", "1|-"), ("0|-", "1|0"), ("0|-", "1|0"))
print(f"\nadopting a dead proposal, plain:      {eval_consensus(adopted, zero_crashes)}")
print(f"adopting a dead proposal, anchored:   {eval_strong_consensus(adopted, zero_crashes)}")
print(f"engine word from above, plain:        {ConsensusPredicate().evaluate(word, nobody_crashes)}")
print(f"engine word from above, anchored:     {StrongConsensusPredicate().evaluate(word, nobody_crashes)}")

# --- predicate hygiene -----------------------------------------------------
# The preservation arguments need predicates that ignore WHEN crashes happen
# (only who survives matters).  The built-ins pass; a predicate that peeks
# at crash times is caught with a concrete witness.
clean = check_crash_time_independence(ConsensusPredicate(), n=2, horizon=2, max_len=3)
print(f"\nplain agreement crash-time witness:   {clean}")


class PeeksAtCrashTime(ProblemPredicate):
    """Deliberately unhygienic: verdict depends on the crash schedule."""

    name = "peeks-at-crash-time"
    sigma = frozenset({"0|-", "1|-"})
    sigma_init = frozenset({"0|-", "1|-"})

    def evaluate(self, w, f) -> bool:
        return not f.crashed_at(0)


witness = check_crash_time_independence(PeeksAtCrashTime(), n=2, horizon=2, max_len=3)
print("peeking predicate caught: same survivors, different crash times")
print(f"  pattern A crashes: {[sorted(c) for c in witness.pattern_a.crashed]}")
print(f"  pattern B crashes: {[sorted(c) for c in witness.pattern_b.crashed]}")
