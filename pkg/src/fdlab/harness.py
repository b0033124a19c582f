"""Bounded exhaustive enumeration and the machine-checked preservation claims.

The enumerator walks every valid run inside explicit bounds: every monotone
crash pattern, every in-budget oracle history, every combination of initial
states, and every schedule of at most ``max_steps`` steps placed at
consecutive time points starting from every feasible offset.  Placing steps
at consecutive times is a deliberate canonicalization — configurations do not
depend on times, and the offset sweep still exercises every liveness/oracle
context — and is reported as such.

On top of the enumerator sit ``check_solves`` / ``counterexample_probe``
(does an algorithm solve a problem over all fair bounded runs) and
``verify_sos`` / ``verify_das`` (do the stall and delay wrappers preserve
solvability, checked clause by clause on every run).  The verifiers walk the
schedule trees with incremental per-step checks; ``thorough=True`` re-derives
every per-node verdict from scratch through ``validate_run``, ``is_stutter``
and the predicate and insists the two agree.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, replace
from itertools import product
from typing import Iterator

from .detectors import (
    FDSpec,
    history_in_p,
    history_in_pk,
    initial_crash_scenario,
    perturbed_histories,
    shift_history,
    shift_pattern,
)
from .errors import BudgetExceeded, DomainMismatch, FdlabError
from .model import (
    Algorithm,
    FailurePattern,
    History,
    Message,
    Run,
    State,
    Step,
    own_state_views,
)
from .problems import (
    ConsensusPredicate,
    Interpretation,
    ProblemPredicate,
    StrongConsensusPredicate,
    agreement_state,
    interpret_run,
    is_stutter,
)
from .traces import run_to_doc
from .transforms import (
    DelayState,
    das_run_mapping,
    delay_a_step,
    derive_interpretation_das,
    derive_interpretation_sos,
    stall_on_suspect,
    strip_faulty_steps,
    to_initial_crash_run,
)
from .validation import ValidationMode, validate_run

__all__ = [
    "DEFAULT_RUN_CAP",
    "RUN_CAP_ENV_VAR",
    "EnumerationBounds",
    "all_monotone_patterns",
    "init_combinations",
    "history_groups",
    "estimate_run_families",
    "enumerate_runs",
    "SolvesReport",
    "check_solves",
    "ProbeReport",
    "counterexample_probe",
    "ClauseFailure",
    "TheoremReport",
    "verify_sos",
    "verify_das",
]

DEFAULT_RUN_CAP = 1_000_000
RUN_CAP_ENV_VAR = "FDLAB_RUN_CAP"
#: At most this many distinct failure entries are kept per report.
MAX_RECORDED_FAILURES = 20

#: Canonicalization notes attached to every enumeration-backed report.
CANONICALIZATION_NOTES = (
    "schedule times are consecutive within a window; every feasible window "
    "offset is swept, runs with internal time gaps are not enumerated",
    "histories deviating from the canonical one only at cells no live process "
    "reads share one schedule tree; memberships are still checked per history",
)


@dataclass(frozen=True)
class EnumerationBounds:
    """Everything that makes an exhaustive enumeration finite.

    ``patterns`` and ``inits`` default to every monotone crash pattern and
    every combination of initial states.  ``run_cap`` bounds the a-priori
    estimate of run families (pattern x history x initial-state choices); it
    falls back to the ``FDLAB_RUN_CAP`` environment variable, then to
    ``DEFAULT_RUN_CAP``.
    """

    n: int
    horizon: int
    max_steps: int
    history_budget: int = 0
    mode: ValidationMode = ValidationMode.PREFIX_CONSISTENT
    fairness_window: int | None = None
    patterns: tuple[FailurePattern, ...] | None = None
    inits: tuple[tuple[State, ...], ...] | None = None
    run_cap: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1 or self.horizon < 0 or self.max_steps < 0:
            raise DomainMismatch("bounds need n >= 1, horizon >= 0, max_steps >= 0")
        if self.history_budget < 0:
            raise DomainMismatch("history budget cannot be negative")

    def resolved_cap(self) -> int:
        if self.run_cap is not None:
            return self.run_cap
        return int(os.environ.get(RUN_CAP_ENV_VAR, DEFAULT_RUN_CAP))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "horizon": self.horizon,
            "max_steps": self.max_steps,
            "history_budget": self.history_budget,
            "mode": self.mode.value,
            "fairness_window": self.fairness_window,
            "patterns": None if self.patterns is None else len(self.patterns),
            "inits": None if self.inits is None else len(self.inits),
            "run_cap": self.resolved_cap(),
        }


def all_monotone_patterns(n: int, horizon: int) -> tuple[FailurePattern, ...]:
    """Every monotone crash pattern, ordered by per-process crash times
    (never-crashing first)."""
    choices: tuple[int | None, ...] = (None,) + tuple(range(horizon + 1))
    out = []
    for times in product(choices, repeat=n):
        crash_times = {p: t for p, t in enumerate(times) if t is not None}
        out.append(FailurePattern.from_crash_times(n, horizon, crash_times))
    return tuple(out)


def init_combinations(alg: Algorithm) -> tuple[tuple[State, ...], ...]:
    """Every way to pick one initial state per process, in declaration order."""
    return tuple(product(*(alg.initial_states(i) for i in range(alg.n))))


def estimate_run_families(
    bounds: EnumerationBounds, inits_count: int, patterns_count: int | None = None
) -> int:
    """Upper bound on |patterns| x |histories per pattern| x |initial choices|.

    Computed without materializing anything, so a hopeless request is refused
    before any work happens.  Schedules inside a family are enumerated
    exhaustively and only counted after the fact.
    """
    if patterns_count is None:
        patterns_count = (
            len(bounds.patterns)
            if bounds.patterns is not None
            else (bounds.horizon + 2) ** bounds.n
        )
    cells = bounds.n * (bounds.horizon + 1)
    alternatives = 2**bounds.n - 1
    hist_bound = 1
    term = 1
    for r in range(1, bounds.history_budget + 1):
        term = term * (cells - r + 1) // r * alternatives
        hist_bound += term
    return patterns_count * hist_bound * inits_count


def _ensure_within_cap(bounds: EnumerationBounds, inits_count: int) -> int:
    estimate = estimate_run_families(bounds, inits_count)
    cap = bounds.resolved_cap()
    if estimate > cap:
        raise BudgetExceeded(
            f"estimated {estimate} run families exceed the cap of {cap} "
            f"(raise {RUN_CAP_ENV_VAR} or pass run_cap to override)"
        )
    return estimate


def history_groups(
    spec: FDSpec, pattern: FailurePattern, budget: int
) -> list[tuple[History, list[History]]]:
    """In-budget histories grouped by what live processes can see.

    Each group is (representative, members); all members agree on every cell
    ``(p, t)`` with ``p`` live at ``t``, so one schedule tree covers them all.
    """
    groups: dict[tuple, list[History]] = {}
    order: list[tuple] = []
    for h in perturbed_histories(spec, pattern, budget):
        key = tuple(
            h.at(p, t)
            for t in range(pattern.horizon + 1)
            for p in sorted(pattern.live_at(t))
        )
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(h)
    return [(groups[key][0], groups[key]) for key in order]


def _receive_options(transit: list[Message], actor: int) -> list[Message | None]:
    options: list[Message | None] = [None]
    options.extend(m for m in transit if m.receiver == actor)
    return options


def _scan_window(
    alg: Algorithm,
    pattern: FailurePattern,
    history: History,
    init: tuple[State, ...],
    window_start: int,
    max_steps: int,
) -> Iterator[tuple[tuple[Step, ...], tuple[int, ...]]]:
    """Depth-first over every schedule placed at consecutive times from
    ``window_start``; yields (schedule, times) at every node, root first."""
    n = pattern.n
    horizon = pattern.horizon
    states: list[State] = list(init)
    transit: list[Message] = []
    schedule: list[Step] = []
    times: list[int] = []

    def walk() -> Iterator[tuple[tuple[Step, ...], tuple[int, ...]]]:
        yield tuple(schedule), tuple(times)
        depth = len(schedule)
        t = window_start + depth
        if depth >= max_steps or t > horizon:
            return
        crashed = pattern.crashed_at(t)
        for actor in range(n):
            if actor in crashed:
                continue
            suspects = history.at(actor, t)
            pre = states[actor]
            for received in _receive_options(transit, actor):
                transmission = None if received is None else received.transmission()
                result = alg.transition(actor, pre, transmission, suspects)
                if result is None:
                    continue
                post, dispatch = result
                sent = (
                    None
                    if dispatch is None
                    else Message(actor, dispatch[0], dispatch[1], len(times) * n + actor)
                )
                step = Step(actor, pre, received, suspects, post, sent)
                states[actor] = post
                removed_at = 0
                if received is not None:
                    removed_at = transit.index(received)
                    del transit[removed_at]
                if sent is not None:
                    transit.append(sent)
                schedule.append(step)
                times.append(t)
                yield from walk()
                schedule.pop()
                times.pop()
                if sent is not None:
                    transit.pop()
                if received is not None:
                    transit.insert(removed_at, received)
                states[actor] = pre

    return walk()


def _strict_fairness_debts(run: Run, fairness_window: int | None) -> list[str]:
    """The liveness debts strict mode cares about, computed cheaply.

    The enumerator only produces runs satisfying every safety condition, so
    only message delivery to survivors and step fairness need checking here.
    """
    debts: list[str] = []
    correct = run.pattern.correct()
    consumed = {step.received for step in run.schedule if step.received is not None}
    for step in run.schedule:
        m = step.sent
        if m is not None and m not in consumed and m.receiver in correct:
            debts.append(f"message {m.tag} to survivor {m.receiver} undelivered")
    window = fairness_window if fairness_window is not None else run.horizon + 1
    for p in sorted(correct):
        longest = 0
        previous = -1
        for t in [t for s, t in zip(run.schedule, run.times) if s.actor == p] + [
            run.horizon + 1
        ]:
            longest = max(longest, t - previous - 1)
            previous = t
        if longest >= window:
            debts.append(f"survivor {p} idle for {longest} time points")
    return debts


def enumerate_runs(alg: Algorithm, fd: FDSpec, bounds: EnumerationBounds) -> Iterator[Run]:
    """Every valid run within the bounds, in a fixed deterministic order.

    Order: pattern, then history, then initial states, then window offset,
    then depth-first schedule order.  In strict-fairness mode runs carrying
    unmet liveness debts are filtered out.  The empty run appears once per
    (pattern, history, initial states), at window offset 0.
    """
    if alg.n != bounds.n:
        raise DomainMismatch(f"algorithm is over {alg.n} processes, bounds over {bounds.n}")
    inits = bounds.inits if bounds.inits is not None else init_combinations(alg)
    _ensure_within_cap(bounds, len(inits))
    patterns = (
        bounds.patterns
        if bounds.patterns is not None
        else all_monotone_patterns(bounds.n, bounds.horizon)
    )
    strict = bounds.mode is ValidationMode.STRICT_FAIRNESS
    for pattern in patterns:
        for history in perturbed_histories(fd, pattern, bounds.history_budget):
            for init in inits:
                for window_start in range(bounds.horizon + 1):
                    for schedule, times in _scan_window(
                        alg, pattern, history, init, window_start, bounds.max_steps
                    ):
                        if not schedule and window_start > 0:
                            continue
                        run = Run(pattern, history, init, schedule, times)
                        if strict and _strict_fairness_debts(run, bounds.fairness_window):
                            continue
                        yield run


# ---------------------------------------------------------------------------
# Solvability over fair bounded runs.


@dataclass
class SolvesReport:
    """Verdict of an exhaustive solvability check."""

    algorithm: str
    fd: str
    problem: str
    bounds: dict
    solves: bool
    checked_runs: int
    decided_runs: int
    undecided_runs: int
    violation_count: int
    require_quiescence: bool
    counterexample: dict | None
    elapsed_seconds: float
    canonicalizations: tuple[str, ...] = CANONICALIZATION_NOTES

    def to_dict(self) -> dict:
        return {
            "schema": "report.v1",
            "kind": "solves",
            "algorithm": self.algorithm,
            "fd": self.fd,
            "problem": self.problem,
            "bounds": self.bounds,
            "solves": self.solves,
            "checked_runs": self.checked_runs,
            "decided_runs": self.decided_runs,
            "undecided_runs": self.undecided_runs,
            "violation_count": self.violation_count,
            "require_quiescence": self.require_quiescence,
            "counterexample": self.counterexample,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
            "canonicalizations": list(self.canonicalizations),
        }


def check_solves(
    alg: Algorithm,
    fd: FDSpec,
    interp: Interpretation,
    predicate: ProblemPredicate,
    bounds: EnumerationBounds,
    require_quiescence: bool = False,
) -> SolvesReport:
    """Does the algorithm solve the problem on every fair run in bounds?

    Runs whose only defect is running out of horizon (safety holds, some
    survivor undecided) are tallied as undecided and, unless
    ``require_quiescence`` is set, excluded from the verdict.
    """
    t0 = time.perf_counter()
    interp.check_initial_cover(alg.initial_states)
    strict_bounds = replace(bounds, mode=ValidationMode.STRICT_FAIRNESS)
    checked = decided = undecided = violations = 0
    counterexample: dict | None = None
    for run in enumerate_runs(alg, fd, strict_bounds):
        checked += 1
        w = interpret_run(run, interp)
        if predicate.evaluate(w, run.pattern):
            decided += 1
            continue
        if predicate.undecided(w, run.pattern):
            undecided += 1
            if not require_quiescence:
                continue
        violations += 1
        if counterexample is None:
            counterexample = run_to_doc(run, alg)
    return SolvesReport(
        algorithm=alg.name,
        fd=fd.serialize(),
        problem=predicate.name,
        bounds=strict_bounds.to_dict(),
        solves=violations == 0,
        checked_runs=checked,
        decided_runs=decided,
        undecided_runs=undecided,
        violation_count=violations,
        require_quiescence=require_quiescence,
        counterexample=counterexample,
        elapsed_seconds=time.perf_counter() - t0,
    )


@dataclass
class ProbeReport:
    """Outcome of hunting for a single violating run."""

    algorithm: str
    fd: str
    problem: str
    bounds: dict
    found: bool
    run: Run | None
    run_doc: dict | None
    detail: str
    checked_runs: int
    elapsed_seconds: float

    def to_dict(self) -> dict:
        return {
            "schema": "report.v1",
            "kind": "probe",
            "algorithm": self.algorithm,
            "fd": self.fd,
            "problem": self.problem,
            "bounds": self.bounds,
            "found": self.found,
            "run": self.run_doc,
            "detail": self.detail,
            "checked_runs": self.checked_runs,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
        }


def counterexample_probe(
    alg: Algorithm,
    fd: FDSpec,
    interp: Interpretation,
    predicate: ProblemPredicate,
    bounds: EnumerationBounds,
) -> ProbeReport:
    """First fair run within bounds that genuinely violates the problem
    (undecided runs never count), or a report that none exists."""
    t0 = time.perf_counter()
    interp.check_initial_cover(alg.initial_states)
    strict_bounds = replace(bounds, mode=ValidationMode.STRICT_FAIRNESS)
    checked = 0
    for run in enumerate_runs(alg, fd, strict_bounds):
        checked += 1
        w = interpret_run(run, interp)
        if predicate.evaluate(w, run.pattern) or predicate.undecided(w, run.pattern):
            continue
        return ProbeReport(
            algorithm=alg.name,
            fd=fd.serialize(),
            problem=predicate.name,
            bounds=strict_bounds.to_dict(),
            found=True,
            run=run,
            run_doc=run_to_doc(run, alg),
            detail=f"run #{checked} violates {predicate.name}",
            checked_runs=checked,
            elapsed_seconds=time.perf_counter() - t0,
        )
    return ProbeReport(
        algorithm=alg.name,
        fd=fd.serialize(),
        problem=predicate.name,
        bounds=strict_bounds.to_dict(),
        found=False,
        run=None,
        run_doc=None,
        detail=f"no violation among {checked} fair runs",
        checked_runs=checked,
        elapsed_seconds=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Preservation claims, checked clause by clause.


@dataclass
class ClauseFailure:
    """One violated clause, with a concrete run when one was materialized."""

    clause: str
    detail: str
    multiplicity: int = 1
    run_doc: dict | None = None

    def to_dict(self) -> dict:
        return {
            "clause": self.clause,
            "detail": self.detail,
            "multiplicity": self.multiplicity,
            "run": self.run_doc,
        }


@dataclass
class TheoremReport:
    """Outcome of exhaustively checking a preservation claim.

    ``failure_count`` counts (run, clause) violations; ``failures`` keeps at
    most ``MAX_RECORDED_FAILURES`` distinct entries with multiplicities.
    """

    theorem: str
    algorithm: str
    fd: str
    k: int | None
    bounds: dict
    families: int
    checked_runs: int
    checked_histories: int
    failure_count: int
    failures: list[ClauseFailure]
    decided_runs: int
    undecided_runs: int
    thorough: bool
    elapsed_seconds: float
    canonicalizations: tuple[str, ...] = CANONICALIZATION_NOTES

    @property
    def ok(self) -> bool:
        return self.failure_count == 0

    def to_dict(self) -> dict:
        return {
            "schema": "report.v1",
            "kind": "theorem",
            "theorem": self.theorem,
            "algorithm": self.algorithm,
            "fd": self.fd,
            "k": self.k,
            "bounds": self.bounds,
            "families": self.families,
            "checked_runs": self.checked_runs,
            "checked_histories": self.checked_histories,
            "failure_count": self.failure_count,
            "failures": [f.to_dict() for f in self.failures],
            "decided_runs": self.decided_runs,
            "undecided_runs": self.undecided_runs,
            "thorough": self.thorough,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
            "canonicalizations": list(self.canonicalizations),
        }


class _AgreementMonitor:
    """Incremental verdicts for the two agreement predicates.

    Mirrors ``ConsensusPredicate``/``StrongConsensusPredicate`` over the
    growing observable sequence in O(1) per step; cross-checked against the
    direct evaluation in thorough mode.
    """

    __slots__ = (
        "strong",
        "correct",
        "proposals",
        "decisions",
        "ever",
        "undecided_survivors",
        "stability_broken",
        "proposal_changed",
    )

    def __init__(self, letters: list[str], correct: frozenset[int], strong: bool):
        self.strong = strong
        self.correct = correct
        self.proposals: list[int] = []
        self.decisions: list[int | None] = []
        self.ever: dict[int, int] = {}
        self.stability_broken = 0
        self.proposal_changed = 0
        for letter in letters:
            p, d = agreement_state(letter)
            self.proposals.append(p)
            self.decisions.append(d)
            if d is not None:
                self.ever[d] = self.ever.get(d, 0) + 1
        self.undecided_survivors = sum(1 for c in correct if self.decisions[c] is None)

    def push(self, i: int, letter: str) -> tuple:
        old_d = self.decisions[i]
        token = (i, old_d, self.stability_broken, self.proposal_changed)
        p, d = agreement_state(letter)
        if p != self.proposals[i]:
            self.proposal_changed += 1
        if old_d is not None and d != old_d:
            self.stability_broken += 1
        if d != old_d:
            if old_d is not None:
                count = self.ever[old_d] - 1
                if count:
                    self.ever[old_d] = count
                else:
                    del self.ever[old_d]
            if d is not None:
                self.ever[d] = self.ever.get(d, 0) + 1
            if i in self.correct:
                if old_d is None:
                    self.undecided_survivors -= 1
                elif d is None:
                    self.undecided_survivors += 1
        self.decisions[i] = d
        return token

    def pop(self, token: tuple) -> None:
        i, old_d, stability, proposal = token
        d = self.decisions[i]
        if d != old_d:
            if d is not None:
                count = self.ever[d] - 1
                if count:
                    self.ever[d] = count
                else:
                    del self.ever[d]
            if old_d is not None:
                self.ever[old_d] = self.ever.get(old_d, 0) + 1
            if i in self.correct:
                if d is None:
                    self.undecided_survivors -= 1
                elif old_d is None:
                    self.undecided_survivors += 1
        self.decisions[i] = old_d
        self.stability_broken = stability
        self.proposal_changed = proposal

    def classify(self) -> str:
        """'fail' | 'undecided' | 'decided' for the current sequence."""
        if self.stability_broken or self.proposal_changed:
            return "fail"
        if len(self.ever) > 1 or any(v not in self.proposals for v in self.ever):
            return "fail"
        if self.strong:
            if not self.correct:
                return "decided"
            if self.ever:
                value = next(iter(self.ever))
                if not any(self.proposals[c] == value for c in sorted(self.correct)):
                    return "fail"
        return "undecided" if self.undecided_survivors else "decided"

    def digest(self) -> tuple:
        return (
            self.stability_broken,
            self.proposal_changed,
            tuple(sorted(self.ever.items())),
            tuple(self.proposals),
        )


class _WalkTotals:
    __slots__ = ("nodes", "violations", "decided", "undecided")

    def __init__(self) -> None:
        self.nodes = 0
        self.violations = 0
        self.decided = 0
        self.undecided = 0

    def add_scaled(self, other: "_WalkTotals", factor: int) -> None:
        self.nodes += other.nodes * factor
        self.violations += other.violations * factor
        self.decided += other.decided * factor
        self.undecided += other.undecided * factor


def _record_failure(
    failures: list[ClauseFailure],
    clause: str,
    detail: str,
    multiplicity: int,
    doc_factory=None,
) -> None:
    """Merge a violation into the recorded list; the run document is only
    materialized the first time a (clause, detail) pair is seen."""
    for existing in failures:
        if existing.clause == clause and existing.detail == detail:
            existing.multiplicity += multiplicity
            return
    if len(failures) < MAX_RECORDED_FAILURES:
        doc = doc_factory() if doc_factory is not None else None
        failures.append(ClauseFailure(clause, detail, multiplicity, doc))


class _TreeWalker:
    """Shared machinery of the two preservation-claim walkers.

    Maintains the current schedule, per-process states, observable letters,
    transit list and predicate monitor; subclasses implement the per-step
    clause checks and the per-node slow-path cross-check.
    """

    def __init__(
        self,
        run_alg: Algorithm,
        pattern: FailurePattern,
        rep: History,
        init: tuple[State, ...],
        v_tilde: Interpretation,
        predicate: ProblemPredicate,
        use_monitor: bool,
        strong: bool,
        max_steps: int,
        failures: list[ClauseFailure],
        doc_history: History,
        thorough: bool,
    ):
        self.run_alg = run_alg
        self.pattern = pattern
        self.rep = rep
        self.init = init
        self.v_tilde = v_tilde
        self.predicate = predicate
        self.use_monitor = use_monitor
        self.max_steps = max_steps
        self.failures = failures
        self.doc_history = doc_history
        self.thorough = thorough
        self.n = pattern.n
        self.horizon = pattern.horizon
        self.faulty = pattern.faulty()
        self.correct = pattern.correct()
        self.live_at = tuple(pattern.live_at(t) for t in range(self.horizon + 1))
        self.states: list[State] = list(init)
        self.letters: list[str] = [v_tilde.of(i, s) for i, s in enumerate(init)]
        self.w_stack: list[tuple[str, ...]] = [tuple(self.letters)]
        self.transit: list[Message] = []
        self.schedule: list[Step] = []
        self.times: list[int] = []
        self.monitor = (
            _AgreementMonitor(self.letters, self.correct, strong) if use_monitor else None
        )
        self.delta_cache: dict = {}
        self.multiplier = 1
        self.latest_failure: tuple[str, str] | None = None

    # -- specialized by subclasses -------------------------------------------

    def step_violations(self, step: Step, aligned: bool) -> tuple[list[tuple[str, str]], bool]:
        """Clause violations introduced by this step, and whether the
        observable alignment invariant survives it."""
        raise NotImplementedError

    def sticky_violations(self) -> list[tuple[str, str]]:
        """Per-run clause violations carried by the current path."""
        raise NotImplementedError

    def stutter_reference(self) -> tuple[tuple[str, ...], ...]:
        """The shorter observable sequence the current one must expand."""
        raise NotImplementedError

    def mapped_verdict_not_fail(self) -> bool:
        """Does the mapped run's observable sequence satisfy the problem (or
        merely run out of horizon)?  Consulted only when the wrapper run's
        sequence fails: the preservation claim transfers satisfaction along
        the mapping, it does not manufacture it."""
        w0 = self.stutter_reference()
        f0 = self.mapped_pattern
        return self.predicate.evaluate(w0, f0) or self.predicate.undecided(w0, f0)

    def slow_check(
        self, aligned: bool, c_ok: bool, verdict: str, violations: list
    ) -> None:
        """Re-derive this node's verdicts from scratch and compare (thorough)."""
        raise NotImplementedError

    def memo_enabled(self) -> bool:
        return False

    # -- generic walk ---------------------------------------------------------

    def classify_node(self) -> str:
        if self.monitor is not None:
            return self.monitor.classify()
        w = tuple(self.w_stack)
        if self.predicate.evaluate(w, self.pattern):
            return "decided"
        if self.predicate.undecided(w, self.pattern):
            return "undecided"
        return "fail"

    def record(self, clause: str, detail: str) -> None:
        def doc_factory() -> dict:
            run = Run(
                self.pattern,
                self.doc_history,
                self.init,
                tuple(self.schedule),
                tuple(self.times),
            )
            return run_to_doc(run, self.run_alg)

        self.latest_failure = (clause, detail)
        _record_failure(self.failures, clause, detail, self.multiplier, doc_factory)

    def account_node(self, totals: _WalkTotals, aligned: bool) -> None:
        totals.nodes += 1
        violations = self.sticky_violations()
        c_ok = True
        if not aligned:
            c_ok = is_stutter(self.stutter_reference(), tuple(self.w_stack))
            if not c_ok:
                violations = violations + [
                    (self.c_clause, "observable sequence is not a stutter expansion")
                ]
        verdict = self.classify_node()
        if verdict == "fail":
            if self.mapped_verdict_not_fail():
                violations = violations + [
                    (
                        self.d_clause,
                        "problem predicate rejects the wrapper sequence although "
                        "the mapped run satisfies the problem",
                    )
                ]
        elif verdict == "decided":
            totals.decided += 1
        else:
            totals.undecided += 1
        if violations:
            totals.violations += len({clause for clause, _ in violations})
            for clause, detail in violations:
                self.record(clause, detail)
        if self.thorough:
            self.slow_check(aligned, c_ok, verdict, violations)

    def walk_window(self, window_start: int, totals: _WalkTotals) -> None:
        if window_start == 0:
            self.account_node(totals, aligned=self.root_aligned())
        self.expand(totals, window_start, self.root_aligned())

    def root_aligned(self) -> bool:
        return True

    def expand(self, totals: _WalkTotals, t: int, aligned: bool) -> None:
        depth = len(self.schedule)
        if depth >= self.max_steps or t > self.horizon:
            return
        memo = self.memo_view(aligned)
        if memo is not None:
            remaining = min(self.max_steps - depth, self.horizon + 1 - t)
            key = self.memo_key(t, remaining)
            hit = memo.get(key)
            if hit is not None:
                nodes, violations, decided, undecided, detail = hit
                totals.nodes += nodes
                totals.violations += violations
                totals.decided += decided
                totals.undecided += undecided
                if violations and detail is not None:
                    self.latest_failure = detail
                    _record_failure(
                        self.failures, detail[0], detail[1], violations * self.multiplier
                    )
                return
            snap = (totals.nodes, totals.violations, totals.decided, totals.undecided)
            saved_latest = self.latest_failure
            self.latest_failure = None
            self.expand_children(totals, t, aligned)
            memo[key] = (
                totals.nodes - snap[0],
                totals.violations - snap[1],
                totals.decided - snap[2],
                totals.undecided - snap[3],
                self.latest_failure,
            )
            if self.latest_failure is None:
                self.latest_failure = saved_latest
            return
        self.expand_children(totals, t, aligned)

    def memo_view(self, aligned: bool) -> dict | None:
        return None

    def memo_key(self, t: int, remaining: int) -> tuple:
        raise NotImplementedError

    def expand_children(self, totals: _WalkTotals, t: int, aligned: bool) -> None:
        crashed = self.pattern.crashed_at(t)
        transit = self.transit
        for actor in range(self.n):
            if actor in crashed:
                continue
            suspects = self.rep.at(actor, t)
            pre = self.states[actor]
            for received in _receive_options(transit, actor):
                transmission = None if received is None else received.transmission()
                cache_key = (actor, pre, transmission, suspects)
                try:
                    result = self.delta_cache[cache_key]
                except KeyError:
                    result = self.run_alg.transition(actor, pre, transmission, suspects)
                    self.delta_cache[cache_key] = result
                if result is None:
                    continue
                post, dispatch = result
                sent = (
                    None
                    if dispatch is None
                    else Message(actor, dispatch[0], dispatch[1], len(self.times) * self.n + actor)
                )
                step = Step(actor, pre, received, suspects, post, sent)
                new_letter = self.v_tilde.of(actor, post)

                self.schedule.append(step)
                self.times.append(t)
                self.states[actor] = post
                old_letter = self.letters[actor]
                self.letters[actor] = new_letter
                self.w_stack.append(tuple(self.letters))
                removed_at = 0
                if received is not None:
                    removed_at = transit.index(received)
                    del transit[removed_at]
                if sent is not None:
                    transit.append(sent)
                token = (
                    self.monitor.push(actor, new_letter)
                    if self.monitor is not None
                    else None
                )

                step_viols, still_aligned = self.step_violations(step, aligned)
                for clause, detail in step_viols:
                    self.push_sticky(clause, detail)
                child_aligned = aligned and still_aligned

                self.account_node(totals, child_aligned)
                self.expand(totals, t + 1, child_aligned)

                for _ in step_viols:
                    self.pop_sticky()
                if token is not None:
                    self.monitor.pop(token)
                if sent is not None:
                    transit.pop()
                if received is not None:
                    transit.insert(removed_at, received)
                self.w_stack.pop()
                self.letters[actor] = old_letter
                self.states[actor] = pre
                self.times.pop()
                self.schedule.pop()

    # sticky per-run violations are kept as a stack of (clause, detail)
    def push_sticky(self, clause: str, detail: str) -> None:
        self._sticky.append((clause, detail))

    def pop_sticky(self) -> None:
        self._sticky.pop()


class _SosWalker(_TreeWalker):
    """Clause checks for the stall wrapper under the full-foresight oracle."""

    c_clause = "sos-c-stutter-relation"
    d_clause = "sos-d-problem-holds"

    def __init__(
        self,
        base_alg: Algorithm,
        interp: Interpretation,
        init_b_mismatches: int,
        memo: dict | None,
        *args,
        **kwargs,
    ):
        super().__init__(*args, **kwargs)
        self.base_alg = base_alg
        self.interp = interp
        self.init_b_mismatches = init_b_mismatches
        self._memo = memo
        self.frozen_letters = tuple(
            interp.of(i, s) for i, s in enumerate(self.init)
        )
        self._sticky: list[tuple[str, str]] = []
        self.mapped_pattern = initial_crash_scenario(self.pattern)

    def root_aligned(self) -> bool:
        return self.init_b_mismatches == 0

    def memo_view(self, aligned: bool) -> dict | None:
        if (
            self._memo is not None
            and aligned
            and self.use_monitor
            and not self._sticky
        ):
            return self._memo
        return None

    def memo_key(self, t: int, remaining: int) -> tuple:
        live_suffix = tuple(self.live_at[u] for u in range(t, t + remaining))
        transit_key = tuple(
            sorted((m.sender, m.receiver, m.payload) for m in self.transit)
        )
        assert self.monitor is not None
        return (
            remaining,
            live_suffix,
            self.faulty,
            tuple(self.states),
            transit_key,
            self.monitor.digest(),
        )

    def step_violations(self, step: Step, aligned: bool) -> tuple[list[tuple[str, str]], bool]:
        out: list[tuple[str, str]] = []
        actor = step.actor
        still_aligned = True
        if actor in self.faulty:
            if step.sent is not None:
                out.append(
                    (
                        "sos-a-stripped-run-valid",
                        f"eventually-faulty process {actor} sends a message",
                    )
                )
            if self.letters[actor] != self.frozen_letters[actor]:
                out.append(
                    (
                        "sos-b-interpretation-equality",
                        f"stalled process {actor} shows {self.letters[actor]!r}, "
                        f"its frozen view shows {self.frozen_letters[actor]!r}",
                    )
                )
            if self.letters[actor] != self.v_tilde.of(actor, step.pre):
                still_aligned = False
        else:
            if self.letters[actor] != self.interp.of(actor, step.post):
                out.append(
                    (
                        "sos-b-interpretation-equality",
                        f"process {actor} shows {self.letters[actor]!r} under the derived "
                        f"interpretation but {self.interp.of(actor, step.post)!r} under the "
                        f"original",
                    )
                )
                still_aligned = False
        return out, still_aligned

    def sticky_violations(self) -> list[tuple[str, str]]:
        if not self.init_b_mismatches:
            return self._sticky
        return self._sticky + [
            (
                "sos-b-interpretation-equality",
                "derived interpretation disagrees on an initial state",
            )
        ]

    def stutter_reference(self) -> tuple[tuple[str, ...], ...]:
        states = list(self.init)
        rows = [tuple(self.interp.of(i, s) for i, s in enumerate(states))]
        for step in self.schedule:
            if step.actor in self.faulty:
                continue
            states[step.actor] = step.post
            rows.append(tuple(self.interp.of(i, s) for i, s in enumerate(states)))
        return tuple(rows)

    def slow_check(
        self, aligned: bool, c_ok: bool, verdict: str, violations: list
    ) -> None:
        run = Run(
            self.pattern,
            self.doc_history,
            self.init,
            tuple(self.schedule),
            tuple(self.times),
        )
        report = validate_run(
            run, self.run_alg, FDSpec.foresight(), ValidationMode.PREFIX_CONSISTENT
        )
        assert report.valid, f"engine produced an invalid run: {report.violations}"

        fast_clauses = {clause for clause, _ in violations}
        base_run = None
        try:
            stripped = strip_faulty_steps(run)
            base_run = to_initial_crash_run(stripped)
            base_report = validate_run(
                base_run,
                self.base_alg,
                FDSpec.always_accurate(),
                ValidationMode.PREFIX_CONSISTENT,
            )
            structural = [
                v for v in base_report.violations if v.condition != "history-membership"
            ]
            a_ok = not structural
        except FdlabError:
            a_ok = False
        assert a_ok == ("sos-a-stripped-run-valid" not in fast_clauses)
        if base_run is not None:
            assert interpret_run(base_run, self.interp) == self.stutter_reference()

        b_ok = True
        stripped_schedule = tuple(s for s in self.schedule if s.actor not in self.faulty)
        for i in range(self.n):
            wrapper_views = own_state_views(self.init, tuple(self.schedule), i)
            base_views = own_state_views(self.init, stripped_schedule, i)
            for index, state in enumerate(wrapper_views):
                frozen = base_views[min(index, len(base_views) - 1)]
                if self.v_tilde.of(i, state) != self.interp.of(i, frozen):
                    b_ok = False
        assert b_ok == ("sos-b-interpretation-equality" not in fast_clauses)

        slow_c = is_stutter(self.stutter_reference(), tuple(self.w_stack))
        if aligned:
            assert slow_c, "aligned paths must stutter-embed"
        else:
            assert slow_c == c_ok

        w = tuple(self.w_stack)
        if self.predicate.evaluate(w, self.pattern):
            slow_verdict = "decided"
        elif self.predicate.undecided(w, self.pattern):
            slow_verdict = "undecided"
        else:
            slow_verdict = "fail"
        assert slow_verdict == verdict, f"{slow_verdict} != {verdict}"
        fast_d = self.d_clause in fast_clauses
        assert fast_d == (slow_verdict == "fail" and self.mapped_verdict_not_fail())


class _DasWalker(_TreeWalker):
    """Clause checks for the delay wrapper under the accurate-after oracle."""

    c_clause = "das-c-stutter-relation"
    d_clause = "das-d-problem-holds"

    def __init__(
        self,
        base_alg: Algorithm,
        interp: Interpretation,
        k: int,
        time_shift: bool,
        *args,
        **kwargs,
    ):
        super().__init__(*args, **kwargs)
        self.base_alg = base_alg
        self.interp = interp
        self.k = k
        self.time_shift = time_shift
        self._sticky: list[tuple[str, str]] = []
        self.mapped_pattern = shift_pattern(self.pattern) if time_shift else self.pattern
        self.init_c_mismatches = sum(
            1
            for i, s in enumerate(self.init)
            if isinstance(s, DelayState)
            and self.v_tilde.of(i, s) != self.interp.of(i, s.base)
        )

    def root_aligned(self) -> bool:
        return self.init_c_mismatches == 0

    def step_violations(self, step: Step, aligned: bool) -> tuple[list[tuple[str, str]], bool]:
        out: list[tuple[str, str]] = []
        still_aligned = True
        actor = step.actor
        if isinstance(step.pre, DelayState):
            assert step.received is None and step.sent is None
            # the dropped no-op must not move the observable letter
            if self.letters[actor] != self.v_tilde.of(actor, step.pre):
                still_aligned = False
        elif self.letters[actor] != self.interp.of(actor, step.post):
            still_aligned = False
        return out, still_aligned

    def sticky_violations(self) -> list[tuple[str, str]]:
        return self._sticky

    def stutter_reference(self) -> tuple[tuple[str, ...], ...]:
        states = [s.base if isinstance(s, DelayState) else s for s in self.init]
        rows = [tuple(self.interp.of(i, s) for i, s in enumerate(states))]
        for step in self.schedule:
            if isinstance(step.pre, DelayState):
                continue
            states[step.actor] = step.post
            rows.append(tuple(self.interp.of(i, s) for i, s in enumerate(states)))
        return tuple(rows)

    def slow_check(
        self, aligned: bool, c_ok: bool, verdict: str, violations: list
    ) -> None:
        run = Run(
            self.pattern,
            self.doc_history,
            self.init,
            tuple(self.schedule),
            tuple(self.times),
        )
        report = validate_run(
            run,
            self.run_alg,
            FDSpec.accurate_after(self.k + 1),
            ValidationMode.PREFIX_CONSISTENT,
        )
        assert report.valid, f"engine produced an invalid run: {report.violations}"

        mapped = das_run_mapping(run, time_shift=self.time_shift)
        mapped_report = validate_run(
            mapped,
            self.base_alg,
            FDSpec.accurate_after(self.k),
            ValidationMode.PREFIX_CONSISTENT,
        )
        structural = [
            v for v in mapped_report.violations if v.condition != "history-membership"
        ]
        assert not structural, f"mapped run structurally invalid: {structural}"
        assert interpret_run(mapped, self.interp) == self.stutter_reference()

        slow_c = is_stutter(self.stutter_reference(), tuple(self.w_stack))
        if aligned:
            assert slow_c, "aligned paths must stutter-embed"
        else:
            assert slow_c == c_ok

        w = tuple(self.w_stack)
        if self.predicate.evaluate(w, self.pattern):
            slow_verdict = "decided"
        elif self.predicate.undecided(w, self.pattern):
            slow_verdict = "undecided"
        else:
            slow_verdict = "fail"
        assert slow_verdict == verdict, f"{slow_verdict} != {verdict}"
        fast_d = any(clause == self.d_clause for clause, _ in violations)
        assert fast_d == (slow_verdict == "fail" and self.mapped_verdict_not_fail())


def verify_sos(
    base_alg: Algorithm,
    interp: Interpretation,
    predicate: ProblemPredicate,
    bounds: EnumerationBounds,
    derived_interp: Interpretation | None = None,
    thorough: bool = False,
) -> TheoremReport:
    """Exhaustively check that the stall wrapper preserves the problem.

    Walks every run of the wrapped-then-stalled algorithm under the
    full-foresight oracle within bounds and checks four clauses:

    a. dropping faulty-process steps and re-homing onto the crashed-from-the-
       start pattern yields a valid run of the wrapped algorithm under the
       always-accurate oracle, including that oracle's history membership;
    b. the derived interpretation agrees, index by index, with the original
       interpretation on the two runs' per-process state views;
    c. the stripped run's observable sequence stutter-embeds into the wrapper
       run's observable sequence;
    d. problem satisfaction transfers along the mapping: a wrapper run whose
       stripped counterpart satisfies the problem satisfies it too (runs that
       merely ran out of horizon are tallied as undecided).

    ``derived_interp`` overrides the automatically derived interpretation
    (used to demonstrate that a broken derivation is caught).  ``thorough``
    re-derives every node verdict from scratch and disables memoization.
    """
    t0 = time.perf_counter()
    interp.check_initial_cover(base_alg.initial_states)
    sos_alg = stall_on_suspect(base_alg)
    v_tilde = (
        derived_interp
        if derived_interp is not None
        else derive_interpretation_sos(interp, base_alg)
    )
    fd = FDSpec.foresight()
    inits = bounds.inits if bounds.inits is not None else init_combinations(sos_alg)
    families = _ensure_within_cap(bounds, len(inits))
    patterns = (
        bounds.patterns
        if bounds.patterns is not None
        else all_monotone_patterns(bounds.n, bounds.horizon)
    )
    use_monitor = type(predicate) in (ConsensusPredicate, StrongConsensusPredicate)
    strong = isinstance(predicate, StrongConsensusPredicate)

    totals = _WalkTotals()
    failures: list[ClauseFailure] = []
    checked_runs = 0
    checked_histories = 0
    memo: dict = {}
    delta_cache: dict = {}

    for pattern in patterns:
        faulty = pattern.faulty()
        f0 = initial_crash_scenario(pattern)
        for rep, members in history_groups(fd, pattern, bounds.history_budget):
            checked_histories += len(members)
            bad_memberships = []
            for h in members:
                verdict = history_in_p(h, f0)
                if not verdict.prefix_consistent:
                    v = verdict.violations[0]
                    bad_memberships.append(
                        f"stripped-run history breaks {v.condition} "
                        f"(observer {v.observer}, subject {v.subject}, t={v.time})"
                    )
            fd_constant = all(
                rep.at(p, t) == faulty
                for t in range(pattern.horizon + 1)
                for p in pattern.live_at(t)
            )
            group = _WalkTotals()
            for init in inits:
                init_b_mismatches = sum(
                    1 for i, s in enumerate(init) if v_tilde.of(i, s) != interp.of(i, s)
                )
                walker = _SosWalker(
                    base_alg,
                    interp,
                    init_b_mismatches,
                    memo if (fd_constant and not thorough and not init_b_mismatches) else None,
                    sos_alg,
                    pattern,
                    rep,
                    init,
                    v_tilde,
                    predicate,
                    use_monitor,
                    strong,
                    bounds.max_steps,
                    failures,
                    members[0],
                    thorough,
                )
                walker.delta_cache = delta_cache
                walker.multiplier = len(members)
                for window_start in range(pattern.horizon + 1):
                    walker.walk_window(window_start, group)
            checked_runs += group.nodes * len(members)
            totals.add_scaled(group, len(members))
            for detail in bad_memberships:
                totals.violations += group.nodes
                _record_failure(
                    failures, "sos-a-history-membership", detail, group.nodes
                )

    return TheoremReport(
        theorem="sos-preservation",
        algorithm=base_alg.name,
        fd=fd.serialize(),
        k=None,
        bounds=bounds.to_dict(),
        families=families,
        checked_runs=checked_runs,
        checked_histories=checked_histories,
        failure_count=totals.violations,
        failures=failures[:MAX_RECORDED_FAILURES],
        decided_runs=totals.decided,
        undecided_runs=totals.undecided,
        thorough=thorough,
        elapsed_seconds=time.perf_counter() - t0,
    )


def verify_das(
    base_alg: Algorithm,
    interp: Interpretation,
    predicate: ProblemPredicate,
    k: int,
    bounds: EnumerationBounds,
    derived_interp: Interpretation | None = None,
    time_shift: bool = True,
    thorough: bool = False,
) -> TheoremReport:
    """Exhaustively check that the delay wrapper preserves the problem.

    Walks every run of the wrapped-then-delayed algorithm under the
    accurate-after-``k+1`` oracle within bounds and checks four clauses:

    a. dropping each process's leading no-op and moving every remaining step
       one time point earlier yields a structurally valid run of the wrapped
       algorithm;
    h. the shifted history is a safe member of the accurate-after-``k``
       class for the shifted pattern;
    c. the mapped run's observable sequence stutter-embeds into the wrapper
       run's observable sequence;
    d. problem satisfaction transfers along the mapping: a wrapper run whose
       mapped counterpart satisfies the problem satisfies it too (runs that
       merely ran out of horizon are tallied as undecided).

    ``time_shift=False`` skips the re-timing in both the mapping and the
    membership clause, demonstrating that the shift is what makes clause (h)
    hold.  ``thorough`` re-derives every node verdict from scratch.
    """
    t0 = time.perf_counter()
    interp.check_initial_cover(base_alg.initial_states)
    das_alg = delay_a_step(base_alg)
    v_tilde = (
        derived_interp
        if derived_interp is not None
        else derive_interpretation_das(interp, base_alg)
    )
    fd = FDSpec.accurate_after(k + 1)
    inits = bounds.inits if bounds.inits is not None else init_combinations(das_alg)
    families = _ensure_within_cap(bounds, len(inits))
    patterns = (
        bounds.patterns
        if bounds.patterns is not None
        else all_monotone_patterns(bounds.n, bounds.horizon)
    )
    use_monitor = type(predicate) in (ConsensusPredicate, StrongConsensusPredicate)
    strong = isinstance(predicate, StrongConsensusPredicate)

    totals = _WalkTotals()
    failures: list[ClauseFailure] = []
    checked_runs = 0
    checked_histories = 0
    delta_cache: dict = {}

    for pattern in patterns:
        mapped_pattern = shift_pattern(pattern) if time_shift else pattern
        for rep, members in history_groups(fd, pattern, bounds.history_budget):
            checked_histories += len(members)
            bad_memberships = []
            for h in members:
                mapped_h = shift_history(h) if time_shift else h
                verdict = history_in_pk(mapped_h, mapped_pattern, k)
                if not verdict.prefix_consistent:
                    v = verdict.violations[0]
                    bad_memberships.append(
                        f"mapped history breaks {v.condition} "
                        f"(observer {v.observer}, subject {v.subject}, t={v.time})"
                    )
            group = _WalkTotals()
            for init in inits:
                walker = _DasWalker(
                    base_alg,
                    interp,
                    k,
                    time_shift,
                    das_alg,
                    pattern,
                    rep,
                    init,
                    v_tilde,
                    predicate,
                    use_monitor,
                    strong,
                    bounds.max_steps,
                    failures,
                    members[0],
                    thorough,
                )
                walker.delta_cache = delta_cache
                walker.multiplier = len(members)
                for window_start in range(pattern.horizon + 1):
                    walker.walk_window(window_start, group)
            checked_runs += group.nodes * len(members)
            totals.add_scaled(group, len(members))
            for detail in bad_memberships:
                totals.violations += group.nodes
                _record_failure(failures, "das-h-history-membership", detail, group.nodes)

    return TheoremReport(
        theorem="das-preservation",
        algorithm=base_alg.name,
        fd=fd.serialize(),
        k=k,
        bounds=bounds.to_dict(),
        families=families,
        checked_runs=checked_runs,
        checked_histories=checked_histories,
        failure_count=totals.violations,
        failures=failures[:MAX_RECORDED_FAILURES],
        decided_runs=totals.decided,
        undecided_runs=totals.undecided,
        thorough=thorough,
        elapsed_seconds=time.perf_counter() - t0,
    )
