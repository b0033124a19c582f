"""Whole-run validation against an algorithm, an oracle class, and a pattern.

Two validation modes exist.  ``PREFIX_CONSISTENT`` checks every safety
condition: crashed processes take no steps, oracle outputs match the history,
messages are received at most once and only after being sent, states chain
correctly, every step is an actual transition of the algorithm, and the
history is a safe member of the oracle class.  ``STRICT_FAIRNESS``
additionally demands the liveness debts a finite run can discharge: every
message addressed to a surviving process is received within the run, and
every surviving process steps at least once in every time window of the
configured length.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .detectors import FDSpec, history_matches
from .errors import DomainMismatch
from .model import Algorithm, Message, Run

__all__ = [
    "ValidationMode",
    "RunViolation",
    "ValidityReport",
    "validate_run",
]


class ValidationMode(enum.Enum):
    """How much a finite run is required to prove about liveness."""

    PREFIX_CONSISTENT = "prefix-consistent"
    STRICT_FAIRNESS = "strict-fairness"


@dataclass(frozen=True)
class RunViolation:
    """One broken validity condition, tied to a step where applicable."""

    condition: str
    step_index: int | None
    detail: str

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "step_index": self.step_index,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    violations: tuple[RunViolation, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [v.to_dict() for v in self.violations],
        }


def validate_run(
    run: Run,
    alg: Algorithm,
    fd: FDSpec,
    mode: ValidationMode = ValidationMode.PREFIX_CONSISTENT,
    fairness_window: int | None = None,
) -> ValidityReport:
    """Check every validity condition and report all violations found.

    Raises :class:`DomainMismatch` if the run and the algorithm disagree on
    the process set; everything else is reported, not raised.
    """
    if alg.n != run.n:
        raise DomainMismatch(f"algorithm is over {alg.n} processes, run over {run.n}")
    violations: list[RunViolation] = []
    horizon = run.horizon

    previous_time: int | None = None
    for index, t in enumerate(run.times):
        if not 0 <= t <= horizon:
            violations.append(
                RunViolation("time-range", index, f"time {t} outside 0..{horizon}")
            )
        if previous_time is not None and t <= previous_time:
            violations.append(
                RunViolation(
                    "time-order", index, f"time {t} does not increase past {previous_time}"
                )
            )
        previous_time = t

    current = {p: run.init[p] for p in range(run.n)}
    stepped: set[int] = set()
    sent_messages: dict[Message, int] = {}
    consumed: set[Message] = set()
    used_tags: set[int] = set()

    for index, (step, t) in enumerate(zip(run.schedule, run.times)):
        p = step.actor
        if not 0 <= p < run.n:
            violations.append(RunViolation("actor-range", index, f"no process {p}"))
            continue
        if 0 <= t <= horizon and p in run.pattern.crashed_at(t):
            violations.append(
                RunViolation("actor-crashed", index, f"process {p} is crashed at time {t}")
            )
        if 0 <= t <= horizon and step.suspects != run.history.at(p, t):
            violations.append(
                RunViolation(
                    "oracle-mismatch",
                    index,
                    f"step reads {sorted(step.suspects)}, history cell ({p}, {t}) is "
                    f"{sorted(run.history.at(p, t))}",
                )
            )
        if step.received is not None:
            m = step.received
            if m.receiver != p:
                violations.append(
                    RunViolation(
                        "misdelivered-receive",
                        index,
                        f"process {p} receives a message addressed to {m.receiver}",
                    )
                )
            if m not in sent_messages or sent_messages[m] >= index:
                violations.append(
                    RunViolation("spurious-receive", index, f"{m} was never sent earlier")
                )
            elif m in consumed:
                violations.append(
                    RunViolation("duplicate-receive", index, f"{m} was already received")
                )
            consumed.add(m)
        expected_pre = current[p]
        if step.pre != expected_pre:
            condition = "state-discontinuity" if p in stepped else "initial-state-mismatch"
            violations.append(
                RunViolation(
                    condition,
                    index,
                    f"process {p} is in {expected_pre!r}, step expects {step.pre!r}",
                )
            )
        result = alg.transition(p, step.pre, step.received_transmission(), step.suspects)
        if result is None:
            violations.append(
                RunViolation(
                    "no-such-transition",
                    index,
                    f"algorithm has no step from {step.pre!r} with this receipt and oracle output",
                )
            )
        elif result != (step.post, step.sent_transmission()):
            violations.append(
                RunViolation(
                    "transition-mismatch",
                    index,
                    f"algorithm prescribes {result!r}, step records "
                    f"{(step.post, step.sent_transmission())!r}",
                )
            )
        if step.sent is not None:
            m = step.sent
            if m.sender != p:
                violations.append(
                    RunViolation(
                        "sender-mismatch", index, f"process {p} sends on behalf of {m.sender}"
                    )
                )
            if m.tag in used_tags:
                violations.append(
                    RunViolation("duplicate-tag", index, f"message tag {m.tag} reused")
                )
            used_tags.add(m.tag)
            sent_messages[m] = index
        current[p] = step.post
        stepped.add(p)

    membership = history_matches(fd, run.history, run.pattern)
    if not membership.prefix_consistent:
        for v in membership.violations:
            violations.append(
                RunViolation(
                    "history-membership",
                    None,
                    f"{v.condition}: observer {v.observer} about {v.subject} at time {v.time}",
                )
            )

    if mode is ValidationMode.STRICT_FAIRNESS:
        correct = run.pattern.correct()
        undelivered = [
            m
            for m in sorted(sent_messages, key=lambda m: m.tag)
            if m not in consumed and m.receiver in correct
        ]
        for m in undelivered:
            violations.append(
                RunViolation(
                    "undelivered-message",
                    None,
                    f"message {m.tag} to surviving process {m.receiver} never received",
                )
            )
        window = fairness_window if fairness_window is not None else horizon + 1
        if window < 1:
            raise DomainMismatch(f"fairness window must be positive, got {window}")
        for p in sorted(correct):
            gaps = _step_gaps(
                [t for step, t in zip(run.schedule, run.times) if step.actor == p], horizon
            )
            if gaps >= window:
                violations.append(
                    RunViolation(
                        "fairness-gap",
                        None,
                        f"surviving process {p} has a {gaps}-point stretch without a step "
                        f"(window {window})",
                    )
                )

    return ValidityReport(valid=not violations, violations=tuple(violations))


def _step_gaps(step_times: list[int], horizon: int) -> int:
    """Length of the longest stretch of time points without a step."""
    longest = 0
    previous = -1
    for t in step_times + [horizon + 1]:
        longest = max(longest, t - previous - 1)
        previous = t
    return longest
