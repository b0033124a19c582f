"""Wrapper algorithms and their run mappings."""

from __future__ import annotations

import pytest

from fdlab import (
    DelayState,
    EnumerationBounds,
    FaultyStepPresent,
    FDSpec,
    MissingNoOpPrefix,
    NonPositiveTime,
    NotSoSRun,
    StallState,
    builtin_algorithm,
    das_run_mapping,
    delay_a_step,
    derive_interpretation_das,
    derive_interpretation_sos,
    enumerate_runs,
    stall_on_suspect,
    strip_faulty_steps,
    to_initial_crash_run,
    validate_run,
)

BASE, INTERP, _ = builtin_algorithm("flood-consensus-p", 2)


class TestStallWrapper:
    def setup_method(self) -> None:
        self.wrapped = stall_on_suspect(BASE)
        self.q = BASE.initial_states(0)[0]

    def test_self_suspicion_in_an_initial_state_stalls(self) -> None:
        post, sent = self.wrapped.transition(0, self.q, None, frozenset({0}))
        assert post == StallState(self.q)
        assert sent is None

    def test_stall_state_is_absorbing_and_silent(self) -> None:
        stalled = StallState(self.q)
        for suspects in (frozenset(), frozenset({0, 1})):
            post, sent = self.wrapped.transition(0, stalled, None, suspects)
            assert post == stalled and sent is None

    def test_stalling_step_refuses_receipts(self) -> None:
        assert self.wrapped.transition(0, self.q, (1, "0"), frozenset({0})) is None

    def test_other_behavior_is_the_base_behavior(self) -> None:
        assert self.wrapped.transition(0, self.q, None, frozenset({1})) == BASE.transition(
            0, self.q, None, frozenset({1})
        )

    def test_non_initial_self_suspicion_does_not_stall(self) -> None:
        post, _ = BASE.transition(0, self.q, None, frozenset())
        assert self.wrapped.transition(0, post, None, frozenset({0})) == BASE.transition(
            0, post, None, frozenset({0})
        )

    def test_state_text_round_trip(self) -> None:
        stalled = StallState(self.q)
        text = self.wrapped.state_str(stalled)
        assert text.startswith("stall(")
        assert self.wrapped.parse_state(text) == stalled
        assert self.wrapped.parse_state(self.wrapped.state_str(self.q)) == self.q


class TestDelayWrapper:
    def setup_method(self) -> None:
        self.wrapped = delay_a_step(BASE)
        self.q = BASE.initial_states(0)[0]

    def test_initials_are_delayed(self) -> None:
        assert self.wrapped.initial_states(0) == tuple(
            DelayState(q) for q in BASE.initial_states(0)
        )

    def test_first_step_is_a_silent_unwrap(self) -> None:
        post, sent = self.wrapped.transition(0, DelayState(self.q), None, frozenset({1}))
        assert post == self.q and sent is None

    def test_delay_state_refuses_receipts(self) -> None:
        assert self.wrapped.transition(0, DelayState(self.q), (1, "0"), frozenset()) is None

    def test_nested_wrapping_composes_textually(self) -> None:
        double = delay_a_step(self.wrapped)
        q = double.initial_states(0)[0]
        text = double.state_str(q)
        assert text == f"delay(delay({BASE.state_str(self.q)}))"
        assert double.parse_state(text) == q


class TestDerivedInterpretations:
    def test_stall_states_show_their_frozen_letter(self) -> None:
        derived = derive_interpretation_sos(INTERP, BASE)
        for i in range(2):
            for q in BASE.initial_states(i):
                assert derived.of(i, StallState(q)) == INTERP.of(i, q)
                assert derived.of(i, q) == INTERP.of(i, q)

    def test_delay_states_show_their_held_letter(self) -> None:
        derived = derive_interpretation_das(INTERP, BASE)
        for i in range(2):
            for q in BASE.initial_states(i):
                assert derived.of(i, DelayState(q)) == INTERP.of(i, q)


def wrapper_runs(alg, fd: FDSpec, bounds: EnumerationBounds):
    return enumerate_runs(alg, fd, bounds)


class TestStripAndRehome:
    BOUNDS = EnumerationBounds(n=2, horizon=3, max_steps=3, history_budget=0)

    def test_stripping_drops_exactly_the_faulty_steps(self) -> None:
        wrapped = stall_on_suspect(BASE)
        fd = FDSpec.foresight()
        seen_nontrivial = 0
        for run in wrapper_runs(wrapped, fd, self.BOUNDS):
            faulty = run.pattern.faulty()
            stripped = strip_faulty_steps(run)
            assert all(s.actor not in faulty for s in stripped.schedule)
            kept = [s for s in run.schedule if s.actor not in faulty]
            assert list(stripped.schedule) == kept
            if len(kept) != len(run.schedule):
                seen_nontrivial += 1
        assert seen_nontrivial > 0

    def test_stripping_refuses_sending_faulty_steps(self) -> None:
        fd = FDSpec.always_accurate()
        for run in enumerate_runs(BASE, fd, self.BOUNDS):
            faulty = run.pattern.faulty()
            if any(s.actor in faulty and s.sent is not None for s in run.schedule):
                with pytest.raises(NotSoSRun):
                    strip_faulty_steps(run)
                break
        else:
            raise AssertionError("expected a run with a sending faulty step")

    def test_rehoming_requires_silent_faulty_processes(self) -> None:
        fd = FDSpec.always_accurate()
        for run in enumerate_runs(BASE, fd, self.BOUNDS):
            if any(s.actor in run.pattern.faulty() for s in run.schedule):
                with pytest.raises(FaultyStepPresent):
                    to_initial_crash_run(run)
                break
        else:
            raise AssertionError("expected a run with a faulty step")

    def test_rehomed_pattern_front_loads_the_faults(self) -> None:
        wrapped = stall_on_suspect(BASE)
        fd = FDSpec.foresight()
        for run in wrapper_runs(wrapped, fd, self.BOUNDS):
            if not run.pattern.faulty():
                continue
            rehomed = to_initial_crash_run(strip_faulty_steps(run))
            assert rehomed.pattern.crashed_at(0) == run.pattern.faulty()
            assert rehomed.init == run.init
            break
        else:
            raise AssertionError("expected a run with faults")


class TestDasRunMapping:
    BOUNDS = EnumerationBounds(n=2, horizon=3, max_steps=3, history_budget=0)

    def test_mapping_unwraps_and_shifts(self) -> None:
        wrapped = delay_a_step(BASE)
        fd = FDSpec.accurate_after(1)
        checked = 0
        for run in enumerate_runs(wrapped, fd, self.BOUNDS):
            try:
                mapped = das_run_mapping(run)
            except NonPositiveTime:
                continue
            assert mapped.init == tuple(s.base for s in run.init)
            noops = sum(
                1 for s in run.schedule if isinstance(s.pre, DelayState)
            )
            assert len(mapped.schedule) == len(run.schedule) - noops
            report = validate_run(mapped, BASE, FDSpec.accurate_after(0))
            assert report.valid, report.violations
            checked += 1
            if checked >= 200:
                break
        assert checked >= 50

    def test_mapping_requires_the_noop_prefix(self) -> None:
        fd = FDSpec.always_accurate()
        run = next(iter(enumerate_runs(BASE, fd, self.BOUNDS)))
        with pytest.raises(MissingNoOpPrefix):
            das_run_mapping(run)

    def test_steps_at_time_zero_cannot_shift(self) -> None:
        # only reachable on hand-built runs: in a valid run a real step always
        # sits after the no-op, hence at time >= 1
        from fdlab import FailurePattern, History, Run, Step

        base, _, _ = builtin_algorithm("flood-consensus-p", 1)
        wrapped = delay_a_step(base)
        q = base.initial_states(0)[0]
        d = DelayState(q)
        noop = Step(0, d, None, frozenset(), q, None)
        post, sent = base.transition(0, q, None, frozenset())
        assert sent is None
        real = Step(0, q, None, frozenset(), post, None)
        run = Run(
            FailurePattern.from_crash_times(1, 1, {}),
            History.from_function(1, 1, lambda p, t: frozenset()),
            (d,),
            (noop, real),
            (0, 0),
        )
        with pytest.raises(NonPositiveTime):
            das_run_mapping(run)

    def test_no_shift_keeps_times_and_context(self) -> None:
        wrapped = delay_a_step(BASE)
        fd = FDSpec.accurate_after(0)
        for run in enumerate_runs(wrapped, fd, self.BOUNDS):
            if len(run.schedule) >= 2 and not isinstance(run.schedule[-1].pre, DelayState):
                mapped = das_run_mapping(run, time_shift=False)
                kept = [s for s in run.schedule if not isinstance(s.pre, DelayState)]
                assert list(mapped.schedule) == kept
                assert mapped.pattern == run.pattern
                assert mapped.history == run.history
                return
        raise AssertionError("expected a suitable wrapper run")
