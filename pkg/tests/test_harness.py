"""Unit tests for the exhaustive enumeration and checking harness."""

from __future__ import annotations

import pytest

from fdlab import (
    DEFAULT_RUN_CAP,
    EnumerationBounds,
    FDSpec,
    StrongConsensusPredicate,
    ValidationMode,
    builtin_algorithm,
    check_solves,
    counterexample_probe,
    enumerate_runs,
    interpret_run,
    validate_run,
    verify_das,
    verify_sos,
)
from fdlab.detectors import perturbed_histories
from fdlab.errors import BudgetExceeded, DomainMismatch
from fdlab.harness import (
    RUN_CAP_ENV_VAR,
    all_monotone_patterns,
    estimate_run_families,
    history_groups,
    init_combinations,
)
from fdlab.traces import canonical_json, run_from_doc

ALG, INTERP, PREDICATE = builtin_algorithm("flood-consensus-p", 2)
FD = FDSpec.always_accurate()


class TestBounds:
    def test_rejects_impossible_shapes(self) -> None:
        with pytest.raises(DomainMismatch):
            EnumerationBounds(n=0, horizon=2, max_steps=2)
        with pytest.raises(DomainMismatch):
            EnumerationBounds(n=2, horizon=-1, max_steps=2)
        with pytest.raises(DomainMismatch):
            EnumerationBounds(n=2, horizon=2, max_steps=-1)
        with pytest.raises(DomainMismatch):
            EnumerationBounds(n=2, horizon=2, max_steps=2, history_budget=-1)

    def test_cap_resolution_order(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Explicit cap beats the environment, which beats the default."""
        bounds = EnumerationBounds(n=2, horizon=2, max_steps=2)
        monkeypatch.delenv(RUN_CAP_ENV_VAR, raising=False)
        assert bounds.resolved_cap() == DEFAULT_RUN_CAP
        monkeypatch.setenv(RUN_CAP_ENV_VAR, "123")
        assert bounds.resolved_cap() == 123
        capped = EnumerationBounds(n=2, horizon=2, max_steps=2, run_cap=7)
        assert capped.resolved_cap() == 7

    def test_dict_form_reports_the_resolved_cap(self) -> None:
        bounds = EnumerationBounds(n=2, horizon=3, max_steps=4, run_cap=99)
        d = bounds.to_dict()
        assert d["run_cap"] == 99
        assert d["mode"] == "prefix-consistent"
        assert d["patterns"] is None


class TestUniverses:
    def test_monotone_pattern_count(self) -> None:
        """One crash time (or never) per process: (horizon + 2) ** n."""
        assert len(all_monotone_patterns(2, 3)) == 25
        assert len(all_monotone_patterns(3, 1)) == 27

    def test_patterns_are_monotone_and_start_crash_free(self) -> None:
        patterns = all_monotone_patterns(2, 3)
        assert patterns[0].crashed_at(3) == frozenset()
        for f in patterns:
            for t in range(3):
                assert f.crashed_at(t) <= f.crashed_at(t + 1)

    def test_init_combinations_cover_the_product(self) -> None:
        combos = init_combinations(ALG)
        assert len(combos) == 4
        assert len({tuple(s.value for s in c) for c in combos}) == 4

    def test_family_estimate_matches_the_closed_form(self) -> None:
        b0 = EnumerationBounds(n=2, horizon=3, max_steps=4)
        assert estimate_run_families(b0, inits_count=4) == 25 * 1 * 4
        b1 = EnumerationBounds(n=2, horizon=3, max_steps=4, history_budget=1)
        cells, alternatives = 2 * 4, 2**2 - 1
        assert estimate_run_families(b1, inits_count=4) == 25 * (1 + cells * alternatives) * 4

    def test_estimate_dominates_reality(self) -> None:
        """The a-priori bound is an upper bound on actual families."""
        bounds = EnumerationBounds(n=2, horizon=2, max_steps=2, history_budget=1)
        actual = sum(
            len(perturbed_histories(FD, f, 1)) * 4
            for f in all_monotone_patterns(2, 2)
        )
        assert actual <= estimate_run_families(bounds, inits_count=4)


class TestHistoryGroups:
    def test_members_partition_the_budgeted_histories(self) -> None:
        for pattern in all_monotone_patterns(2, 2):
            groups = history_groups(FD, pattern, 1)
            members = [h for _, group in groups for h in group]
            assert len(members) == len(perturbed_histories(FD, pattern, 1))
            assert len({id(h) for h in members}) == len(members)

    def test_members_agree_wherever_someone_is_alive(self) -> None:
        for pattern in all_monotone_patterns(2, 2):
            for rep, group in history_groups(FD, pattern, 1):
                assert rep is group[0]
                for h in group:
                    for t in range(pattern.horizon + 1):
                        for p in pattern.live_at(t):
                            assert h.at(p, t) == rep.at(p, t)


class TestEnumerateRuns:
    BOUNDS = EnumerationBounds(n=2, horizon=3, max_steps=3)

    def test_process_count_must_match(self) -> None:
        alg3, _, _ = builtin_algorithm("flood-consensus-p", 3)
        with pytest.raises(DomainMismatch):
            next(enumerate_runs(alg3, FD, self.BOUNDS))

    def test_cap_refuses_before_any_work(self) -> None:
        bounds = EnumerationBounds(n=2, horizon=3, max_steps=3, run_cap=10)
        with pytest.raises(BudgetExceeded, match="exceed the cap of 10"):
            next(enumerate_runs(ALG, FD, bounds))

    def test_deterministic_order(self) -> None:
        first = list(enumerate_runs(ALG, FD, self.BOUNDS))
        second = list(enumerate_runs(ALG, FD, self.BOUNDS))
        assert first == second

    def test_every_enumerated_run_validates(self) -> None:
        runs = list(enumerate_runs(ALG, FD, self.BOUNDS))
        assert len(runs) > 1000
        for run in runs[::17]:
            assert validate_run(run, ALG, FD, self.BOUNDS.mode).valid

    def test_empty_run_appears_once_per_family(self) -> None:
        runs = list(enumerate_runs(ALG, FD, self.BOUNDS))
        empties = [r for r in runs if not r.schedule]
        assert len(empties) == 25 * 1 * 4
        assert len(set(empties)) == len(empties)

    def test_strict_fairness_filters_a_subset(self) -> None:
        strict = EnumerationBounds(
            n=2, horizon=3, max_steps=3, mode=ValidationMode.STRICT_FAIRNESS
        )
        lax_runs = set(enumerate_runs(ALG, FD, self.BOUNDS))
        strict_runs = set(enumerate_runs(ALG, FD, strict))
        assert strict_runs < lax_runs
        for run in strict_runs:
            assert validate_run(run, ALG, FD, ValidationMode.STRICT_FAIRNESS).valid


class TestCheckSolves:
    BOUNDS = EnumerationBounds(n=2, horizon=3, max_steps=3)

    def test_flood_solves_consensus_under_always_accurate(self) -> None:
        report = check_solves(ALG, FD, INTERP, PREDICATE, self.BOUNDS)
        assert report.solves
        assert report.violation_count == 0
        assert report.counterexample is None
        assert report.checked_runs == report.decided_runs + report.undecided_runs
        assert report.checked_runs > 0

    def test_quiescence_turns_timeouts_into_violations(self) -> None:
        lax = check_solves(ALG, FD, INTERP, PREDICATE, self.BOUNDS)
        strict = check_solves(
            ALG, FD, INTERP, PREDICATE, self.BOUNDS, require_quiescence=True
        )
        assert lax.undecided_runs > 0
        assert not strict.solves
        assert strict.violation_count == lax.undecided_runs
        assert strict.counterexample is not None
        reparsed = run_from_doc(strict.counterexample, ALG)
        assert validate_run(reparsed, ALG, FD).valid

    def test_report_dict_shape(self) -> None:
        d = check_solves(ALG, FD, INTERP, PREDICATE, self.BOUNDS).to_dict()
        assert d["schema"] == "report.v1"
        assert d["kind"] == "solves"
        assert d["fd"] == "P"
        assert d["bounds"]["mode"] == "strict-fairness"
        assert canonical_json(d)


class TestCounterexampleProbe:
    def test_flood_breaks_strong_anchoring(self) -> None:
        """The minimum rule can decide a crashed process's value, which the
        anchored predicate forbids; the probe materializes such a run."""
        bounds = EnumerationBounds(n=2, horizon=2, max_steps=3)
        report = counterexample_probe(
            ALG, FD, INTERP, StrongConsensusPredicate(), bounds
        )
        assert report.found
        assert report.run is not None
        assert validate_run(report.run, ALG, FD, ValidationMode.STRICT_FAIRNESS).valid
        w = interpret_run(report.run, INTERP)
        assert not StrongConsensusPredicate().evaluate(w, report.run.pattern)
        assert not StrongConsensusPredicate().undecided(w, report.run.pattern)

    def test_probe_reports_absence(self) -> None:
        bounds = EnumerationBounds(n=2, horizon=2, max_steps=3)
        report = counterexample_probe(ALG, FD, INTERP, PREDICATE, bounds)
        assert not report.found
        assert report.run is None
        assert "no violation" in report.detail
        assert report.checked_runs > 0


class TestTheoremChecks:
    BOUNDS = EnumerationBounds(n=2, horizon=3, max_steps=3, history_budget=1)

    @pytest.mark.parametrize("name", ["flood-consensus-p", "strong-consensus-m"])
    def test_stall_preservation_fast_equals_thorough(self, name: str) -> None:
        """The memoized pass and the from-scratch pass agree exactly."""
        alg, interp, predicate = builtin_algorithm(name, 2)
        fast = verify_sos(alg, interp, predicate, self.BOUNDS)
        slow = verify_sos(alg, interp, predicate, self.BOUNDS, thorough=True)
        assert fast.ok and slow.ok
        for field in ("checked_runs", "checked_histories", "failure_count",
                      "decided_runs", "undecided_runs", "families"):
            assert getattr(fast, field) == getattr(slow, field), field

    @pytest.mark.parametrize("name", ["flood-consensus-p", "strong-consensus-m"])
    def test_delay_preservation_fast_equals_thorough(self, name: str) -> None:
        alg, interp, predicate = builtin_algorithm(name, 2)
        fast = verify_das(alg, interp, predicate, 0, self.BOUNDS)
        slow = verify_das(alg, interp, predicate, 0, self.BOUNDS, thorough=True)
        assert fast.ok and slow.ok
        for field in ("checked_runs", "checked_histories", "failure_count",
                      "decided_runs", "undecided_runs", "families"):
            assert getattr(fast, field) == getattr(slow, field), field

    def test_theorem_report_dict_shape(self) -> None:
        report = verify_sos(ALG, INTERP, PREDICATE, self.BOUNDS)
        d = report.to_dict()
        assert d["schema"] == "report.v1"
        assert d["kind"] == "theorem"
        assert d["theorem"] == "sos-preservation"
        assert d["fd"] == "M"
        assert d["failures"] == []
        assert len(d["canonicalizations"]) == 2
        assert canonical_json(d)

    def test_delay_report_names_the_shifted_oracle(self) -> None:
        report = verify_das(ALG, INTERP, PREDICATE, 1, self.BOUNDS)
        assert report.ok
        assert report.k == 1
        assert report.fd == "Pk:2"
