"""Tests for the FC and TSR strategies, built-in runs and plugin runs."""

import pytest
from pydantic import ValidationError

from planforge.config import BudgetPolicy, HeuristicMix, Limits
from planforge.heuristics import HeuristicSpec
from planforge.search import Outcome, SearchResult
from planforge.strategies import (RunOutcome, StrategyKind, _charge_overlap, _checked_outcome,
                                  AttemptRecord, run_builtin, run_fc, run_plugin, run_tsr)
from planforge.synthesis.config import LlmConfig, Provider
from planforge.synthesis.llm_client import LlmClient
from planforge.synthesis.models import Phase

from conftest import GOOD_COUNTERS, LLM_FIXTURES, SOURCES, load_fixture, write_schedule


def offline(root) -> LlmConfig:
    return LlmConfig(provider=Provider.OFFLINE_FIXTURES, fixtures_dir=root)


def budget(**kwargs) -> BudgetPolicy:
    kwargs.setdefault("strategize", False)
    kwargs.setdefault("total_seconds", 60)
    kwargs.setdefault("slice_seconds", 20)
    kwargs.setdefault("memory_bytes", 2 * 1024 ** 3)
    return BudgetPolicy(**kwargs)


class TestBudgetPolicy:
    def test_slice_cannot_exceed_total(self):
        with pytest.raises(ValidationError):
            BudgetPolicy(total_seconds=10, slice_seconds=20)

    def test_refined_mix_needs_refine(self):
        with pytest.raises(ValidationError):
            BudgetPolicy(heuristic_mix=HeuristicMix.BOTH)

    def test_refines_by_attempt(self):
        both = BudgetPolicy(refine=True, heuristic_mix=HeuristicMix.BOTH)
        assert [both.refines(k) for k in (1, 2, 3, 4)] == [False, True, False, True]
        assert BudgetPolicy(refine=True, heuristic_mix="refined").refines(1)
        assert not BudgetPolicy(refine=True).refines(2)

    @pytest.mark.parametrize("field", ["max_heuristics", "max_compile_retries"])
    def test_caps_are_positive(self, field):
        with pytest.raises(ValidationError):
            BudgetPolicy(**{field: 0})


class TestBuiltinRuns:
    def test_bfs(self):
        run = run_builtin(load_fixture("counters_n2"), HeuristicSpec.parse("blind"), "bfs",
                          Limits(wall_clock_seconds=10))
        assert run.solved and run.plan == ["inc c1"]
        assert run.strategy is StrategyKind.BUILTIN
        assert run.configuration == "bfs-blind"
        assert run.attempts == [] and run.input_tokens == 0

    def test_gbfs_hmd(self):
        run = run_builtin(load_fixture("counters_n3"), HeuristicSpec.parse("hmd"), "gbfs",
                          Limits(wall_clock_seconds=10), configuration="gbfs-hmd")
        assert run.solved and run.configuration == "gbfs-hmd"

    def test_unsolvable(self):
        run = run_builtin(load_fixture("pacman_unavoidable"), HeuristicSpec.parse("hmd"),
                          "gbfs", Limits(wall_clock_seconds=10))
        assert run.outcome is RunOutcome.EXHAUSTED and run.plan is None

    def test_rejects_plugin_and_unknown_algorithm(self):
        model = load_fixture("counters_n2")
        with pytest.raises(ValueError):
            run_builtin(model, HeuristicSpec.parse("plugin:h.py"), "gbfs", Limits())
        with pytest.raises(ValueError):
            run_builtin(model, HeuristicSpec.parse("hmd"), "astar", Limits())


def test_invalid_plan_is_caught():
    model = load_fixture("counters_n2")
    bogus = SearchResult(Outcome.SOLVED, ["inc c0"])
    assert _checked_outcome(model, bogus) is RunOutcome.INVALID_PLAN
    assert _checked_outcome(model, SearchResult(Outcome.SOLVED, ["inc c1"])) is RunOutcome.SOLVED
    assert _checked_outcome(model, SearchResult(Outcome.TIMED_OUT)) is RunOutcome.TIMED_OUT


def test_charge_overlap_scales_to_wait():
    record = AttemptRecord(attempt_index=2, phase=Phase.UNREFINED, api_seconds=3.0,
                           compile_seconds=1.0)
    _charge_overlap(record, 1.0)
    assert record.api_seconds == pytest.approx(0.75)
    assert record.compile_seconds == pytest.approx(0.25)
    assert record.prefetched


@pytest.mark.slow
class TestFirstCompilation:
    def test_retries_until_compiled(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["broken", "broken", "good"])
        run = run_fc(load_fixture("counters_n3"), offline(llm_root), budget(),
                     work_dir=tmp_path / "work")
        assert run.solved
        assert run.strategy is StrategyKind.FC
        assert len(run.attempts) == 3
        assert run.compile_failures == 2
        assert run.worker_runs == 1
        assert [a.compiled for a in run.attempts] == [False, False, True]

    def test_compile_exhausted(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["broken"] * 10)
        run = run_fc(load_fixture("counters_n3"), offline(llm_root),
                     budget(max_compile_retries=10), work_dir=tmp_path / "work")
        assert run.outcome is RunOutcome.COMPILE_EXHAUSTED
        assert len(run.attempts) == 10
        assert run.worker_runs == 0

    def test_no_code_block_counts_as_compile_failure(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["broken", "good"],
                       usage=[{"input_tokens": 50, "output_tokens": 5},
                              {"input_tokens": 60, "output_tokens": 6}])
        (llm_root / "counters" / "unrefined" / "1.md").write_text("Sorry, no code.",
                                                                  encoding="utf-8")
        run = run_fc(load_fixture("counters_n3"), offline(llm_root), budget(),
                     work_dir=tmp_path / "work")
        assert run.solved
        assert run.compile_failures == 1
        assert run.input_tokens == 110 and run.output_tokens == 11

    def test_searches_for_the_remaining_budget(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["looping"])
        run = run_fc(load_fixture("counters_n3"), offline(llm_root),
                     budget(total_seconds=4, slice_seconds=4), work_dir=tmp_path / "work")
        assert run.outcome is RunOutcome.TIMED_OUT
        assert run.worker_runs == 1
        assert run.wall_seconds <= 4 + 5

    def test_missing_fixture_is_synthesis_failure(self, llm_root, tmp_path):
        run = run_fc(load_fixture("counters_n3"), offline(llm_root), budget(),
                     work_dir=tmp_path / "work")
        assert run.outcome is RunOutcome.SYNTHESIS_FAILED
        assert run.attempts == []


@pytest.mark.slow
class TestTimeSlicedRestarts:
    def test_restarts_after_a_failed_slice(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["looping", "good"])
        run = run_tsr(load_fixture("counters_n3"), offline(llm_root),
                      budget(total_seconds=30, slice_seconds=3), work_dir=tmp_path / "work")
        assert run.solved
        assert run.strategy is StrategyKind.TSR
        assert [a.outcome for a in run.attempts] == ["TimedOut", "Solved"]
        assert run.attempts[0].search_seconds <= 3 + 1.5

    def test_stops_after_max_heuristics(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["looping"] * 6)
        run = run_tsr(load_fixture("counters_n3"), offline(llm_root),
                      budget(total_seconds=30, slice_seconds=2, max_heuristics=5),
                      work_dir=tmp_path / "work")
        assert not run.solved
        assert run.worker_runs == 5
        assert len(run.attempts) == 5
        assert run.wall_seconds <= 30 + 5

    def test_budget_runs_out(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["looping"] * 5)
        run = run_tsr(load_fixture("counters_n3"), offline(llm_root),
                      budget(total_seconds=5, slice_seconds=2, max_heuristics=5),
                      work_dir=tmp_path / "work")
        assert run.outcome is RunOutcome.BUDGET_EXHAUSTED
        assert run.worker_runs < 5
        assert run.wall_seconds <= 5 + 5

    def test_compile_failures_do_not_use_slots(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["broken", "wrong_signature", "good"])
        run = run_tsr(load_fixture("counters_n3"), offline(llm_root),
                      budget(max_heuristics=1), work_dir=tmp_path / "work")
        assert run.solved
        assert run.compile_failures == 2 and run.worker_runs == 1

    def test_compile_failures_are_capped(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["broken"] * 3)
        run = run_tsr(load_fixture("counters_n3"), offline(llm_root),
                      budget(max_compile_retries=3), work_dir=tmp_path / "work")
        assert run.outcome is RunOutcome.COMPILE_EXHAUSTED
        assert len(run.attempts) == 3

    def test_token_and_failure_accounting(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["broken", "good"],
                       usage=[{"input_tokens": 1000, "output_tokens": 100},
                              {"input_tokens": 3000, "output_tokens": 300}])
        run = run_tsr(load_fixture("counters_n3"), offline(llm_root), budget(),
                      work_dir=tmp_path / "work")
        assert run.solved
        assert (run.input_tokens, run.output_tokens) == (4000, 400)
        assert [a.input_tokens for a in run.attempts] == [1000, 3000]
        assert run.compile_seconds == pytest.approx(sum(a.compile_seconds for a in run.attempts))
        assert run.search_seconds > 0.0

    def test_alternating_heuristic_mix(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["looping", "looping"])
        write_schedule(llm_root, "counters", ["looping", "good"], phase="refined")
        run = run_tsr(load_fixture("counters_n3"), offline(llm_root),
                      budget(total_seconds=30, slice_seconds=2, refine=True,
                             heuristic_mix=HeuristicMix.BOTH),
                      work_dir=tmp_path / "work")
        assert run.solved
        assert [a.phase for a in run.attempts] == [Phase.UNREFINED, Phase.REFINED]

    def test_prefetch_overlaps_next_request(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["looping", "good"])
        run = run_tsr(load_fixture("counters_n3"), offline(llm_root),
                      budget(total_seconds=30, slice_seconds=2, prefetch=True),
                      work_dir=tmp_path / "work")
        assert run.solved
        assert not run.attempts[0].prefetched
        assert run.attempts[1].prefetched

    def test_unused_prefetch_is_accounted(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["good", "good"],
                       usage=[{"input_tokens": 1000, "output_tokens": 100},
                              {"input_tokens": 3000, "output_tokens": 300}])
        run = run_tsr(load_fixture("counters_n3"), offline(llm_root),
                      budget(total_seconds=30, slice_seconds=10, prefetch=True),
                      work_dir=tmp_path / "work")
        assert run.solved
        assert run.worker_runs == 1
        assert len(run.attempts) == 2
        unused = run.attempts[1]
        assert unused.outcome is None and unused.prefetched and unused.compiled
        assert (run.input_tokens, run.output_tokens) == (4000, 400)
        assert run.input_tokens == sum(a.input_tokens for a in run.attempts)

    def test_no_prefetch_without_time_for_another_slice(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["good", "good"])
        run = run_tsr(load_fixture("counters_n3"), offline(llm_root),
                      budget(total_seconds=10, slice_seconds=10, prefetch=True),
                      work_dir=tmp_path / "work")
        assert run.solved
        assert len(run.attempts) == 1
        assert list((tmp_path / "work").rglob("attempt-2-*")) == []

    def test_offline_runs_are_reproducible(self, llm_root, tmp_path):
        write_schedule(llm_root, "counters", ["broken", "good"],
                       usage=[{"input_tokens": 11, "output_tokens": 1}, None])
        runs = [run_tsr(load_fixture("counters_n3"), offline(llm_root), budget(),
                        work_dir=tmp_path / f"work{i}") for i in range(2)]
        first, second = runs
        assert first.plan == second.plan
        assert [(a.outcome, a.compiled, a.input_tokens, a.diagnostics != "")
                for a in first.attempts] == [(a.outcome, a.compiled, a.input_tokens,
                                              a.diagnostics != "") for a in second.attempts]

    def test_domain_phases_cached_across_instances(self, tmp_path):
        config = offline(LLM_FIXTURES)
        policy = budget(strategize=True, refine=True, heuristic_mix=HeuristicMix.REFINED,
                        cache_domain_phases=True, max_heuristics=1)
        client = LlmClient(config, cache_domain_phases=True)
        first = run_tsr(load_fixture("counters_n2"), config, policy, client=client,
                        work_dir=tmp_path / "a")
        second = run_tsr(load_fixture("counters_n3"), config, policy, client=client,
                         work_dir=tmp_path / "b")
        assert first.solved and second.solved
        assert first.input_tokens == 1830 + 2410 + 2870
        assert second.input_tokens == 2870


@pytest.mark.slow
class TestPluginRuns:
    def test_plugin_solves(self, tmp_path):
        source = tmp_path / "h.py"
        source.write_text(GOOD_COUNTERS, encoding="utf-8")
        run = run_plugin(load_fixture("counters_n3"), source, "gbfs",
                         Limits(wall_clock_seconds=20), work_dir=tmp_path / "work")
        assert run.solved
        assert run.strategy is StrategyKind.PLUGIN

    def test_broken_plugin(self, tmp_path):
        source = tmp_path / "h.py"
        source.write_text(SOURCES["broken"], encoding="utf-8")
        run = run_plugin(load_fixture("counters_n3"), source, "gbfs",
                         Limits(wall_clock_seconds=20), work_dir=tmp_path / "work")
        assert run.outcome is RunOutcome.COMPILE_EXHAUSTED
        assert run.compile_failures == 1


@pytest.mark.parametrize("strategy", [run_fc, run_tsr])
def test_answered_phases_count_when_a_later_phase_fails(strategy, llm_root, tmp_path):
    write_schedule(llm_root, "counters", ["good"],
                   usage=[{"input_tokens": 500, "output_tokens": 50}])
    run = strategy(load_fixture("counters_n3"), offline(llm_root),
                   budget(refine=True, heuristic_mix=HeuristicMix.REFINED),
                   work_dir=tmp_path / "work")
    assert run.outcome is RunOutcome.SYNTHESIS_FAILED
    assert run.attempts == []
    assert (run.input_tokens, run.output_tokens) == (500, 50)
