"""Tests for plan replay, plan files and validator soundness under plan mutations."""

import json

import numpy as np
import pytest

from planforge.config import Limits
from planforge.errors import SchemaViolation
from planforge.search import bfs
from planforge.validator import (NOT_APPLICABLE, Verdict, load_plan, plan_document,
                                 save_plan, validate)

from conftest import counters, load_fixture


def test_valid_plan():
    report = validate(load_fixture("counters_n2"), ["inc c1"])
    assert report.verdict is Verdict.VALID
    assert len(report.trace) == 2
    assert str(report) == "Valid"


def test_inapplicable_step():
    report = validate(load_fixture("counters_n2"), ["dec c0"])
    assert report.verdict is Verdict.INVALID_STEP
    assert report.step == 0
    assert report.reason == NOT_APPLICABLE
    assert str(report) == "InvalidStep(0, 'action not applicable')"


def test_unknown_label_is_invalid_step():
    report = validate(load_fixture("counters_n2"), ["inc c1", "jump"])
    assert report.verdict is Verdict.INVALID_STEP
    assert report.step == 1
    assert len(report.trace) == 2


def test_goal_unsatisfied():
    report = validate(load_fixture("counters_n2"), ["inc c0", "inc c1"])
    assert report.verdict is Verdict.GOAL_UNSATISFIED
    assert len(report.trace) == 3


def test_empty_plan_on_goal_state():
    assert validate(counters(2, 3, values=[0, 1]), []).valid


def test_dead_pacman_cannot_move():
    model = load_fixture("pacman_unavoidable")
    report = validate(model, ["E", "W"])
    assert report.verdict is Verdict.INVALID_STEP
    assert report.step == 1


def test_plan_file_round_trip(tmp_path):
    model = load_fixture("counters_n2")
    path = save_plan(tmp_path / "plans" / "p.json", model, ["inc c1"])
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc == plan_document(model, ["inc c1"])
    assert doc["domain"] == "counters"
    assert load_plan(path) == ["inc c1"]


def test_load_bare_list(tmp_path):
    path = tmp_path / "plan.json"
    path.write_text('["inc c1"]', encoding="utf-8")
    assert load_plan(path) == ["inc c1"]


@pytest.mark.parametrize("content", ['{"plan": "inc c1"}', '{"plan": [1]}', "{oops", '{}'])
def test_load_rejects_malformed(tmp_path, content):
    path = tmp_path / "plan.json"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(SchemaViolation):
        load_plan(path)


def _replays_to_goal(model, plan):
    """Independent replay by successor labels."""
    state = model.initial
    for label in plan:
        by_label = {t.action_label: t.successor for t in model.successors(state)}
        if label not in by_label:
            return False
        state = by_label[label]
    return model.goal_test(state)


def _mutations(plan, rng):
    i = int(rng.integers(len(plan)))
    yield plan[:i] + plan[i + 1:]
    yield plan[:i + 1] + plan[i:]
    j = int(rng.integers(len(plan)))
    swapped = list(plan)
    swapped[i], swapped[j] = swapped[j], swapped[i]
    yield swapped


@pytest.mark.parametrize("name", ["counters_n3", "fo_counters_n3", "pacman_5x5"])
def test_mutated_plans_agree_with_replay(name):
    model = load_fixture(name)
    result = bfs(model, Limits(wall_clock_seconds=60))
    assert result.solved and len(result.plan) >= 2
    plan = result.plan
    assert validate(model, plan).valid

    rng = np.random.default_rng(5)
    rejected = 0
    for _ in range(40):
        for mutated in _mutations(plan, rng):
            report = validate(model, mutated)
            assert report.valid == _replays_to_goal(model, mutated)
            if len(mutated) < len(plan):
                # a shorter plan would contradict BFS optimality
                assert not report.valid
            rejected += not report.valid
    assert rejected > 0
