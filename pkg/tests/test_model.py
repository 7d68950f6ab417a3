"""Tests for the expression language, goal conditions and instance loading."""

import json
import operator
from fractions import Fraction

import numpy as np
import pytest

from planforge.errors import DivisionByZero, SchemaViolation, UnboundVariable, UnknownDomain
from planforge.model import (Comparator, Const, Div, NumericCondition, PropCondition, Sub,
                             Var, check_condition, eval_expr, fold_constants, load_instance,
                             load_instance_file, normalize_condition, parse_condition,
                             parse_expr, state_digest)
from planforge.domains import CountersState, default_registry

from conftest import INSTANCES, counters


class TestExpressions:
    def test_parse_and_evaluate(self):
        expr = parse_expr("c0 + 2 * (c1 - 1) / 4")
        assert expr.evaluate({"c0": 1, "c1": 5}) == pytest.approx(3.0)

    def test_unary_minus(self):
        assert parse_expr("-c0").evaluate({"c0": 3}) == -3.0
        assert parse_expr("-4") == Const(-4.0)

    def test_unknown_variable(self):
        with pytest.raises(UnboundVariable) as exc:
            eval_expr(parse_expr("c0 + c9"), CountersState((1, 2)))
        assert exc.value.name == "c9"

    def test_division_by_zero(self):
        expr = Div(Var("c0"), Var("c1"))
        with pytest.raises(DivisionByZero):
            eval_expr(expr, CountersState((1, 0)))

    @pytest.mark.parametrize("text", ["c0 ** 2", "f(c0)", "c0 +", "'a'", "c0 if c1 else 2"])
    def test_rejects_unsupported_syntax(self, text):
        with pytest.raises(SchemaViolation):
            parse_expr(text)

    def test_fold_constants(self):
        folded = fold_constants(Sub(Var("x"), Sub(Const(5.0), Const(2.0))))
        assert folded == Sub(Var("x"), Const(3.0))


class TestConditions:
    def test_normalize_moves_rhs_left(self):
        cond = normalize_condition(Var("x"), Comparator.GE, Const(3.0))
        assert cond == NumericCondition(Sub(Var("x"), Const(3.0)), Comparator.GE)

    def test_normalize_zero_rhs_is_dropped(self):
        cond = normalize_condition(Var("x"), Comparator.LT, Const(0.0))
        assert cond.expr == Var("x")

    def test_inline_comparison(self):
        cond = parse_condition({"expr": "c0 + 1 <= c1"}, "goal.0")
        assert cond.cmp is Comparator.LE
        assert check_condition(cond, CountersState((0, 1)))
        assert not check_condition(cond, CountersState((1, 1)))

    def test_explicit_cmp_and_aliases(self):
        cond = parse_condition({"expr": "c0", "cmp": "==", "rhs": "4"}, "goal.0")
        assert cond.cmp is Comparator.EQ
        assert check_condition(cond, CountersState((4,)))

    def test_prop_condition(self):
        cond = parse_condition({"prop": "dead", "value": False}, "goal.1")
        assert cond == PropCondition("dead", False)
        assert cond.holds({"dead": False})
        with pytest.raises(UnboundVariable):
            cond.holds({})

    @pytest.mark.parametrize("doc", [
        {"expr": "c0 + 1"},
        {"expr": "c0 < c1 < c2"},
        {"expr": "c0", "cmp": "~"},
        {"prop": "dead", "value": "no"},
        {"neither": 1},
        "c0 < 1",
    ])
    def test_malformed_goal_entries(self, doc):
        with pytest.raises(SchemaViolation):
            parse_condition(doc, "goal.0")


class TestInstanceLoading:
    def test_unknown_domain(self):
        with pytest.raises(UnknownDomain):
            load_instance({"domain": "sokoban", "parameters": {}})

    def test_extra_top_level_key(self):
        with pytest.raises(SchemaViolation):
            load_instance({"domain": "counters", "parameters": {"n": 2, "max": 3}, "extra": 1})

    def test_goal_names_unknown_fluent(self):
        with pytest.raises(UnboundVariable):
            load_instance({"domain": "counters", "parameters": {"n": 2, "max": 3},
                           "goal": [{"expr": "c0 + 1 <= c7"}]})

    def test_bad_parameters_report_path(self):
        with pytest.raises(SchemaViolation) as exc:
            load_instance({"domain": "counters", "parameters": {"n": 0, "max": 3}})
        assert exc.value.path.startswith("parameters")

    def test_initial_value_out_of_range(self):
        with pytest.raises(SchemaViolation):
            load_instance({"domain": "counters", "parameters": {"n": 2, "max": 3},
                           "initial_state": {"c0": 0, "c1": 9}})

    def test_file_loading_sets_identity(self):
        model = load_instance_file(INSTANCES / "counters_n2.json")
        assert model.instance_id == "counters_n2"
        assert model.domain_name == "counters"
        assert model.initial == CountersState((0, 0))
        assert model.builtin_goal

    def test_explicit_goal_list_is_declarative(self):
        model = load_instance_file(INSTANCES / "counters_n5.json")
        assert not model.builtin_goal
        assert len(model.goal) == 4
        assert model.goal_test(CountersState((0, 1, 2, 3, 4)))
        assert not model.goal_test(CountersState((0, 1, 2, 3, 3)))

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(SchemaViolation):
            load_instance_file(path)

    def test_instance_json_round_trips_document(self):
        model = counters(3, 5)
        assert json.loads(model.instance_json())["parameters"] == {"n": 3, "max": 5}

    def test_registry_names(self):
        assert set(default_registry().names()) == {"counters", "fo-counters", "pacman",
                                                   "twinprime"}


def test_state_digest_is_content_based():
    assert state_digest(CountersState((1, 2))) == state_digest(CountersState((1, 2)))
    assert state_digest(CountersState((1, 2))) != state_digest(CountersState((2, 1)))


_EXACT = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}


def random_expression(rng, depth):
    """
    A random infix expression over c0..c2 and its exact evaluator.

    Divisors are literals or single fluents so a zero divisor is exactly zero in floats too.
    """
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            name = f"c{int(rng.integers(3))}"
            return name, lambda env: Fraction(env[name])
        value = int(rng.integers(0, 10))
        return str(value), lambda env: Fraction(value)
    op = str(rng.choice(list(_EXACT)))
    left_text, left = random_expression(rng, depth - 1)
    right_text, right = random_expression(rng, 0 if op == "/" else depth - 1)
    return f"({left_text} {op} {right_text})", lambda env: _EXACT[op](left(env), right(env))


@pytest.mark.parametrize("seed", range(5))
def test_eval_expr_matches_exact_arithmetic(seed):
    rng = np.random.default_rng(seed)
    for _ in range(200):
        text, exact = random_expression(rng, 4)
        state = CountersState(tuple(int(v) for v in rng.integers(0, 6, size=3)))
        try:
            expected = exact(state.fluents())
        except ZeroDivisionError:
            with pytest.raises(DivisionByZero):
                eval_expr(parse_expr(text), state)
            continue
        expr = parse_expr(text)
        assert eval_expr(expr, state) == pytest.approx(float(expected), rel=1e-9, abs=1e-9), text
        assert eval_expr(fold_constants(expr), state) == pytest.approx(
            float(expected), rel=1e-9, abs=1e-9), text
