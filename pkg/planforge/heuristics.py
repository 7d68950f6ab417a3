"""
heuristics.py

Built-in heuristics (blind and h^md) and the selection of a heuristic from the CLI.

h^md sums, over all goal conditions, the distance d(ε, s) from the state to satisfying the
condition. Propositional conditions contribute 0 or 1. A numeric condition ψ ⋈ 0
contributes the distance from ψ(s) to the nearest value satisfying the comparator, taken
on the ψ-value axis, so the closed form holds for any ψ:

    ψ >= 0, ψ > 0   max(0, -ψ(s))
    ψ <= 0, ψ < 0   max(0,  ψ(s))
    ψ  = 0          |ψ(s)|

For strict comparators this is an infimum that is not attained: d is 0 at ψ(s) = 0 even
though the condition fails there. Goal detection always uses the goal test, never h = 0.

Synthesized heuristics never run in this process; they run inside worker executables
(see ``planforge.synthesis``).
"""

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Mapping, Optional, Sequence

from .model import (Comparator, GoalCondition, PropCondition,
                    State, TaskModel, Value)


class HeuristicKind(str, enum.Enum):
    BLIND = "blind"
    HMD = "hmd"
    PLUGIN = "plugin"


@dataclass(frozen=True)
class HeuristicSpec:
    """Heuristic selection: blind, hmd, or plugin:<heuristic source file>."""
    kind: HeuristicKind
    plugin_path: Optional[Path] = None

    @classmethod
    def parse(cls, text: str) -> "HeuristicSpec":
        if text.startswith("plugin:"):
            path = text[len("plugin:"):]
            if not path:
                raise ValueError("plugin heuristic needs a path: plugin:PATH")
            return cls(HeuristicKind.PLUGIN, Path(path))
        try:
            return cls(HeuristicKind(text))
        except ValueError:
            raise ValueError(
                f"heuristic must be blind, hmd or plugin:PATH, got {text!r}") from None

    def __str__(self):
        if self.kind is HeuristicKind.PLUGIN:
            return f"plugin:{self.plugin_path}"
        return self.kind.value


def h_blind(state: State) -> float:
    return 0.0


def _distance(cond: GoalCondition, env: Mapping[str, Value]) -> float:
    if isinstance(cond, PropCondition):
        return 0.0 if cond.holds(env) else 1.0
    value = cond.expr.evaluate(env)
    if cond.cmp in (Comparator.GE, Comparator.GT):
        return max(0.0, -value)
    if cond.cmp in (Comparator.LE, Comparator.LT):
        return max(0.0, value)
    return abs(value)


def condition_distance(cond: GoalCondition, state: State) -> float:
    """d(ε, s) for one normalized goal condition; propagates evaluation errors."""
    return _distance(cond, state.fluents())


def h_md(state: State, goal: Sequence[GoalCondition]) -> float:
    """Sum of condition_distance over the goal conditions."""
    env = state.fluents()
    return sum(_distance(cond, env) for cond in goal)


def make_heuristic(spec: HeuristicSpec, model: TaskModel) -> Callable[[State], float]:
    """
    Build an in-process heuristic function for a built-in spec.

    Raises:
        ValueError: For plugin specs (they run in a worker) or h^md with an empty goal.
    """
    if spec.kind is HeuristicKind.BLIND:
        return h_blind
    if spec.kind is HeuristicKind.HMD:
        if not model.goal:
            raise ValueError("h^md needs a nonempty declarative goal list")
        goal: List[GoalCondition] = list(model.goal)
        return lambda state: h_md(state, goal)
    raise ValueError("plugin heuristics run inside a worker executable")
