"""
counters.py

The IPC numeric "Counters" domain.

There are n integer counters c0..c{n-1}, each within [0, max_value]. Every counter can
be incremented or decremented by one. The goal orders the counters strictly:
c_i + 1 <= c_{i+1} for every i < n-1.

State objects handed to heuristics are ``CountersState`` with the attribute
``values`` (tuple of ints); ``task.parameters`` carries ``n`` and ``max_value``.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Set, Tuple

from pydantic import AliasChoices, BaseModel, Field, ValidationError, model_validator

from ..errors import SchemaViolation
from ..model import (Add, Comparator, Const, Domain, GoalCondition, Sub,
                     NumericCondition, State, Transition, Var, parameters_error)


class CountersParameters(BaseModel):
    """Parameters block: {n, max_value (alias max), values}."""
    n: int = Field(..., ge=1)
    max_value: int = Field(..., ge=0, validation_alias=AliasChoices("max_value", "max"))
    values: Optional[List[int]] = None

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def validate_values(self):
        if self.values is not None:
            if len(self.values) != self.n:
                raise ValueError(f"values must hold exactly n={self.n} entries")
            if any(v < 0 or v > self.max_value for v in self.values):
                raise ValueError("values must lie within [0, max_value]")
        return self


@dataclass(frozen=True)
class CountersState(State):
    values: Tuple[int, ...]

    def fluents(self) -> Dict[str, int]:
        return {f"c{i}": v for i, v in enumerate(self.values)}

    def to_json(self) -> Dict[str, Any]:
        return {"values": list(self.values)}


def chain_goal(n: int, prefix: str = "c") -> List[GoalCondition]:
    """The declarative chain goal c_i + 1 - c_{i+1} <= 0 for i < n-1."""
    return [
        NumericCondition(
            Sub(Add(Var(f"{prefix}{i}"), Const(1.0)), Var(f"{prefix}{i + 1}")),
            Comparator.LE)
        for i in range(n - 1)
    ]


def chain_satisfied(values: Tuple[int, ...]) -> bool:
    return all(values[i] + 1 <= values[i + 1] for i in range(len(values) - 1))


def read_counter_values(initial_doc: Mapping[str, Any], n: int, prefix: str,
                        fallback: Optional[List[int]], path: str) -> Tuple[int, ...]:
    """Read c0..c{n-1} from an initial_state block, else from the parameters."""
    if initial_doc:
        try:
            values = [initial_doc[f"{prefix}{i}"] for i in range(n)]
        except KeyError as e:
            raise SchemaViolation(f"{path}.{e.args[0]}", "missing counter value") from None
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
            raise SchemaViolation(path, "counter values must be integers")
        return tuple(values)
    if fallback is not None:
        return tuple(fallback)
    return (0,) * n


class CountersDomain(Domain):
    name = "counters"
    state_type = CountersState

    def parse_parameters(self, params: Mapping[str, Any]) -> CountersParameters:
        try:
            return CountersParameters.model_validate(dict(params))
        except ValidationError as e:
            raise parameters_error(e) from e

    def initial_state(self, params: CountersParameters,
                      initial_doc: Mapping[str, Any]) -> CountersState:
        values = read_counter_values(initial_doc, params.n, "c", params.values,
                                     "initial_state")
        if any(v < 0 or v > params.max_value for v in values):
            raise SchemaViolation("initial_state", "counter outside [0, max_value]")
        return CountersState(values)

    def decode_state(self, params, doc: Mapping[str, Any]) -> CountersState:
        return CountersState(tuple(int(v) for v in doc["values"]))

    def successors(self, params: CountersParameters,
                   state: CountersState) -> List[Transition]:
        result = []
        values = state.values
        for i, v in enumerate(values):
            if v < params.max_value:
                result.append(Transition(
                    f"inc c{i}",
                    CountersState(values[:i] + (v + 1,) + values[i + 1:])))
            if v > 0:
                result.append(Transition(
                    f"dec c{i}",
                    CountersState(values[:i] + (v - 1,) + values[i + 1:])))
        return result

    def is_goal(self, params, state: CountersState) -> bool:
        return chain_satisfied(state.values)

    def builtin_goal(self, params: CountersParameters) -> List[GoalCondition]:
        return chain_goal(params.n)

    def variables(self, params: CountersParameters) -> Set[str]:
        return {f"c{i}" for i in range(params.n)}
