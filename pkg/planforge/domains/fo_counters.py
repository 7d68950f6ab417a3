"""
fo_counters.py

The IPC numeric "FO-Counters" domain: counters whose step size is a per-counter rate.

Each counter i has a value in [0, max_value] and a rate in [0, max_rate].
Actions per counter:
    increase_value c_i  value += rate, if the result stays <= max_value
    decrease_value c_i  value -= rate, if the result stays >= 0
    increase_rate c_i   rate += 1, if rate < max_rate
    decrease_rate c_i   rate -= 1, if rate > 0
Value changes by a zero rate are no-ops and are not offered.
The goal is the Counters chain: c_i + 1 <= c_{i+1}.

State objects handed to heuristics are ``FoCountersState`` with ``values`` and
``rates`` (tuples of ints); ``task.parameters`` carries ``n``, ``max_value`` and
``max_rate``.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Set, Tuple

from pydantic import AliasChoices, BaseModel, Field, ValidationError, model_validator

from ..errors import SchemaViolation
from ..model import Domain, GoalCondition, State, Transition, parameters_error
from .counters import chain_goal, chain_satisfied, read_counter_values


class FoCountersParameters(BaseModel):
    """Parameters block: {n, max_value, max_rate, values, rates}."""
    n: int = Field(..., ge=1)
    max_value: int = Field(..., ge=0, validation_alias=AliasChoices("max_value", "max"))
    max_rate: int = Field(..., ge=0)
    values: Optional[List[int]] = None
    rates: Optional[List[int]] = None

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def validate_arrays(self):
        for name, bound in (("values", self.max_value), ("rates", self.max_rate)):
            arr = getattr(self, name)
            if arr is None:
                continue
            if len(arr) != self.n:
                raise ValueError(f"{name} must hold exactly n={self.n} entries")
            if any(v < 0 or v > bound for v in arr):
                raise ValueError(f"{name} must lie within [0, {bound}]")
        return self


@dataclass(frozen=True)
class FoCountersState(State):
    values: Tuple[int, ...]
    rates: Tuple[int, ...]

    def fluents(self) -> Dict[str, int]:
        env = {f"c{i}": v for i, v in enumerate(self.values)}
        env.update({f"rate{i}": r for i, r in enumerate(self.rates)})
        return env

    def to_json(self) -> Dict[str, Any]:
        return {"values": list(self.values), "rates": list(self.rates)}


class FoCountersDomain(Domain):
    name = "fo-counters"
    state_type = FoCountersState

    def parse_parameters(self, params: Mapping[str, Any]) -> FoCountersParameters:
        try:
            return FoCountersParameters.model_validate(dict(params))
        except ValidationError as e:
            raise parameters_error(e) from e

    def initial_state(self, params: FoCountersParameters,
                      initial_doc: Mapping[str, Any]) -> FoCountersState:
        values = read_counter_values(initial_doc, params.n, "c", params.values,
                                     "initial_state")
        rates = read_counter_values(initial_doc, params.n, "rate", params.rates,
                                    "initial_state")
        state = FoCountersState(values, rates)
        if not self.is_valid(params, state):
            raise SchemaViolation("initial_state", "value or rate outside its bounds")
        return state

    def decode_state(self, params, doc: Mapping[str, Any]) -> FoCountersState:
        return FoCountersState(tuple(int(v) for v in doc["values"]),
                               tuple(int(r) for r in doc["rates"]))

    @staticmethod
    def is_valid(params: FoCountersParameters, state: FoCountersState) -> bool:
        return (all(0 <= v <= params.max_value for v in state.values)
                and all(0 <= r <= params.max_rate for r in state.rates))

    def successors(self, params: FoCountersParameters,
                   state: FoCountersState) -> List[Transition]:
        result = []
        values, rates = state.values, state.rates
        for i, (v, r) in enumerate(zip(values, rates)):
            if r > 0 and v + r <= params.max_value:
                result.append(Transition(
                    f"increase_value c{i}",
                    FoCountersState(values[:i] + (v + r,) + values[i + 1:], rates)))
            if r > 0 and v - r >= 0:
                result.append(Transition(
                    f"decrease_value c{i}",
                    FoCountersState(values[:i] + (v - r,) + values[i + 1:], rates)))
            if r < params.max_rate:
                result.append(Transition(
                    f"increase_rate c{i}",
                    FoCountersState(values, rates[:i] + (r + 1,) + rates[i + 1:])))
            if r > 0:
                result.append(Transition(
                    f"decrease_rate c{i}",
                    FoCountersState(values, rates[:i] + (r - 1,) + rates[i + 1:])))
        return result

    def is_goal(self, params, state: FoCountersState) -> bool:
        return chain_satisfied(state.values)

    def builtin_goal(self, params: FoCountersParameters) -> List[GoalCondition]:
        return chain_goal(params.n)

    def variables(self, params: FoCountersParameters) -> Set[str]:
        return ({f"c{i}" for i in range(params.n)}
                | {f"rate{i}" for i in range(params.n)})
