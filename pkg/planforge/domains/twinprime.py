"""
twinprime.py

The Twin Prime domain: arithmetic over a register array until one register holds a twin
prime above a threshold.

For every ordered pair (i, j) with i != j and every op in {add, sub, mul, idiv} the action
"<op> r<i> r<j>" stores registers[i] op registers[j] into register i. Integer division
truncates toward zero, is inapplicable for a zero divisor, and any result outside the
signed 64-bit range makes the action inapplicable.

The goal holds when some register exceeds ``threshold`` and is a twin prime. The state
space is infinite; only the search budget bounds it.

State objects handed to heuristics are ``TwinPrimeState`` with the attribute
``registers`` (tuple of ints) and ``threshold``; ``task.parameters`` carries
``registers`` (the initial values) and ``threshold``.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Mapping, Set, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator

from ..errors import SchemaViolation
from ..model import (Domain, GoalCondition, PropCondition, State, Transition,
                     parameters_error)

INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1

GOAL_FLUENT = "twin_prime_found"

# Deterministic for every n < 3.3e24, which covers the signed 64-bit range.
_MILLER_RABIN_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


@lru_cache(maxsize=1 << 16)
def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test."""
    if n < 2:
        return False
    for p in _MILLER_RABIN_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MILLER_RABIN_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_twin_prime(n: int) -> bool:
    """True iff n is prime and n-2 or n+2 is prime."""
    return is_prime(n) and (is_prime(n - 2) or is_prime(n + 2))


def _truncating_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


_OPERATIONS = (
    ("add", lambda a, b: a + b),
    ("sub", lambda a, b: a - b),
    ("mul", lambda a, b: a * b),
    ("idiv", _truncating_div),
)


class TwinPrimeParameters(BaseModel):
    """Parameters block: {registers, threshold}."""
    registers: List[int] = Field(..., min_length=2)
    threshold: int

    model_config = {"frozen": True}

    @field_validator('registers')
    @classmethod
    def validate_registers(cls, v):
        if any(r < INT64_MIN or r > INT64_MAX for r in v):
            raise ValueError("registers must fit in signed 64-bit integers")
        return v


@dataclass(frozen=True)
class TwinPrimeState(State):
    registers: Tuple[int, ...]
    threshold: int

    def goal_reached(self) -> bool:
        return any(r > self.threshold and is_twin_prime(r) for r in self.registers)

    def fluents(self) -> Dict[str, Any]:
        env: Dict[str, Any] = {f"r{i}": v for i, v in enumerate(self.registers)}
        env[GOAL_FLUENT] = self.goal_reached()
        return env

    def to_json(self) -> Dict[str, Any]:
        return {"registers": list(self.registers), "threshold": self.threshold}


class TwinPrimeDomain(Domain):
    name = "twinprime"
    state_type = TwinPrimeState

    def parse_parameters(self, params: Mapping[str, Any]) -> TwinPrimeParameters:
        try:
            return TwinPrimeParameters.model_validate(dict(params))
        except ValidationError as e:
            raise parameters_error(e) from e

    def initial_state(self, params: TwinPrimeParameters,
                      initial_doc: Mapping[str, Any]) -> TwinPrimeState:
        if initial_doc:
            try:
                registers = tuple(int(initial_doc[f"r{i}"])
                                  for i in range(len(params.registers)))
            except KeyError as e:
                raise SchemaViolation(f"initial_state.{e.args[0]}",
                                      "missing register value") from None
            return TwinPrimeState(registers, params.threshold)
        return TwinPrimeState(tuple(params.registers), params.threshold)

    def decode_state(self, params, doc: Mapping[str, Any]) -> TwinPrimeState:
        return TwinPrimeState(tuple(int(v) for v in doc["registers"]),
                              int(doc.get("threshold", params.threshold)))

    def successors(self, params, state: TwinPrimeState) -> List[Transition]:
        result = []
        regs = state.registers
        for i, a in enumerate(regs):
            for j, b in enumerate(regs):
                if i == j:
                    continue
                for name, op in _OPERATIONS:
                    if name == "idiv" and b == 0:
                        continue
                    value = op(a, b)
                    if value < INT64_MIN or value > INT64_MAX:
                        continue
                    result.append(Transition(
                        f"{name} r{i} r{j}",
                        TwinPrimeState(regs[:i] + (value,) + regs[i + 1:], state.threshold)))
        return result

    def is_goal(self, params: TwinPrimeParameters, state: TwinPrimeState) -> bool:
        return state.goal_reached()

    def builtin_goal(self, params) -> List[GoalCondition]:
        return [PropCondition(GOAL_FLUENT, True)]

    def variables(self, params: TwinPrimeParameters) -> Set[str]:
        return {f"r{i}" for i in range(len(params.registers))} | {GOAL_FLUENT}
