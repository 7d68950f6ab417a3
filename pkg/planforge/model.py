"""
model.py

The planning-task contract shared by every domain: states, transitions, the
expression/condition language used by goals and h^md, the domain registry and
the JSON instance loader.

A task is the tuple (variables, actions, transitions, initial state, goal). Domains
supply the executable parts (successor generator and goal test); instance files
supply the parameters, the initial state and the declarative goal list.
"""

import ast
import enum
import hashlib
import inspect
import json
import logging
import operator
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Set, Union

from pydantic import BaseModel, Field, ValidationError

from .errors import (DivisionByZero, SchemaViolation, UnboundVariable,
                     UnknownDomain)

logger = logging.getLogger(__name__)

Value = Union[bool, int, float]


# -----------------------------------------------------------------------------
# 1) States and transitions
# -----------------------------------------------------------------------------
class State(ABC):
    """
    Base class for domain states.

    Subclasses are frozen dataclasses, so equality and hashing follow the full
    assignment. Each subclass exposes its fluents by name and encodes itself as JSON.
    """

    @abstractmethod
    def fluents(self) -> Dict[str, Value]:
        """Map every fluent name to its current value."""

    @abstractmethod
    def to_json(self) -> Dict[str, Any]:
        """Encode the state as a JSON-compatible dictionary."""


def state_digest(state: State) -> str:
    """Stable content hash of a state, identical across processes."""
    payload = json.dumps(state.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Transition:
    """An applicable action in a state and the state it leads to."""
    action_label: str
    successor: State
    cost: float = 1.0


# -----------------------------------------------------------------------------
# 2) Expressions
# -----------------------------------------------------------------------------
class Expr(ABC):
    """Arithmetic expression tree over numeric fluents."""

    @abstractmethod
    def evaluate(self, env: Mapping[str, Value]) -> float:
        """Evaluate under 64-bit float semantics."""

    @abstractmethod
    def variables(self) -> Set[str]:
        """Names of all fluents the expression reads."""


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def evaluate(self, env):
        return self.value

    def variables(self):
        return set()

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def evaluate(self, env):
        try:
            return float(env[self.name])
        except KeyError:
            raise UnboundVariable(self.name) from None

    def variables(self):
        return {self.name}

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class _Binary(Expr):
    left: Expr
    right: Expr

    symbol = "?"

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"({self.left} {self.symbol} {self.right})"


class Add(_Binary):
    symbol = "+"

    def evaluate(self, env):
        return self.left.evaluate(env) + self.right.evaluate(env)


class Sub(_Binary):
    symbol = "-"

    def evaluate(self, env):
        return self.left.evaluate(env) - self.right.evaluate(env)


class Mul(_Binary):
    symbol = "*"

    def evaluate(self, env):
        return self.left.evaluate(env) * self.right.evaluate(env)


class Div(_Binary):
    symbol = "/"

    def evaluate(self, env):
        divisor = self.right.evaluate(env)
        if divisor == 0.0:
            raise DivisionByZero(f"divisor {self.right} is zero")
        return self.left.evaluate(env) / divisor


_BINARY_NODES = {ast.Add: Add, ast.Sub: Sub, ast.Mult: Mul, ast.Div: Div}


def fold_constants(expr: Expr) -> Expr:
    """Replace every constant-only subtree by its value."""
    if isinstance(expr, _Binary):
        left = fold_constants(expr.left)
        right = fold_constants(expr.right)
        node = type(expr)(left, right)
        if isinstance(left, Const) and isinstance(right, Const):
            return Const(node.evaluate({}))
        return node
    return expr


def parse_expr(text: str, path: str = "expr") -> Expr:
    """
    Parse an infix expression string into an Expr tree.

    Supports + - * /, parentheses, unary minus, identifiers and decimal literals.

    Raises:
        SchemaViolation: On anything outside that grammar.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as e:
        raise SchemaViolation(path, f"cannot parse expression {text!r}: {e.msg}") from e
    return _expr_from_ast(tree.body, path, text)


def _expr_from_ast(node: ast.AST, path: str, text: str) -> Expr:
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY_NODES:
        return _BINARY_NODES[type(node.op)](
            _expr_from_ast(node.left, path, text),
            _expr_from_ast(node.right, path, text))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        operand = _expr_from_ast(node.operand, path, text)
        if isinstance(node.op, ast.UAdd):
            return operand
        if isinstance(operand, Const):
            return Const(-operand.value)
        return Sub(Const(0.0), operand)
    if isinstance(node, ast.Name):
        return Var(node.id)
    if isinstance(node, ast.Constant) and type(node.value) in (int, float):
        return Const(float(node.value))
    raise SchemaViolation(
        path, f"unsupported element {ast.dump(node)!r} in expression {text!r}")


def eval_expr(expr: Expr, state: State) -> float:
    """
    Evaluate an expression in a state.

    Raises:
        UnboundVariable: If a Var does not name a fluent of the state.
        DivisionByZero: If a Div meets a zero divisor.
    """
    return expr.evaluate(state.fluents())


# -----------------------------------------------------------------------------
# 3) Goal conditions
# -----------------------------------------------------------------------------
class Comparator(str, enum.Enum):
    """Comparison of ψ against zero."""
    GT = ">"
    GE = ">="
    EQ = "="
    LE = "<="
    LT = "<"


_COMPARATOR_ALIASES = {"==": Comparator.EQ, "≥": Comparator.GE, "≤": Comparator.LE}

_COMPARE = {
    Comparator.GT: operator.gt,
    Comparator.GE: operator.ge,
    Comparator.EQ: operator.eq,
    Comparator.LE: operator.le,
    Comparator.LT: operator.lt,
}

_AST_COMPARATORS = {
    ast.Gt: Comparator.GT,
    ast.GtE: Comparator.GE,
    ast.Eq: Comparator.EQ,
    ast.LtE: Comparator.LE,
    ast.Lt: Comparator.LT,
}


def parse_comparator(text: str, path: str = "cmp") -> Comparator:
    if text in _COMPARATOR_ALIASES:
        return _COMPARATOR_ALIASES[text]
    try:
        return Comparator(text)
    except ValueError:
        raise SchemaViolation(path, f"unknown comparator {text!r}") from None


@dataclass(frozen=True)
class PropCondition:
    """A propositional goal: the named fluent must equal the expected truth value."""
    fluent: str
    expected: bool = True

    def variables(self) -> Set[str]:
        return {self.fluent}

    def holds(self, env: Mapping[str, Value]) -> bool:
        try:
            return bool(env[self.fluent]) == self.expected
        except KeyError:
            raise UnboundVariable(self.fluent) from None

    def __str__(self):
        return self.fluent if self.expected else f"not {self.fluent}"


@dataclass(frozen=True)
class NumericCondition:
    """A numeric goal in normal form: expr ⋈ 0."""
    expr: Expr
    cmp: Comparator

    def variables(self) -> Set[str]:
        return self.expr.variables()

    def holds(self, env: Mapping[str, Value]) -> bool:
        return _COMPARE[self.cmp](self.expr.evaluate(env), 0.0)

    def __str__(self):
        return f"{self.expr} {self.cmp.value} 0"


GoalCondition = Union[PropCondition, NumericCondition]


def normalize_condition(lhs: Expr, cmp: Comparator, rhs: Optional[Expr] = None) -> NumericCondition:
    """Bring ``lhs ⋈ rhs`` into the form ``ψ ⋈ 0`` with constants folded."""
    if rhs is None or (isinstance(rhs, Const) and rhs.value == 0.0):
        psi = lhs
    else:
        psi = Sub(lhs, rhs)
    return NumericCondition(fold_constants(psi), cmp)


def check_condition(cond: GoalCondition, state: State) -> bool:
    """True iff the state satisfies the condition; propagates evaluation errors."""
    return cond.holds(state.fluents())


def parse_condition(doc: Mapping[str, Any], path: str) -> GoalCondition:
    """
    Build a GoalCondition from one entry of an instance's goal list.

    Accepted shapes:
        {"prop": "<fluent>", "value": true}
        {"expr": "<infix>", "cmp": ">=", "rhs": "<infix, optional>"}
        {"expr": "<infix> <= <infix>"}
    """
    if not isinstance(doc, Mapping):
        raise SchemaViolation(path, "goal entry must be an object")
    if "prop" in doc:
        value = doc.get("value", True)
        if not isinstance(value, bool):
            raise SchemaViolation(f"{path}.value", "must be a boolean")
        return PropCondition(str(doc["prop"]), value)
    if "expr" not in doc:
        raise SchemaViolation(path, "goal entry needs 'prop' or 'expr'")

    text = doc["expr"]
    if not isinstance(text, str):
        raise SchemaViolation(f"{path}.expr", "must be a string")
    if "cmp" in doc:
        cmp = parse_comparator(doc["cmp"], f"{path}.cmp")
        lhs = parse_expr(text, f"{path}.expr")
        rhs = parse_expr(str(doc["rhs"]), f"{path}.rhs") if "rhs" in doc else None
        return normalize_condition(lhs, cmp, rhs)

    try:
        tree = ast.parse(text.strip(), mode="eval").body
    except SyntaxError as e:
        raise SchemaViolation(f"{path}.expr", f"cannot parse {text!r}: {e.msg}") from e
    if not (isinstance(tree, ast.Compare) and len(tree.ops) == 1
            and type(tree.ops[0]) in _AST_COMPARATORS):
        raise SchemaViolation(path, "goal entry without 'cmp' must contain one comparison")
    return normalize_condition(
        _expr_from_ast(tree.left, f"{path}.expr", text),
        _AST_COMPARATORS[type(tree.ops[0])],
        _expr_from_ast(tree.comparators[0], f"{path}.expr", text))


def goal_to_json(cond: GoalCondition) -> Dict[str, Any]:
    if isinstance(cond, PropCondition):
        return {"prop": cond.fluent, "value": cond.expected}
    return {"expr": str(cond.expr), "cmp": cond.cmp.value}


# -----------------------------------------------------------------------------
# 4) Domains and the registry
# -----------------------------------------------------------------------------
class Domain(ABC):
    """
    An executable planning domain.

    A domain turns the "parameters" block of an instance into a parameter object and
    then provides the successor generator and goal test over its own state type.
    """
    name: str = ""
    state_type: type = State

    @abstractmethod
    def parse_parameters(self, params: Mapping[str, Any]) -> Any:
        """Validate the parameters block. Raises SchemaViolation."""

    @abstractmethod
    def initial_state(self, params: Any, initial_doc: Mapping[str, Any]) -> State:
        """Build s0 from the parameters and the initial_state block."""

    @abstractmethod
    def decode_state(self, params: Any, doc: Mapping[str, Any]) -> State:
        """Inverse of State.to_json."""

    @abstractmethod
    def successors(self, params: Any, state: State) -> List[Transition]:
        """All applicable transitions; labels are unique per state."""

    @abstractmethod
    def is_goal(self, params: Any, state: State) -> bool:
        """The executable goal test of the domain's built-in goal."""

    @abstractmethod
    def builtin_goal(self, params: Any) -> List[GoalCondition]:
        """The declarative counterpart of is_goal."""

    @abstractmethod
    def variables(self, params: Any) -> Set[str]:
        """Names of every fluent exposed by states of this instance."""

    def source_text(self) -> str:
        """Source of the module implementing the domain, shown to the LLM."""
        return inspect.getsource(inspect.getmodule(type(self)))


class DomainRegistry:
    """Name → Domain lookup used by the instance loader."""

    def __init__(self, domains: Optional[List[Domain]] = None):
        self._domains: Dict[str, Domain] = {}
        for domain in domains or []:
            self.register(domain)

    def register(self, domain: Domain) -> None:
        self._domains[domain.name] = domain

    def get(self, name: str) -> Domain:
        try:
            return self._domains[name]
        except KeyError:
            raise UnknownDomain(name) from None

    def names(self) -> List[str]:
        return sorted(self._domains)

    def __contains__(self, name: str) -> bool:
        return name in self._domains


# -----------------------------------------------------------------------------
# 5) Task model and instance loading
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class TaskModel:
    """
    A loaded planning task. Immutable and safe to share across threads.

    When the instance declares ``"goal": "builtin"`` the domain's executable goal test
    is used; an explicit goal list is tested declaratively.
    """
    domain: Domain
    parameters: Any
    initial: State
    goal: List[GoalCondition]
    builtin_goal: bool = True
    instance_id: str = ""
    instance_path: Optional[Path] = None
    instance_doc: Dict[str, Any] = field(default_factory=dict)

    @property
    def domain_name(self) -> str:
        return self.domain.name

    def successors(self, state: State) -> List[Transition]:
        return self.domain.successors(self.parameters, state)

    def goal_test(self, state: State) -> bool:
        if self.builtin_goal:
            return self.domain.is_goal(self.parameters, state)
        env = state.fluents()
        return all(cond.holds(env) for cond in self.goal)

    def instance_json(self) -> str:
        return json.dumps(self.instance_doc, indent=2, sort_keys=True)

    def decode_state(self, doc: Mapping[str, Any]) -> State:
        return self.domain.decode_state(self.parameters, doc)


class InstanceDocument(BaseModel):
    """Top-level shape of an instance file."""
    domain: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    initial_state: Dict[str, Any] = Field(default_factory=dict)
    goal: Union[str, List[Dict[str, Any]]] = "builtin"

    model_config = {
        "extra": "forbid",
    }


def _first_error(e: ValidationError) -> SchemaViolation:
    err = e.errors()[0]
    path = ".".join(str(part) for part in err.get("loc", ()))
    return SchemaViolation(path, err.get("msg", "invalid value"))


def load_instance(instance_doc: Mapping[str, Any],
                  registry: Optional[DomainRegistry] = None,
                  instance_id: str = "",
                  instance_path: Optional[Path] = None) -> TaskModel:
    """
    Build a TaskModel from an instance document.

    Args:
        instance_doc: Parsed instance JSON.
        registry: Domain registry; the built-in registry when omitted.
        instance_id: Identifier used in run records (defaults to the file stem).
        instance_path: File the document came from, if any.

    Raises:
        UnknownDomain: If the domain is not registered.
        SchemaViolation: If the document does not match the schema.
        UnboundVariable: If a goal condition names an unknown fluent.
    """
    if registry is None:
        from .domains import default_registry
        registry = default_registry()

    try:
        doc = InstanceDocument.model_validate(instance_doc)
    except ValidationError as e:
        raise _first_error(e) from e

    domain = registry.get(doc.domain)
    params = domain.parse_parameters(doc.parameters)
    initial = domain.initial_state(params, doc.initial_state)
    known = domain.variables(params)

    if isinstance(doc.goal, str):
        if doc.goal != "builtin":
            raise SchemaViolation("goal", "must be a list or the string 'builtin'")
        goal = domain.builtin_goal(params)
        builtin = True
    else:
        goal = [parse_condition(entry, f"goal.{i}") for i, entry in enumerate(doc.goal)]
        builtin = False

    for cond in goal:
        for name in sorted(cond.variables()):
            if name not in known:
                raise UnboundVariable(name)

    if instance_path is not None and not instance_id:
        instance_id = instance_path.stem
    logger.debug(f"Loaded {doc.domain} instance {instance_id or '<inline>'} "
                 f"with {len(goal)} goal conditions")
    return TaskModel(domain=domain,
                     parameters=params,
                     initial=initial,
                     goal=goal,
                     builtin_goal=builtin,
                     instance_id=instance_id,
                     instance_path=instance_path,
                     instance_doc=dict(instance_doc))


def load_instance_file(path: Union[str, Path],
                       registry: Optional[DomainRegistry] = None) -> TaskModel:
    """Read an instance JSON file and load it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaViolation("", f"{path} is not valid JSON: {e}") from e
    return load_instance(doc, registry, instance_path=path.resolve())


def parameters_error(e: ValidationError) -> SchemaViolation:
    """Translate a pydantic error on a parameters block into SchemaViolation."""
    violation = _first_error(e)
    return SchemaViolation(f"parameters.{violation.path}", violation.reason)


HeuristicFn = Callable[[State], float]
