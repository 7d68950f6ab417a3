"""
validator.py

Independent plan verification: replay a plan through the successor generator and check
the goal in the final state. Shares no bookkeeping with the search code.

Also reads and writes plan files of the form
{"domain": ..., "instance": <path>, "plan": ["label", ...]}.
"""

import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from .errors import ModelError, SchemaViolation
from .model import TaskModel, state_digest

logger = logging.getLogger(__name__)

NOT_APPLICABLE = "action not applicable"


class Verdict(str, enum.Enum):
    """
    Values:
        VALID: Every step applies and the final state satisfies the goal
        INVALID_STEP: The action at ``step`` is not applicable
        GOAL_UNSATISFIED: The plan applies but does not end in a goal state
    """
    VALID = "Valid"
    INVALID_STEP = "InvalidStep"
    GOAL_UNSATISFIED = "GoalUnsatisfied"


@dataclass
class ValidationReport:
    verdict: Verdict
    step: Optional[int] = None
    reason: Optional[str] = None
    trace: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.verdict is Verdict.VALID

    def __str__(self):
        if self.verdict is Verdict.INVALID_STEP:
            return f"InvalidStep({self.step}, {self.reason!r})"
        return self.verdict.value


def validate(model: TaskModel, plan: Sequence[str]) -> ValidationReport:
    """
    Replay ``plan`` from the initial state.

    Each label must name one of the transitions the domain generates in the current
    state. Evaluation errors from the goal test are reported as GoalUnsatisfied rather
    than raised.

    Returns:
        ValidationReport: trace holds the digest of every visited state, the initial
        state included.
    """
    state = model.initial
    trace = [state_digest(state)]
    for index, label in enumerate(plan):
        successor = None
        for transition in model.successors(state):
            if transition.action_label == label:
                successor = transition.successor
                break
        if successor is None:
            logger.debug(f"Step {index} ({label!r}) is not applicable")
            return ValidationReport(Verdict.INVALID_STEP, index, NOT_APPLICABLE, trace)
        state = successor
        trace.append(state_digest(state))

    try:
        reached = model.goal_test(state)
    except ModelError as e:
        logger.warning(f"Goal test failed on the final state: {e}")
        return ValidationReport(Verdict.GOAL_UNSATISFIED, reason=str(e), trace=trace)
    if not reached:
        return ValidationReport(Verdict.GOAL_UNSATISFIED, trace=trace)
    return ValidationReport(Verdict.VALID, trace=trace)


def plan_document(model: TaskModel, plan: Sequence[str]) -> Dict[str, Any]:
    instance = str(model.instance_path) if model.instance_path else model.instance_id
    return {"domain": model.domain_name, "instance": instance, "plan": list(plan)}


def save_plan(path: Union[str, Path], model: TaskModel, plan: Sequence[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(plan_document(model, plan), indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote {len(plan)}-step plan to {path}")
    return path


def load_plan(path: Union[str, Path]) -> List[str]:
    """
    Read the action labels of a plan file.

    A bare JSON list of labels is accepted as well.

    Raises:
        SchemaViolation: If the file is not a plan document.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaViolation("", f"{path} is not valid JSON: {e}") from e
    labels = doc.get("plan") if isinstance(doc, dict) else doc
    if not isinstance(labels, list) or not all(isinstance(a, str) for a in labels):
        raise SchemaViolation("plan", "must be a list of action labels")
    return labels
