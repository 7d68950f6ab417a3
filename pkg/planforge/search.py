"""
search.py

Budgeted graph search over any TaskModel: breadth-first search and greedy best-first
search (GBFS), with duplicate detection, plan extraction and statistics.

Both algorithms share one loop and differ only in the open list. Duplicates are detected
when a state is generated: a state that was ever generated is never queued again, so the
closed set never reopens. The goal test runs when a node is expanded. GBFS evaluates the
heuristic eagerly at generation time and breaks ties between equal values FIFO, so a
constant heuristic reproduces BFS's expansion order exactly.
"""

import enum
import heapq
import itertools
import logging
import math
import sys
import time
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Deque, Dict, List, Optional, Tuple

from .config import Limits
from .model import State, TaskModel

logger = logging.getLogger(__name__)

# Memory is estimated every this many expansions.
MEMORY_CHECK_INTERVAL = 1024

# Bookkeeping per node on top of the state itself: a parents-dict slot, the parent
# tuple and the open-list entry.
_NODE_OVERHEAD_BYTES = 200


class Outcome(str, enum.Enum):
    """
    Termination reason of a search run.

    Values:
        SOLVED: A goal state was expanded; the plan is attached
        EXHAUSTED: The reachable state space was searched without reaching a goal
        TIMED_OUT: The wall-clock limit (or the expansion cap) was hit
        MEMORY_OUT: The estimated live set exceeded the memory limit
        HEURISTIC_ERROR: The heuristic raised or returned NaN
    """
    SOLVED = "Solved"
    EXHAUSTED = "Exhausted"
    TIMED_OUT = "TimedOut"
    MEMORY_OUT = "MemoryOut"
    HEURISTIC_ERROR = "HeuristicError"


@dataclass
class SearchStats:
    expanded: int = 0
    generated: int = 0
    duplicates: int = 0
    elapsed_seconds: float = 0.0
    peak_open: int = 0
    peak_closed: int = 0


@dataclass
class SearchResult:
    outcome: Outcome
    plan: Optional[List[str]] = None
    stats: SearchStats = field(default_factory=SearchStats)
    detail: Optional[str] = None

    @property
    def solved(self) -> bool:
        return self.outcome is Outcome.SOLVED


def result_to_json(result: SearchResult) -> Dict[str, Any]:
    """The wire format printed by worker executables."""
    doc: Dict[str, Any] = {
        "outcome": result.outcome.value,
        "plan": list(result.plan) if result.plan is not None else [],
        "stats": asdict(result.stats),
    }
    if result.detail:
        doc["detail"] = result.detail
    return doc


def result_from_json(doc: Dict[str, Any]) -> SearchResult:
    """
    Parse the worker wire format.

    Raises:
        ValueError: If the outcome is unknown or the document is malformed.
    """
    outcome = Outcome(doc["outcome"])
    stats_doc = doc.get("stats") or {}
    stats = SearchStats(**{k: stats_doc[k] for k in asdict(SearchStats()) if k in stats_doc})
    plan = [str(a) for a in doc.get("plan") or []] if outcome is Outcome.SOLVED else None
    return SearchResult(outcome, plan, stats, doc.get("detail"))


# -----------------------------------------------------------------------------
# Open lists
# -----------------------------------------------------------------------------
class FifoOpenList:
    """Plain FIFO queue; priorities are ignored."""

    def __init__(self):
        self._queue: Deque[State] = deque()

    def push(self, priority: float, state: State) -> None:
        self._queue.append(state)

    def pop(self) -> State:
        return self._queue.popleft()

    def __len__(self):
        return len(self._queue)


class HeuristicOpenList:
    """Min-heap on priority with FIFO tie-breaking through an insertion counter."""

    def __init__(self):
        self._heap: List[Tuple[float, int, State]] = []
        self._counter = itertools.count()

    def push(self, priority: float, state: State) -> None:
        heapq.heappush(self._heap, (priority, next(self._counter), state))

    def pop(self) -> State:
        return heapq.heappop(self._heap)[2]

    def __len__(self):
        return len(self._heap)


class HeuristicFailure(Exception):
    """Internal signal: the heuristic raised or returned NaN."""


def _deep_sizeof(obj: Any, seen: Optional[set] = None) -> int:
    seen = seen if seen is not None else set()
    if id(obj) in seen:
        return 0
    seen.add(id(obj))
    size = sys.getsizeof(obj)
    if isinstance(obj, dict):
        size += sum(_deep_sizeof(k, seen) + _deep_sizeof(v, seen) for k, v in obj.items())
    elif isinstance(obj, (list, tuple, set, frozenset)):
        size += sum(_deep_sizeof(item, seen) for item in obj)
    elif hasattr(obj, "__dict__"):
        size += _deep_sizeof(vars(obj), seen)
    return size


def estimate_node_bytes(state: State) -> int:
    """Approximate bytes per search node, sampled from one state."""
    return _deep_sizeof(state) + _NODE_OVERHEAD_BYTES


def _evaluate(h: Callable[[State], float], state: State) -> float:
    try:
        value = float(h(state))
    except MemoryError:
        raise
    except Exception as e:
        raise HeuristicFailure(f"{type(e).__name__}: {e}") from e
    if math.isnan(value):
        raise HeuristicFailure("heuristic returned NaN")
    return value


def _extract_plan(parents: Dict[State, Tuple[Optional[State], Optional[str]]],
                  goal: State) -> List[str]:
    plan = []
    state = goal
    while True:
        parent, label = parents[state]
        if parent is None:
            break
        plan.append(label)
        state = parent
    plan.reverse()
    return plan


def _graph_search(model: TaskModel,
                  limits: Limits,
                  open_list,
                  h: Optional[Callable[[State], float]],
                  algorithm: str) -> SearchResult:
    start = time.monotonic()
    deadline = start + limits.wall_clock_seconds
    memory_bytes = limits.memory_bytes
    max_expansions = limits.max_expansions
    stats = SearchStats()

    def finish(outcome: Outcome, plan=None, detail=None) -> SearchResult:
        stats.elapsed_seconds = time.monotonic() - start
        logger.info(f"{algorithm} on {model.domain_name} {model.instance_id}: "
                    f"{outcome.value} after {stats.expanded} expansions "
                    f"in {stats.elapsed_seconds:.2f}s")
        return SearchResult(outcome, plan, stats, detail)

    root = model.initial
    node_bytes = estimate_node_bytes(root)
    parents: Dict[State, Tuple[Optional[State], Optional[str]]] = {root: (None, None)}
    try:
        open_list.push(_evaluate(h, root) if h else 0.0, root)
    except HeuristicFailure as e:
        return finish(Outcome.HEURISTIC_ERROR, detail=str(e))
    stats.generated = 1
    stats.peak_open = 1

    while open_list:
        if time.monotonic() >= deadline:
            return finish(Outcome.TIMED_OUT)
        if stats.expanded and stats.expanded % MEMORY_CHECK_INTERVAL == 0:
            if len(parents) * node_bytes > memory_bytes:
                return finish(Outcome.MEMORY_OUT,
                              detail=f"estimated {len(parents) * node_bytes} bytes")
        if max_expansions is not None and stats.expanded >= max_expansions:
            return finish(Outcome.TIMED_OUT, detail="expansion limit reached")

        state = open_list.pop()
        stats.expanded += 1
        stats.peak_closed = stats.expanded
        if model.goal_test(state):
            return finish(Outcome.SOLVED, _extract_plan(parents, state))

        for transition in model.successors(state):
            stats.generated += 1
            successor = transition.successor
            if successor in parents:
                stats.duplicates += 1
                continue
            parents[successor] = (state, transition.action_label)
            try:
                priority = _evaluate(h, successor) if h else 0.0
            except HeuristicFailure as e:
                return finish(Outcome.HEURISTIC_ERROR, detail=str(e))
            open_list.push(priority, successor)
        if len(open_list) > stats.peak_open:
            stats.peak_open = len(open_list)

    return finish(Outcome.EXHAUSTED)


def bfs(model: TaskModel, limits: Limits) -> SearchResult:
    """Blind breadth-first search; plans have minimum length."""
    return _graph_search(model, limits, FifoOpenList(), None, "bfs")


def gbfs(model: TaskModel, h: Callable[[State], float], limits: Limits) -> SearchResult:
    """Greedy best-first search ordered by ascending h, FIFO among ties."""
    return _graph_search(model, limits, HeuristicOpenList(), h, "gbfs")
