"""
Shared pytest fixtures: instance loading, heuristic sources of known behaviour and a
builder for offline LLM response schedules.
"""

import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from planforge.model import TaskModel, load_instance, load_instance_file  # noqa: E402

INSTANCES = ROOT / "fixtures" / "instances"
LLM_FIXTURES = ROOT / "fixtures" / "llm"

MIB = 1024 ** 2

GOOD_COUNTERS = """
def heuristic(state, task) -> float:
    values = state.values
    return float(sum(max(0, values[i] + 1 - values[i + 1]) for i in range(len(values) - 1)))
"""

BROKEN = """
def heuristic(state, task) -> float
    return 0.0
"""

WRONG_SIGNATURE = """
def heuristic(state) -> float:
    return 0.0
"""

LOOPING = """
def heuristic(state, task) -> float:
    while True:
        pass
"""

CRASH_AT_IMPORT = """
raise RuntimeError("crashed while loading")


def heuristic(state, task) -> float:
    return 0.0
"""

RAISING = """
def heuristic(state, task) -> float:
    raise ValueError("cannot score this state")
"""

RETURNS_NAN = """
def heuristic(state, task) -> float:
    return float("nan")
"""

HOG_CAP_BYTES = 256 * MIB

MEMORY_HOG = f"""
def heuristic(state, task) -> float:
    blob = bytearray({2 * HOG_CAP_BYTES})
    return float(len(blob))
"""

SOURCES = {
    "good": GOOD_COUNTERS,
    "broken": BROKEN,
    "wrong_signature": WRONG_SIGNATURE,
    "looping": LOOPING,
    "crash": CRASH_AT_IMPORT,
    "raising": RAISING,
    "nan": RETURNS_NAN,
    "hog": MEMORY_HOG,
}


def load_fixture(name: str) -> TaskModel:
    """Load fixtures/instances/<name>.json."""
    return load_instance_file(INSTANCES / f"{name}.json")


def counters(n: int, max_value: int, values: Optional[List[int]] = None,
             goal="builtin") -> TaskModel:
    params = {"n": n, "max": max_value}
    if values is not None:
        params["values"] = values
    return load_instance({"domain": "counters", "parameters": params, "goal": goal},
                         instance_id=f"counters-{n}-{max_value}")


def prime_sieve(limit: int) -> np.ndarray:
    """flags[n] is True iff n is prime, for 0 <= n <= limit."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, int(limit ** 0.5) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return flags


def twin_table(limit: int) -> np.ndarray:
    """flags[n] is True iff n is a prime with n - 2 or n + 2 prime, for 0 <= n <= limit."""
    primes = prime_sieve(limit + 2)
    twins = np.zeros(limit + 1, dtype=bool)
    twins[2:] = primes[2:limit + 1] & (primes[:limit - 1] | primes[4:limit + 3])
    return twins


def replay(model: TaskModel, plan: Sequence[str]):
    """The state reached by applying plan from the initial state."""
    state = model.initial
    for label in plan:
        state = next(t.successor for t in model.successors(state) if t.action_label == label)
    return state


def write_instance(directory: Path, name: str, doc: Dict) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def write_schedule(root: Path,
                   domain: str,
                   kinds: Sequence[str],
                   phase: str = "unrefined",
                   usage: Optional[Sequence[Optional[Dict[str, int]]]] = None) -> Path:
    """
    Write one offline response per attempt: attempt k answers with SOURCES[kinds[k-1]]
    (or the literal text when the kind is not a known name).
    """
    phase_dir = root / domain / phase
    phase_dir.mkdir(parents=True, exist_ok=True)
    for k, kind in enumerate(kinds, start=1):
        source = SOURCES.get(kind, kind)
        (phase_dir / f"{k}.md").write_text(
            f"Attempt {k}.\n\n```python\n{source.strip()}\n```\n", encoding="utf-8")
        if usage is not None and usage[k - 1] is not None:
            (phase_dir / f"{k}.usage.json").write_text(json.dumps(usage[k - 1]),
                                                       encoding="utf-8")
    return root


@pytest.fixture
def fixture_model():
    return load_fixture


@pytest.fixture
def llm_root(tmp_path) -> Path:
    root = tmp_path / "llm"
    root.mkdir()
    return root
