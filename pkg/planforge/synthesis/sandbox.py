"""
sandbox.py

Run a compiled worker as an isolated child process under a wall-clock cap and parse
its Result JSON. No worker failure mode escapes as an exception: hangs become TimedOut,
memory exhaustion becomes MemoryOut and every other crash becomes HeuristicError.
"""

import json
import logging
import os
import signal
import subprocess
import time
from pathlib import Path
from typing import Optional, Union

from ..config import Limits
from ..search import Outcome, SearchResult, SearchStats, result_from_json
from .errors import WorkerCrashed
from .models import HeuristicArtifact

logger = logging.getLogger(__name__)

# Extra wall-clock time granted before the process group is killed.
KILL_GRACE_SECONDS = 0.5

_STDERR_TAIL = 2000


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def _parse_stdout(stdout: str) -> Optional[SearchResult]:
    for line in reversed(stdout.strip().splitlines()):
        line = line.strip()
        if not line.startswith("{"):
            continue
        try:
            return result_from_json(json.loads(line))
        except (ValueError, KeyError, TypeError):
            continue
    return None


def _crash_outcome(crash: WorkerCrashed) -> Outcome:
    if "MemoryError" in crash.stderr:
        return Outcome.MEMORY_OUT
    # The kernel OOM killer and RLIMIT_AS failures outside Python end in SIGKILL.
    if crash.code == -signal.SIGKILL:
        return Outcome.MEMORY_OUT
    return Outcome.HEURISTIC_ERROR


def run_worker(artifact: HeuristicArtifact,
               instance: Union[str, Path],
               limits: Limits,
               algorithm: str = "gbfs") -> SearchResult:
    """
    Execute the artifact's worker on one instance.

    Args:
        artifact: A compiled heuristic artifact.
        instance: Instance JSON file passed to the worker.
        limits: Wall-clock and memory caps for this slice.
        algorithm: Search algorithm flag passed to the worker.

    Returns:
        SearchResult parsed from the worker, or synthesized from how it died.

    Raises:
        ValueError: If the artifact did not compile.
    """
    if not artifact.compiled:
        raise ValueError("run_worker needs a compiled artifact")

    cmd = [str(artifact.compile_status.worker_path),
           "--instance", str(instance),
           "--algorithm", algorithm,
           "--time-limit", repr(float(limits.wall_clock_seconds)),
           "--memory-limit", str(limits.memory_bytes)]
    started = time.monotonic()
    proc = subprocess.Popen(cmd, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
                            stdin=subprocess.DEVNULL, text=True, start_new_session=True)
    try:
        stdout, stderr = proc.communicate(timeout=limits.wall_clock_seconds + KILL_GRACE_SECONDS)
    except subprocess.TimeoutExpired:
        _kill_group(proc)
        proc.communicate()
        elapsed = time.monotonic() - started
        logger.warning(f"Worker for attempt {artifact.attempt_index} killed after {elapsed:.2f}s")
        return SearchResult(Outcome.TIMED_OUT,
                            stats=SearchStats(elapsed_seconds=elapsed),
                            detail="worker killed at the wall-clock limit")
    elapsed = time.monotonic() - started

    result = _parse_stdout(stdout)
    if result is not None:
        logger.info(f"Worker for attempt {artifact.attempt_index}: {result.outcome.value} "
                    f"in {elapsed:.2f}s")
        return result

    crash = WorkerCrashed(proc.returncode, stderr[-_STDERR_TAIL:])
    outcome = _crash_outcome(crash)
    logger.error(f"{crash}; mapped to {outcome.value}")
    return SearchResult(outcome,
                        stats=SearchStats(elapsed_seconds=elapsed),
                        detail=f"{crash}: {crash.stderr.strip()[-500:]}")
