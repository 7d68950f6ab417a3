"""
worker.py

Runtime of a worker executable: load one synthesized heuristic, search one instance
and print exactly one Result JSON document on stdout. Logs go to stderr.

The process caps its own address space at the memory limit plus a fixed interpreter
allowance before anything else runs, so a heuristic that allocates past the cap fails
with MemoryError inside this process.
"""

import argparse
import importlib.util
import json
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional

from .config import GIB, LOG_FORMAT, Limits
from .model import TaskModel, load_instance_file
from .search import (Outcome, SearchResult, SearchStats, bfs, gbfs,
                     result_to_json)

logger = logging.getLogger(__name__)

# Address space allowed on top of --memory-limit for the interpreter and its imports.
INTERPRETER_ALLOWANCE_BYTES = 256 * 1024 ** 2

HEURISTIC_ENTRY = "heuristic"


def limit_address_space(memory_bytes: int) -> None:
    try:
        import resource
    except ImportError:
        logger.warning("resource module unavailable; memory cap not enforced by the OS")
        return
    cap = memory_bytes + INTERPRETER_ALLOWANCE_BYTES
    _, hard = resource.getrlimit(resource.RLIMIT_AS)
    if hard != resource.RLIM_INFINITY:
        cap = min(cap, hard)
    resource.setrlimit(resource.RLIMIT_AS, (cap, hard))


def load_heuristic(path: Path, model: TaskModel) -> Callable:
    """Import the filled heuristic slot and bind it to the task."""
    spec = importlib.util.spec_from_file_location("planforge_heuristic", path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    fn = getattr(module, HEURISTIC_ENTRY)
    return lambda state: fn(state, model)


def emit(result: SearchResult) -> None:
    sys.stdout.write(json.dumps(result_to_json(result)) + "\n")
    sys.stdout.flush()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Search one instance with a synthesized heuristic")
    parser.add_argument("--instance", required=True, help="Instance JSON file")
    parser.add_argument("--algorithm", choices=["gbfs", "bfs"], default="gbfs")
    parser.add_argument("--time-limit", type=float, default=600.0, help="Seconds")
    parser.add_argument("--memory-limit", type=int, default=8 * GIB, help="Bytes")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    return parser


def main(argv: Optional[List[str]] = None, heuristic_path: Optional[str] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT,
                        stream=sys.stderr)
    limit_address_space(args.memory_limit)

    model = load_instance_file(args.instance)
    limits = Limits(wall_clock_seconds=args.time_limit, memory_bytes=args.memory_limit)

    if args.algorithm == "bfs" or heuristic_path is None:
        emit(bfs(model, limits))
        return 0

    try:
        h = load_heuristic(Path(heuristic_path), model)
    except MemoryError:
        emit(SearchResult(Outcome.MEMORY_OUT, stats=SearchStats(),
                          detail="MemoryError while loading the heuristic"))
        return 0
    except Exception as e:
        logger.error(f"Heuristic failed to load: {type(e).__name__}: {e}")
        emit(SearchResult(Outcome.HEURISTIC_ERROR, stats=SearchStats(),
                          detail=f"load failed: {type(e).__name__}: {e}"))
        return 0

    try:
        result = gbfs(model, h, limits)
    except MemoryError:
        result = SearchResult(Outcome.MEMORY_OUT, stats=SearchStats(),
                              detail="MemoryError during search")
    emit(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
