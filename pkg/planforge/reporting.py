"""
reporting.py

Coverage and cost tables over strategy run records.

One row per (domain, configuration): solved and attempted counts, mean API, compile and
search seconds, mean input and output tokens per run, and the compile-failure rate
(failed compilations over all heuristic attempts). Coverage is reported as counts.
A second file ``<stem>_instances.csv`` lists per-instance total and search-only times.
"""

import csv
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from .errors import EmptyReport, IoError
from .strategies import RunRecord

logger = logging.getLogger(__name__)

COVERAGE_COLUMNS = [
    "domain", "configuration", "solved", "attempted",
    "mean_api_seconds", "mean_compile_seconds", "mean_search_seconds",
    "mean_input_tokens", "mean_output_tokens", "compile_failure_rate",
]

INSTANCE_COLUMNS = [
    "domain", "configuration", "instance", "outcome", "total_seconds", "search_seconds",
    "api_seconds", "compile_seconds", "input_tokens", "output_tokens", "attempts",
]


class CoverageRow(BaseModel):
    domain: str
    configuration: str
    solved: int
    attempted: int
    mean_api_seconds: float
    mean_compile_seconds: float
    mean_search_seconds: float
    mean_input_tokens: float
    mean_output_tokens: float
    compile_failure_rate: float

    @property
    def coverage(self) -> str:
        return f"{self.solved}/{self.attempted}"


def coverage_rows(records: Sequence[RunRecord]) -> List[CoverageRow]:
    """
    Aggregate run records per (domain, configuration), sorted by key.

    Raises:
        EmptyReport: If records is empty.
    """
    if not records:
        raise EmptyReport("no run records to report")

    groups: Dict[Tuple[str, str], List[RunRecord]] = defaultdict(list)
    for record in records:
        groups[(record.domain, record.configuration or record.strategy.value)].append(record)

    rows = []
    for (domain, configuration), group in sorted(groups.items()):
        attempts = sum(len(r.attempts) for r in group)
        failures = sum(r.compile_failures for r in group)
        rows.append(CoverageRow(
            domain=domain,
            configuration=configuration,
            solved=sum(1 for r in group if r.solved),
            attempted=len(group),
            mean_api_seconds=float(np.mean([r.api_seconds for r in group])),
            mean_compile_seconds=float(np.mean([r.compile_seconds for r in group])),
            mean_search_seconds=float(np.mean([r.search_seconds for r in group])),
            mean_input_tokens=float(np.mean([r.input_tokens for r in group])),
            mean_output_tokens=float(np.mean([r.output_tokens for r in group])),
            compile_failure_rate=failures / attempts if attempts else 0.0,
        ))
    return rows


def instances_path(out: Path) -> Path:
    return out.with_name(f"{out.stem}_instances.csv")


def report(records: Sequence[RunRecord], out: Union[str, Path]) -> List[CoverageRow]:
    """
    Write the coverage table to ``out`` and the per-instance table next to it.

    Returns:
        The coverage rows written.

    Raises:
        EmptyReport: If records is empty.
        IoError: If a file cannot be written.
    """
    rows = coverage_rows(records)
    out = Path(out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=COVERAGE_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow(row.model_dump())

        with instances_path(out).open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=INSTANCE_COLUMNS)
            writer.writeheader()
            for r in sorted(records, key=lambda r: (r.domain, r.configuration, r.instance_id)):
                writer.writerow({
                    "domain": r.domain,
                    "configuration": r.configuration or r.strategy.value,
                    "instance": r.instance_id,
                    "outcome": r.outcome.value,
                    "total_seconds": round(r.wall_seconds, 6),
                    "search_seconds": round(r.search_seconds, 6),
                    "api_seconds": round(r.api_seconds, 6),
                    "compile_seconds": round(r.compile_seconds, 6),
                    "input_tokens": r.input_tokens,
                    "output_tokens": r.output_tokens,
                    "attempts": len(r.attempts),
                })
    except OSError as e:
        raise IoError(f"cannot write report {out}: {e}") from e

    logger.info(f"Wrote coverage for {len(records)} runs in {len(rows)} groups to {out}")
    return rows
