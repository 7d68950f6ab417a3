"""
bench.py

Benchmark runs: every instance of a suite directory under every named configuration of
a bench config file, in parallel worker processes bounded by ``jobs``.

Bench config shape::

    {
      "work_dir": "optional build root",
      "configurations": [
        {"name": "gbfs-hmd", "kind": "builtin", "algorithm": "gbfs", "heuristic": "hmd",
         "limits": {"wall_clock_seconds": 60}},
        {"name": "tsr5", "kind": "tsr", "llm": {...LlmConfig...}, "budget": {...BudgetPolicy...}}
      ]
    }

Relative ``fixtures_dir`` entries resolve against the config file's directory.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .config import BudgetPolicy, Limits
from .errors import PlanForgeError, SchemaViolation
from .heuristics import HeuristicSpec
from .model import load_instance_file
from .strategies import RunRecord, run_builtin, run_fc, run_tsr
from .synthesis.config import LlmConfig
from .synthesis.llm_client import LlmClient

logger = logging.getLogger(__name__)


class BenchEntry(BaseModel):
    """One named configuration."""
    name: str
    kind: Literal["builtin", "fc", "tsr"]
    algorithm: Literal["bfs", "gbfs"] = "gbfs"
    heuristic: str = "hmd"
    limits: Limits = Field(default_factory=Limits)
    llm: Optional[LlmConfig] = None
    budget: BudgetPolicy = Field(default_factory=BudgetPolicy)

    @field_validator('heuristic')
    @classmethod
    def validate_heuristic(cls, v):
        spec = HeuristicSpec.parse(v)
        if spec.plugin_path is not None:
            raise ValueError("bench configurations use built-in heuristics only")
        return v

    @model_validator(mode='after')
    def validate_llm_present(self):
        if self.kind in ("fc", "tsr") and self.llm is None:
            raise ValueError(f"configuration {self.name!r} needs an llm block")
        return self


class BenchConfig(BaseModel):
    configurations: List[BenchEntry] = Field(..., min_length=1)
    work_dir: Optional[Path] = None

    @field_validator('configurations')
    @classmethod
    def validate_unique_names(cls, v):
        names = [entry.name for entry in v]
        if len(set(names)) != len(names):
            raise ValueError("configuration names must be unique")
        return v


def load_bench_config(path: Union[str, Path]) -> BenchConfig:
    """
    Read and validate a bench config file.

    Raises:
        SchemaViolation: If the file is not valid JSON or fails validation.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaViolation("", f"{path} is not valid JSON: {e}") from e
    for entry in doc.get("configurations", []):
        llm = entry.get("llm") or {}
        if llm.get("fixtures_dir") and not Path(llm["fixtures_dir"]).is_absolute():
            llm["fixtures_dir"] = str((path.parent / llm["fixtures_dir"]).resolve())
    if doc.get("work_dir") and not Path(doc["work_dir"]).is_absolute():
        doc["work_dir"] = str((path.parent / doc["work_dir"]).resolve())
    try:
        return BenchConfig.model_validate(doc)
    except ValidationError as e:
        err = e.errors()[0]
        raise SchemaViolation(".".join(str(p) for p in err.get("loc", ())),
                              err.get("msg", "invalid value")) from e


# One client per configuration and process, so domain phases can be cached across instances.
_CLIENTS: Dict[str, LlmClient] = {}


def _client_for(entry: BenchEntry) -> LlmClient:
    if entry.name not in _CLIENTS:
        _CLIENTS[entry.name] = LlmClient(entry.llm, entry.budget.cache_domain_phases)
    return _CLIENTS[entry.name]


def run_one(instance_path: Path, entry: BenchEntry,
            work_dir: Optional[Path] = None) -> RunRecord:
    """Run one configuration on one instance file."""
    model = load_instance_file(instance_path)
    if entry.kind == "builtin":
        return run_builtin(model, HeuristicSpec.parse(entry.heuristic), entry.algorithm,
                           entry.limits, configuration=entry.name)
    job_dir = (work_dir / entry.name / model.instance_id) if work_dir else None
    strategy = run_fc if entry.kind == "fc" else run_tsr
    return strategy(model, entry.llm, entry.budget, client=_client_for(entry),
                    work_dir=job_dir, configuration=entry.name)


def _run_job(instance_path: Path, entry: BenchEntry,
             work_dir: Optional[Path]) -> Optional[dict]:
    try:
        return run_one(instance_path, entry, work_dir).model_dump(mode="json")
    except PlanForgeError as e:
        logger.error(f"Skipping {instance_path.name} under {entry.name}: {e}")
        return None


def suite_instances(suite_dir: Union[str, Path]) -> List[Path]:
    suite_dir = Path(suite_dir)
    if not suite_dir.is_dir():
        raise SchemaViolation("suite", f"{suite_dir} is not a directory")
    return sorted(suite_dir.rglob("*.json"))


def run_bench(suite_dir: Union[str, Path], config: BenchConfig, jobs: int = 1) -> List[RunRecord]:
    """
    Run every (instance, configuration) pair of the suite.

    Args:
        suite_dir: Directory searched recursively for instance JSON files.
        config: Validated bench configuration.
        jobs: Number of parallel worker processes; 1 runs in this process.

    Returns:
        Run records sorted by configuration, domain and instance.
    """
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    instances = suite_instances(suite_dir)
    pairs: List[Tuple[Path, BenchEntry]] = [(p, e) for e in config.configurations for p in instances]
    logger.info(f"Benchmarking {len(instances)} instances x {len(config.configurations)} "
                f"configurations with {jobs} jobs")

    docs: List[dict] = []
    if jobs == 1:
        for path, entry in pairs:
            doc = _run_job(path, entry, config.work_dir)
            if doc is not None:
                docs.append(doc)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_job, path, entry, config.work_dir) for path, entry in pairs]
            for future in as_completed(futures):
                doc = future.result()
                if doc is not None:
                    docs.append(doc)

    records = [RunRecord.model_validate(doc) for doc in docs]
    records.sort(key=lambda r: (r.configuration, r.domain, r.instance_id))
    solved = sum(1 for r in records if r.solved)
    logger.info(f"Bench finished: {solved}/{len(records)} runs solved")
    return records
