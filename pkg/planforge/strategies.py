"""
strategies.py

Fallback strategies that turn generated heuristics into plans under one total budget.

FirstCompilation (FC) queries the LLM until a heuristic compiles and then searches with
it for all remaining time. TimeSlicedRestarts (TSR) gives each compiled heuristic a
fixed slice and restarts with a fresh one when a run fails. Compile failures in TSR do
not use up a heuristic slot, but their API and compile time is charged to the budget.

Every Solved plan is replayed by the validator before the run is reported as solved.
"""

import enum
import json
import logging
import tempfile
import time
from concurrent.futures import Future, ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field

from .config import BudgetPolicy, Limits
from .heuristics import HeuristicKind, HeuristicSpec, make_heuristic
from .model import TaskModel
from .search import SearchResult, bfs, gbfs
from .synthesis.compiler import compile_heuristic
from .synthesis.config import LlmConfig
from .synthesis.errors import FixtureMissing, NoCodeBlock, ProviderError
from .synthesis.llm_client import LlmClient
from .synthesis.models import HeuristicArtifact, Phase
from .synthesis.prompts import build_prompts
from .synthesis.sandbox import run_worker
from .validator import validate

logger = logging.getLogger(__name__)

# Extra wait for an unused prefetch beyond the remaining budget.
PREFETCH_GRACE_SECONDS = 2.0


class RunOutcome(str, enum.Enum):
    """
    Final outcome of a strategy or built-in run.

    Values:
        SOLVED .. HEURISTIC_ERROR: the outcome of the last search
        BUDGET_EXHAUSTED: the total budget ran out before a solution
        COMPILE_EXHAUSTED: max_compile_retries compile failures
        SYNTHESIS_FAILED: the provider (or an offline fixture) could not answer
        INVALID_PLAN: a search reported a plan the validator rejected
    """
    SOLVED = "Solved"
    EXHAUSTED = "Exhausted"
    TIMED_OUT = "TimedOut"
    MEMORY_OUT = "MemoryOut"
    HEURISTIC_ERROR = "HeuristicError"
    BUDGET_EXHAUSTED = "BudgetExhausted"
    COMPILE_EXHAUSTED = "CompileExhausted"
    SYNTHESIS_FAILED = "SynthesisFailed"
    INVALID_PLAN = "InvalidPlan"


class StrategyKind(str, enum.Enum):
    FC = "fc"
    TSR = "tsr"
    BUILTIN = "builtin"
    PLUGIN = "plugin"


class AttemptRecord(BaseModel):
    """One heuristic request, its compilation and (if compiled) its worker run."""
    attempt_index: int
    phase: Phase
    compiled: bool = False
    diagnostics: str = ""
    outcome: Optional[str] = None
    detail: Optional[str] = None
    plan_length: Optional[int] = None
    expanded: int = 0
    api_seconds: float = 0.0
    compile_seconds: float = 0.0
    search_seconds: float = 0.0
    input_tokens: int = 0
    output_tokens: int = 0
    prefetched: bool = False


class RunRecord(BaseModel):
    instance_id: str
    domain: str
    strategy: StrategyKind
    configuration: str = ""
    attempts: List[AttemptRecord] = Field(default_factory=list)
    outcome: RunOutcome = RunOutcome.BUDGET_EXHAUSTED
    plan: Optional[List[str]] = None
    api_seconds: float = 0.0
    compile_seconds: float = 0.0
    search_seconds: float = 0.0
    wall_seconds: float = 0.0
    input_tokens: int = 0
    output_tokens: int = 0
    expanded: int = 0

    @property
    def solved(self) -> bool:
        return self.outcome is RunOutcome.SOLVED

    @property
    def compile_failures(self) -> int:
        return sum(1 for a in self.attempts if not a.compiled)

    @property
    def worker_runs(self) -> int:
        return sum(1 for a in self.attempts if a.outcome is not None)

    def add(self, attempt: AttemptRecord) -> None:
        self.attempts.append(attempt)
        self.charge(attempt)

    def charge(self, attempt: AttemptRecord) -> None:
        """Count an attempt's time and tokens without listing it (a request that never produced code)."""
        self.api_seconds += attempt.api_seconds
        self.compile_seconds += attempt.compile_seconds
        self.search_seconds += attempt.search_seconds
        self.input_tokens += attempt.input_tokens
        self.output_tokens += attempt.output_tokens
        self.expanded += attempt.expanded


def _checked_outcome(model: TaskModel, result: SearchResult) -> RunOutcome:
    if not result.solved:
        return RunOutcome(result.outcome.value)
    report = validate(model, result.plan or [])
    if not report.valid:
        logger.error(f"Plan for {model.instance_id} rejected by the validator: {report}")
        return RunOutcome.INVALID_PLAN
    return RunOutcome.SOLVED


def instance_file(model: TaskModel, work_dir: Path) -> Path:
    """The instance path handed to workers, written out when the model came from memory."""
    if model.instance_path is not None:
        return Path(model.instance_path)
    path = work_dir / f"{model.instance_id or 'instance'}.json"
    path.write_text(json.dumps(model.instance_doc), encoding="utf-8")
    return path


def _charge_transcripts(record: AttemptRecord, error: Exception, api_started: float) -> None:
    record.api_seconds = time.monotonic() - api_started
    for t in getattr(error, "transcripts", []):
        record.input_tokens += t.input_tokens
        record.output_tokens += t.output_tokens


def _synthesis_failure(run: RunRecord, runner: "StrategyRunner", error: Exception,
                       attempt_index: int) -> RunOutcome:
    record = getattr(error, "record", None)
    if record is not None:
        run.charge(record)
    if runner.remaining() <= 0:
        logger.warning(f"Budget ran out during the request for attempt {attempt_index}: {error}")
        return RunOutcome.BUDGET_EXHAUSTED
    logger.error(f"Synthesis failed on attempt {attempt_index}: {error}")
    return RunOutcome.SYNTHESIS_FAILED


class StrategyRunner:
    """
    Shared machinery of FC and TSR for one task.

    Args:
        model: The task to solve.
        llm_config: Provider configuration.
        budget: Budget and prompt options.
        client: Client to reuse (keeps the domain-phase cache across instances).
        work_dir: Root for worker builds; a temporary directory when omitted.
    """

    def __init__(self,
                 model: TaskModel,
                 llm_config: LlmConfig,
                 budget: BudgetPolicy,
                 client: Optional[LlmClient] = None,
                 work_dir: Optional[Path] = None):
        self.model = model
        self.budget = budget
        self.client = client or LlmClient(llm_config, budget.cache_domain_phases)
        self.work_dir = Path(work_dir) if work_dir else Path(tempfile.mkdtemp(prefix="planforge-run-"))
        self.work_dir.mkdir(parents=True, exist_ok=True)
        self.instance_path = instance_file(model, self.work_dir)
        self.domain_source = model.domain.source_text()
        self.started = time.monotonic()
        self.deadline = self.started + budget.total_seconds

    def remaining(self) -> float:
        return self.deadline - time.monotonic()

    def synthesize(self, attempt_index: int) -> Tuple[Optional[HeuristicArtifact], AttemptRecord]:
        """
        Request and compile one heuristic.

        Raises:
            ProviderError, FixtureMissing: When no answer can be obtained. The exception's
                ``record`` holds the time and tokens spent on the phases that did answer.
        """
        refine = self.budget.refines(attempt_index)
        phase = Phase.REFINED if refine else Phase.UNREFINED
        bundle = build_prompts(self.domain_source,
                               self.model.instance_json() if self.budget.refine else None,
                               strategize=self.budget.strategize,
                               refine=refine)
        record = AttemptRecord(attempt_index=attempt_index, phase=phase)

        api_started = time.monotonic()
        try:
            source, transcripts = self.client.request_heuristic(
                bundle, self.model.domain_name, attempt_index, deadline=self.deadline)
        except NoCodeBlock as e:
            _charge_transcripts(record, e, api_started)
            record.diagnostics = str(e)
            return None, record
        except (ProviderError, FixtureMissing) as e:
            _charge_transcripts(record, e, api_started)
            e.record = record
            raise
        record.api_seconds = time.monotonic() - api_started
        record.input_tokens = sum(t.input_tokens for t in transcripts)
        record.output_tokens = sum(t.output_tokens for t in transcripts)

        build_dir = (self.work_dir / self.model.domain_name /
                     f"{self.model.instance_id or 'instance'}" /
                     f"attempt-{attempt_index}-{phase.value}")
        timeout = max(1.0, min(self.budget.compile_timeout_seconds, self.remaining()))
        artifact = compile_heuristic(source, build_dir=build_dir, phase=phase,
                                     attempt_index=attempt_index, timeout_seconds=timeout)
        artifact.transcripts = transcripts
        record.compile_seconds = artifact.compile_seconds
        record.compiled = artifact.compiled
        record.diagnostics = artifact.compile_status.diagnostics
        return artifact, record

    def search(self, artifact: HeuristicArtifact, record: AttemptRecord,
               seconds: float) -> SearchResult:
        limits = Limits(wall_clock_seconds=seconds, memory_bytes=self.budget.memory_bytes)
        search_started = time.monotonic()
        result = run_worker(artifact, self.instance_path, limits)
        record.search_seconds = time.monotonic() - search_started
        record.outcome = result.outcome.value
        record.detail = result.detail
        record.expanded = result.stats.expanded
        if result.plan is not None:
            record.plan_length = len(result.plan)
        return result

    def new_record(self, strategy: StrategyKind, configuration: str) -> RunRecord:
        return RunRecord(instance_id=self.model.instance_id,
                         domain=self.model.domain_name,
                         strategy=strategy,
                         configuration=configuration or strategy.value)

    def finish(self, run: RunRecord) -> RunRecord:
        run.wall_seconds = time.monotonic() - self.started
        logger.info(f"{run.strategy.value} on {run.domain} {run.instance_id}: {run.outcome.value} "
                    f"after {len(run.attempts)} attempts, {run.wall_seconds:.2f}s, "
                    f"{run.input_tokens}/{run.output_tokens} tokens")
        return run

    def log_attempt(self, record: AttemptRecord) -> None:
        status = "compiled" if record.compiled else "compile failed"
        logger.info(f"Attempt {record.attempt_index} ({record.phase.value}): {status}, "
                    f"outcome {record.outcome or '-'}, {self.remaining():.1f}s left")


def run_fc(model: TaskModel,
           llm_config: LlmConfig,
           budget: BudgetPolicy,
           client: Optional[LlmClient] = None,
           work_dir: Optional[Path] = None,
           configuration: str = "") -> RunRecord:
    """FirstCompilation: search with the first heuristic that compiles, for all remaining time."""
    runner = StrategyRunner(model, llm_config, budget, client, work_dir)
    run = runner.new_record(StrategyKind.FC, configuration)
    attempt_index = 0
    compile_failures = 0

    while True:
        if runner.remaining() <= 0:
            run.outcome = RunOutcome.BUDGET_EXHAUSTED
            break
        attempt_index += 1
        try:
            artifact, record = runner.synthesize(attempt_index)
        except (ProviderError, FixtureMissing) as e:
            run.outcome = _synthesis_failure(run, runner, e, attempt_index)
            break

        if artifact is None or not artifact.compiled:
            run.add(record)
            runner.log_attempt(record)
            compile_failures += 1
            if compile_failures >= budget.max_compile_retries:
                run.outcome = RunOutcome.COMPILE_EXHAUSTED
                break
            continue

        remaining = runner.remaining()
        if remaining <= 0:
            run.add(record)
            run.outcome = RunOutcome.BUDGET_EXHAUSTED
            break
        result = runner.search(artifact, record, remaining)
        run.add(record)
        runner.log_attempt(record)
        run.outcome = _checked_outcome(model, result)
        if run.outcome is RunOutcome.SOLVED:
            run.plan = result.plan
        break

    return runner.finish(run)


def _charge_overlap(record: AttemptRecord, waited: float) -> None:
    """Scale a prefetched attempt's API and compile time down to the time actually waited."""
    own = record.api_seconds + record.compile_seconds
    if own <= 0:
        return
    factor = min(1.0, waited / own)
    record.api_seconds *= factor
    record.compile_seconds *= factor
    record.prefetched = True


def _collect_unused_prefetch(run: RunRecord, runner: StrategyRunner, pending: Future) -> None:
    """Wait for a prefetched request no slice will use and count its tokens and time."""
    wait_started = time.monotonic()
    try:
        artifact, record = pending.result(timeout=max(0.0, runner.remaining()) + PREFETCH_GRACE_SECONDS)
    except FutureTimeout:
        logger.warning("Prefetched request still running after the budget; its usage is not recorded")
        return
    except (ProviderError, FixtureMissing) as e:
        record = getattr(e, "record", None)
        if record is not None:
            run.charge(record)
        return
    _charge_overlap(record, time.monotonic() - wait_started)
    record.prefetched = True
    run.add(record)
    logger.info(f"Prefetched attempt {record.attempt_index} unused; "
                f"{record.input_tokens}/{record.output_tokens} tokens counted")


def run_tsr(model: TaskModel,
            llm_config: LlmConfig,
            budget: BudgetPolicy,
            client: Optional[LlmClient] = None,
            work_dir: Optional[Path] = None,
            configuration: str = "") -> RunRecord:
    """TimeSlicedRestarts: up to max_heuristics workers, each for min(slice, remaining)."""
    runner = StrategyRunner(model, llm_config, budget, client, work_dir)
    run = runner.new_record(StrategyKind.TSR, configuration)
    attempt_index = 0
    compile_failures = 0
    last_outcome: Optional[RunOutcome] = None
    executor = ThreadPoolExecutor(max_workers=1) if budget.prefetch else None
    pending: Optional[Future] = None

    try:
        while run.worker_runs < budget.max_heuristics:
            if runner.remaining() <= 0:
                last_outcome = RunOutcome.BUDGET_EXHAUSTED
                break
            attempt_index += 1
            try:
                if pending is not None:
                    future, pending = pending, None
                    wait_started = time.monotonic()
                    artifact, record = future.result()
                    _charge_overlap(record, time.monotonic() - wait_started)
                else:
                    artifact, record = runner.synthesize(attempt_index)
            except (ProviderError, FixtureMissing) as e:
                last_outcome = _synthesis_failure(run, runner, e, attempt_index)
                break

            if artifact is None or not artifact.compiled:
                run.add(record)
                runner.log_attempt(record)
                compile_failures += 1
                if compile_failures >= budget.max_compile_retries:
                    last_outcome = RunOutcome.COMPILE_EXHAUSTED
                    break
                continue

            remaining = runner.remaining()
            if remaining <= 0:
                run.add(record)
                last_outcome = RunOutcome.BUDGET_EXHAUSTED
                break
            slice_seconds = min(budget.slice_seconds, remaining)
            if (executor is not None and run.worker_runs + 1 < budget.max_heuristics
                    and remaining > budget.slice_seconds):
                pending = executor.submit(runner.synthesize, attempt_index + 1)

            result = runner.search(artifact, record, slice_seconds)
            run.add(record)
            runner.log_attempt(record)
            last_outcome = _checked_outcome(model, result)
            if last_outcome is RunOutcome.SOLVED:
                run.plan = result.plan
                break
    finally:
        if pending is not None:
            _collect_unused_prefetch(run, runner, pending)
        if executor is not None:
            executor.shutdown(wait=False, cancel_futures=True)

    run.outcome = last_outcome or RunOutcome.BUDGET_EXHAUSTED
    return runner.finish(run)


def run_builtin(model: TaskModel,
                heuristic: HeuristicSpec,
                algorithm: str,
                limits: Limits,
                configuration: str = "") -> RunRecord:
    """
    One in-process search with a built-in heuristic.

    Raises:
        ValueError: For plugin heuristics or an unknown algorithm.
    """
    if heuristic.kind is HeuristicKind.PLUGIN:
        raise ValueError("plugin heuristics run through run_plugin")
    started = time.monotonic()
    if algorithm == "bfs":
        result = bfs(model, limits)
    elif algorithm == "gbfs":
        result = gbfs(model, make_heuristic(heuristic, model), limits)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return _single_run(model, StrategyKind.BUILTIN,
                       configuration or f"{algorithm}-{heuristic}", result, started)


def run_plugin(model: TaskModel,
               source_path: Path,
               algorithm: str,
               limits: Limits,
               work_dir: Optional[Path] = None,
               configuration: str = "") -> RunRecord:
    """Compile a heuristic source file into a worker and run it once."""
    started = time.monotonic()
    work_dir = Path(work_dir) if work_dir else Path(tempfile.mkdtemp(prefix="planforge-plugin-"))
    source = Path(source_path).read_text(encoding="utf-8")
    artifact = compile_heuristic(source, build_dir=work_dir / "plugin")
    record = AttemptRecord(attempt_index=1, phase=Phase.UNREFINED,
                           compiled=artifact.compiled,
                           diagnostics=artifact.compile_status.diagnostics,
                           compile_seconds=artifact.compile_seconds)
    run = RunRecord(instance_id=model.instance_id, domain=model.domain_name,
                    strategy=StrategyKind.PLUGIN,
                    configuration=configuration or f"{algorithm}-plugin")
    if not artifact.compiled:
        logger.error(f"Plugin {source_path} failed to compile:\n{artifact.compile_status.diagnostics}")
        run.add(record)
        run.outcome = RunOutcome.COMPILE_EXHAUSTED
        run.wall_seconds = time.monotonic() - started
        return run

    search_started = time.monotonic()
    result = run_worker(artifact, instance_file(model, work_dir), limits, algorithm)
    record.search_seconds = time.monotonic() - search_started
    record.outcome = result.outcome.value
    record.detail = result.detail
    record.expanded = result.stats.expanded
    run.add(record)
    run.outcome = _checked_outcome(model, result)
    if run.outcome is RunOutcome.SOLVED:
        run.plan = result.plan
    run.wall_seconds = time.monotonic() - started
    return run


def _single_run(model: TaskModel, strategy: StrategyKind, configuration: str,
                result: SearchResult, started: float) -> RunRecord:
    run = RunRecord(instance_id=model.instance_id,
                    domain=model.domain_name,
                    strategy=strategy,
                    configuration=configuration,
                    outcome=_checked_outcome(model, result),
                    search_seconds=result.stats.elapsed_seconds,
                    expanded=result.stats.expanded)
    if run.outcome is RunOutcome.SOLVED:
        run.plan = result.plan
    run.wall_seconds = time.monotonic() - started
    return run

