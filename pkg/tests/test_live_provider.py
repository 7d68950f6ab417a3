"""Smoke test against a live provider; skipped unless credentials are configured."""

import os

import pytest

from planforge.config import BudgetPolicy
from planforge.strategies import RunOutcome, run_tsr
from planforge.synthesis.config import LlmConfig, Provider

from conftest import load_fixture

pytestmark = [
    pytest.mark.network,
    pytest.mark.skipif(
        not any(os.environ.get(v) for v in ("PLANFORGE_API_KEY", "OPENAI_API_KEY")),
        reason="no provider credentials in the environment"),
]


def test_tsr_on_small_counters(tmp_path):
    config = LlmConfig(provider=Provider.HTTP_API,
                       model_id=os.environ.get("PLANFORGE_MODEL", "gpt-4.1"),
                       max_retries=2)
    policy = BudgetPolicy(total_seconds=300, slice_seconds=60, max_heuristics=2)
    run = run_tsr(load_fixture("counters_n3"), config, policy, work_dir=tmp_path)
    assert run.outcome is not RunOutcome.SYNTHESIS_FAILED
    assert run.attempts
    assert run.input_tokens > 0
    if run.solved:
        assert run.plan is not None
