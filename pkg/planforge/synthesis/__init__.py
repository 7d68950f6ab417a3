"""
Heuristic synthesis module: prompts, LLM client, compilation into worker executables
and sandboxed worker runs.
"""

from .compiler import compile_heuristic
from .config import ApiFlavor, LlmConfig, Provider
from .errors import (FixtureMissing, MissingInstance, NoCodeBlock, ProviderError,
                     RateLimitError, SynthesisError, ToolchainMissing, WorkerCrashed)
from .llm_client import FixtureStore, LlmClient, request_heuristic
from .models import (CompileStatus, HeuristicArtifact, Phase, PromptBundle,
                     TranscriptRecord)
from .prompts import build_prompts, extract_code
from .sandbox import run_worker

__all__ = [
    'ApiFlavor',
    'CompileStatus',
    'FixtureMissing',
    'FixtureStore',
    'HeuristicArtifact',
    'LlmClient',
    'LlmConfig',
    'MissingInstance',
    'NoCodeBlock',
    'Phase',
    'PromptBundle',
    'Provider',
    'ProviderError',
    'RateLimitError',
    'SynthesisError',
    'ToolchainMissing',
    'TranscriptRecord',
    'WorkerCrashed',
    'build_prompts',
    'compile_heuristic',
    'extract_code',
    'request_heuristic',
    'run_worker',
]
