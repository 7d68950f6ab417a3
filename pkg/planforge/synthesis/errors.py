"""
Custom exceptions for heuristic synthesis error handling.
"""

from ..errors import PlanForgeError


class SynthesisError(PlanForgeError):
    """Base exception class for heuristic synthesis errors."""
    pass


class MissingInstance(SynthesisError):
    """Raised when the refinement phase is requested without an instance document."""
    pass


class ProviderError(SynthesisError):
    """Raised when the LLM provider returns an error."""

    def __init__(self, status: int, body: str):
        self.status = status
        self.body = body
        super().__init__(f"Provider error {status}: {body[:500]}")


class RateLimitError(ProviderError):
    """Raised when provider rate limits are hit."""
    pass


class FixtureMissing(SynthesisError):
    """Raised when an offline response fixture does not exist."""

    def __init__(self, key):
        self.key = key
        super().__init__(f"No offline fixture for {key}")


class NoCodeBlock(SynthesisError):
    """Raised when a response contains no fenced code block."""
    pass


class ToolchainMissing(SynthesisError):
    """Raised when the heuristic toolchain or the worker template is unavailable."""
    pass


class WorkerCrashed(SynthesisError):
    """A worker died without a result; mapped into a SearchResult outcome, never raised out."""

    def __init__(self, code: int, stderr: str = ""):
        self.code = code
        self.stderr = stderr
        super().__init__(f"Worker exited with code {code}")
