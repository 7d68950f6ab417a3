"""
LLM client interface for requesting heuristics, with retry logic, provider adapters
and an offline fixture mode.

A request runs the enabled prompt phases as one conversation: every phase sees the
prompts and answers of the phases before it. The code block of the final phase's
answer is the heuristic source.
"""

import json
import logging
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import openai
import requests
from openai import OpenAI

from .config import ApiFlavor, LlmConfig, Provider
from .errors import (FixtureMissing, NoCodeBlock, ProviderError, RateLimitError,
                     SynthesisError)
from .models import Phase, PromptBundle, TranscriptRecord
from .prompts import extract_code

logger = logging.getLogger(__name__)

ANTHROPIC_DEFAULT_URL = "https://api.anthropic.com"
ANTHROPIC_VERSION = "2023-06-01"

Message = Dict[str, str]


@dataclass
class ChatReply:
    """One normalized provider answer."""
    text: str
    input_tokens: int = 0
    output_tokens: int = 0
    usage_missing: bool = False


class _Retryable(Exception):
    """Internal: a transient failure worth another attempt."""

    def __init__(self, kind: str, cause: Exception):
        self.kind = kind
        self.cause = cause
        super().__init__(str(cause))


class ChatAdapter:
    """Retry loop with exponential backoff shared by the HTTP adapters."""

    def __init__(self, config: LlmConfig):
        self.config = config

    def _send(self, messages: List[Message], timeout: float) -> ChatReply:
        raise NotImplementedError

    def request_timeout(self, deadline: Optional[float]) -> float:
        """
        Timeout for the next call: request_timeout_seconds, cut to the time left before deadline.

        Raises:
            ProviderError: If the deadline has already passed.
        """
        timeout = self.config.request_timeout_seconds
        if deadline is None:
            return timeout
        left = deadline - time.monotonic()
        if left <= 0:
            raise ProviderError(0, "deadline reached before the request was sent")
        return min(timeout, left)

    def chat(self, messages: List[Message], deadline: Optional[float] = None) -> ChatReply:
        """
        Send the conversation and return the assistant's reply.

        Args:
            messages: Alternating user/assistant messages ending with a user turn.
            deadline: time.monotonic() value bounding every call and retry.

        Raises:
            RateLimitError: When rate limits persist after all retries.
            ProviderError: On unrecoverable provider errors.
        """
        max_retries = self.config.max_retries
        for attempt in range(max_retries + 1):
            timeout = self.request_timeout(deadline)
            try:
                return self._send(messages, timeout)
            except _Retryable as e:
                delay = self.config.retry_base_delay * (2 ** attempt)
                out_of_time = deadline is not None and time.monotonic() + delay >= deadline
                if attempt < max_retries and not out_of_time:
                    logger.warning(
                        f"{e.kind} error: {e.cause}. Retrying in {delay:.2f}s "
                        f"(attempt {attempt + 1}/{max_retries})")
                    time.sleep(delay)
                    continue
                logger.error(f"{e.kind} error after {attempt + 1} attempts: {e.cause}")
                if isinstance(e.cause, ProviderError):
                    raise e.cause
                status = 429 if e.kind == "Rate limit" else 0
                if status == 429:
                    raise RateLimitError(status, str(e.cause)) from e.cause
                raise ProviderError(status, str(e.cause)) from e.cause

        raise SynthesisError("Failed to get a response after all retries")


class OpenAIChatAdapter(ChatAdapter):
    """Chat Completions through the official openai SDK; PLANFORGE_BASE_URL selects the endpoint."""

    def __init__(self, config: LlmConfig):
        super().__init__(config)
        kwargs = {"api_key": config.api_key(),
                  "timeout": config.request_timeout_seconds,
                  "max_retries": 0}
        if config.base_url():
            kwargs["base_url"] = config.base_url()
        self.client = OpenAI(**kwargs)

    def _send(self, messages: List[Message], timeout: float) -> ChatReply:
        params = {"model": self.config.model_id,
                  "messages": messages,
                  "max_completion_tokens": self.config.max_output_tokens}
        params.update(self.config.decoding)
        try:
            resp = self.client.chat.completions.create(timeout=timeout, **params)
        except openai.RateLimitError as e:
            raise _Retryable("Rate limit", e)
        except openai.APITimeoutError as e:
            raise _Retryable("Timeout", e)
        except openai.APIConnectionError as e:
            raise _Retryable("Connection", e)
        except openai.InternalServerError as e:
            raise _Retryable("Server", e)
        except openai.APIStatusError as e:
            raise ProviderError(e.status_code, str(e.message)) from e

        text = (resp.choices[0].message.content or "") if resp.choices else ""
        usage = getattr(resp, "usage", None)
        if usage is None:
            return ChatReply(text, usage_missing=True)
        return ChatReply(text,
                         int(getattr(usage, "prompt_tokens", 0) or 0),
                         int(getattr(usage, "completion_tokens", 0) or 0))


class AnthropicChatAdapter(ChatAdapter):
    """The Messages API over plain HTTP."""

    def __init__(self, config: LlmConfig):
        super().__init__(config)
        self.url = (config.base_url() or ANTHROPIC_DEFAULT_URL).rstrip("/") + "/v1/messages"
        self.session = requests.Session()
        self.session.headers.update({
            "x-api-key": config.api_key(),
            "anthropic-version": ANTHROPIC_VERSION,
            "content-type": "application/json",
        })

    def _send(self, messages: List[Message], timeout: float) -> ChatReply:
        payload = {"model": self.config.model_id,
                   "max_tokens": self.config.max_output_tokens,
                   "messages": messages}
        payload.update(self.config.decoding)
        try:
            resp = self.session.post(self.url, json=payload, timeout=timeout)
        except requests.Timeout as e:
            raise _Retryable("Timeout", e)
        except requests.ConnectionError as e:
            raise _Retryable("Connection", e)

        if resp.status_code == 429:
            raise _Retryable("Rate limit", RateLimitError(429, resp.text))
        if resp.status_code >= 500:
            raise _Retryable("Server", ProviderError(resp.status_code, resp.text))
        if resp.status_code != 200:
            raise ProviderError(resp.status_code, resp.text)

        data = resp.json()
        text = "".join(block.get("text", "") for block in data.get("content", [])
                       if block.get("type") == "text")
        usage = data.get("usage")
        if not usage:
            return ChatReply(text, usage_missing=True)
        return ChatReply(text, int(usage.get("input_tokens", 0)),
                         int(usage.get("output_tokens", 0)))


class FixtureStore:
    """
    Offline responses laid out as <root>/<domain>/<phase>/<attempt>.md, each with an
    optional <attempt>.usage.json sidecar {"input_tokens": ..., "output_tokens": ...}.
    """

    def __init__(self, root: Path):
        self.root = Path(root)

    def path(self, domain: str, phase: Phase, attempt_index: int) -> Path:
        return self.root / domain / phase.value / f"{attempt_index}.md"

    def reply(self, domain: str, phase: Phase, attempt_index: int) -> ChatReply:
        """
        Raises:
            FixtureMissing: If the response file does not exist.
        """
        path = self.path(domain, phase, attempt_index)
        if not path.is_file():
            raise FixtureMissing((domain, phase.value, attempt_index))
        text = path.read_text(encoding="utf-8")
        sidecar = path.with_suffix(".usage.json")
        if not sidecar.is_file():
            return ChatReply(text, usage_missing=True)
        usage = json.loads(sidecar.read_text(encoding="utf-8"))
        return ChatReply(text, int(usage.get("input_tokens", 0)),
                         int(usage.get("output_tokens", 0)))


def make_adapter(config: LlmConfig) -> ChatAdapter:
    if config.api_flavor is ApiFlavor.ANTHROPIC:
        return AnthropicChatAdapter(config)
    return OpenAIChatAdapter(config)


class LlmClient:
    """
    Runs prompt bundles against the configured provider.

    With ``cache_domain_phases`` the domain-level turns (strategize and unrefined) of
    each attempt index are kept per domain and replayed for later refined requests
    instead of being sent again. Thread-safe.
    """

    def __init__(self, config: LlmConfig, cache_domain_phases: bool = False):
        self.config = config
        self.cache_domain_phases = cache_domain_phases
        self._offline = config.provider is Provider.OFFLINE_FIXTURES
        self._fixtures = FixtureStore(config.fixtures_dir) if self._offline else None
        self._adapter: Optional[ChatAdapter] = None
        self._cache: Dict[Tuple[str, int], List[Tuple[Phase, str, str]]] = {}
        self._lock = threading.Lock()

    def _chat(self, messages: List[Message], domain: str, phase: Phase,
              attempt_index: int, deadline: Optional[float]) -> Tuple[ChatReply, TranscriptRecord]:
        if self._offline:
            reply = self._fixtures.reply(domain, phase, attempt_index)
            latency, timestamp = 0.0, None
        else:
            with self._lock:
                if self._adapter is None:
                    self._adapter = make_adapter(self.config)
            started = time.monotonic()
            timestamp = datetime.now(timezone.utc)
            reply = self._adapter.chat(messages, deadline)
            latency = time.monotonic() - started
        if reply.usage_missing:
            logger.warning(f"No usage metadata for {domain} {phase.value} attempt {attempt_index}")
        record = TranscriptRecord(input_tokens=reply.input_tokens,
                                  output_tokens=reply.output_tokens,
                                  latency_seconds=latency,
                                  model_id=self.config.model_id,
                                  phase=phase,
                                  timestamp=timestamp,
                                  usage_missing=reply.usage_missing)
        return reply, record

    def request_heuristic(self,
                          bundle: PromptBundle,
                          domain: str,
                          attempt_index: int = 1,
                          deadline: Optional[float] = None) -> Tuple[str, List[TranscriptRecord]]:
        """
        Run the bundle's phases in order as one conversation.

        Args:
            bundle: Prompts of this attempt.
            domain: Domain name; part of the offline fixture key.
            attempt_index: 1-based attempt; part of the offline fixture key.
            deadline: time.monotonic() value bounding every provider call and retry.

        Returns:
            The final phase's extracted source and one transcript per phase.

        Raises:
            ProviderError: On provider failures after retries.
            FixtureMissing: In offline mode when a response file is absent.
            NoCodeBlock: If the final answer has no fenced code block.

            Each carries ``transcripts``, the records of the phases answered so far.
        """
        messages: List[Message] = []
        transcripts: List[TranscriptRecord] = []
        answer = ""
        turns = bundle.turns()
        cache_key = (domain, attempt_index)

        cached = None
        if self.cache_domain_phases and bundle.phase3_refine is not None:
            with self._lock:
                cached = self._cache.get(cache_key)
        if cached is not None and len(cached) == len(turns) - 1:
            logger.info(f"Reusing cached domain phases for {domain} attempt {attempt_index}")
            for phase, prompt, reply_text in cached:
                messages += [{"role": "user", "content": prompt},
                             {"role": "assistant", "content": reply_text}]
                transcripts.append(TranscriptRecord(model_id=self.config.model_id,
                                                    phase=phase, cached=True))
            turns = turns[len(cached):]

        domain_turns: List[Tuple[Phase, str, str]] = []
        for phase, prompt in turns:
            messages.append({"role": "user", "content": prompt})
            try:
                reply, record = self._chat(messages, domain, phase, attempt_index, deadline)
            except (ProviderError, FixtureMissing) as e:
                e.transcripts = transcripts
                raise
            logger.info(f"{domain} attempt {attempt_index} {phase.value}: "
                        f"{record.input_tokens} in / {record.output_tokens} out tokens, "
                        f"{record.latency_seconds:.2f}s")
            messages.append({"role": "assistant", "content": reply.text})
            transcripts.append(record)
            answer = reply.text
            if phase is not Phase.REFINED:
                domain_turns.append((phase, prompt, reply.text))

        if self.cache_domain_phases and domain_turns and cached is None:
            with self._lock:
                self._cache.setdefault(cache_key, domain_turns)

        try:
            return extract_code(answer), transcripts
        except NoCodeBlock as e:
            e.transcripts = transcripts
            raise


def request_heuristic(config: LlmConfig,
                      bundle: PromptBundle,
                      domain: str,
                      attempt_index: int = 1) -> Tuple[str, List[TranscriptRecord]]:
    """One-shot convenience wrapper around LlmClient.request_heuristic."""
    return LlmClient(config).request_heuristic(bundle, domain, attempt_index)
