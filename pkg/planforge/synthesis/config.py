"""
Configuration settings for the heuristic synthesis module.
"""

import enum
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

logger = logging.getLogger(__name__)

API_KEY_ENV = "PLANFORGE_API_KEY"
BASE_URL_ENV = "PLANFORGE_BASE_URL"


class Provider(str, enum.Enum):
    """
    Values:
        HTTP_API: a live chat-completion endpoint
        OFFLINE_FIXTURES: responses read from fixtures/<domain>/<phase>/<attempt>.md
    """
    HTTP_API = "http_api"
    OFFLINE_FIXTURES = "offline_fixtures"


class ApiFlavor(str, enum.Enum):
    """Wire shape of the HTTP provider."""
    OPENAI = "openai"
    ANTHROPIC = "anthropic"


_FALLBACK_KEY_ENV = {
    ApiFlavor.OPENAI: "OPENAI_API_KEY",
    ApiFlavor.ANTHROPIC: "ANTHROPIC_API_KEY",
}


class LlmConfig(BaseModel):
    """Configuration parameters for the LLM client."""
    provider: Provider = Provider.OFFLINE_FIXTURES
    api_flavor: ApiFlavor = ApiFlavor.OPENAI
    model_id: str = "gpt-4.1"
    fixtures_dir: Optional[Path] = None
    decoding: Dict[str, Any] = Field(default_factory=dict)
    request_timeout_seconds: float = 300.0
    max_retries: int = 3
    retry_base_delay: float = 1.0
    max_output_tokens: int = 8192
    log_level: str = "INFO"

    @field_validator('model_id')
    @classmethod
    def validate_model_id(cls, v):
        if not v.strip():
            raise ValueError("model_id cannot be empty")
        return v

    @field_validator('request_timeout_seconds')
    @classmethod
    def validate_request_timeout(cls, v):
        if v <= 0:
            raise ValueError("request_timeout_seconds must be positive")
        return v

    @field_validator('max_retries')
    @classmethod
    def validate_max_retries(cls, v):
        if v < 0:
            raise ValueError("max_retries cannot be negative")
        if v > 10:
            raise ValueError("max_retries seems unreasonably high")
        return v

    @field_validator('retry_base_delay')
    @classmethod
    def validate_retry_base_delay(cls, v):
        if v <= 0:
            raise ValueError("retry_base_delay must be positive")
        if v > 10:
            raise ValueError("retry_base_delay seems unreasonably high")
        return v

    @field_validator('log_level')
    @classmethod
    def validate_log_level(cls, v):
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v not in valid_levels:
            raise ValueError(
                f"log_level must be one of: {', '.join(valid_levels)}")
        return v

    @model_validator(mode='after')
    def validate_fixtures_dir(self):
        if self.provider is Provider.OFFLINE_FIXTURES:
            if self.fixtures_dir is None:
                raise ValueError("offline mode requires fixtures_dir")
            if not Path(self.fixtures_dir).is_dir():
                raise ValueError(f"fixtures_dir {self.fixtures_dir} does not exist")
        return self

    def api_key(self) -> str:
        """
        The provider API key from the environment.

        Raises:
            ValueError: If neither PLANFORGE_API_KEY nor the flavor's own variable is set.
        """
        fallback = _FALLBACK_KEY_ENV[self.api_flavor]
        key = os.environ.get(API_KEY_ENV) or os.environ.get(fallback)
        if not key:
            raise ValueError(
                f"API key must be set in {API_KEY_ENV} or {fallback} environment variable")
        return key

    def base_url(self) -> Optional[str]:
        return os.environ.get(BASE_URL_ENV) or None
