"""
Configuration settings for search runs and heuristic-synthesis strategies.
"""

import enum
import logging
from typing import Optional

from pydantic import BaseModel, field_validator, model_validator

logger = logging.getLogger(__name__)

GIB = 1024 ** 3

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Limits(BaseModel):
    """Resource limits for a single search run."""
    wall_clock_seconds: float = 600.0
    memory_bytes: int = 8 * GIB
    max_expansions: Optional[int] = None

    @field_validator('wall_clock_seconds')
    @classmethod
    def validate_wall_clock(cls, v):
        if v <= 0:
            raise ValueError("wall_clock_seconds must be positive")
        return v

    @field_validator('memory_bytes')
    @classmethod
    def validate_memory(cls, v):
        if v <= 0:
            raise ValueError("memory_bytes must be positive")
        return v

    @field_validator('max_expansions')
    @classmethod
    def validate_max_expansions(cls, v):
        if v is not None and v <= 0:
            raise ValueError("max_expansions must be positive when given")
        return v


class HeuristicMix(str, enum.Enum):
    """
    Which prompt phase produces the heuristic for each attempt.

    Values:
        UNREFINED: every attempt uses the domain-level heuristic (phase 2)
        REFINED: every attempt uses the instance-refined heuristic (phase 3)
        BOTH: attempts alternate, odd attempts unrefined and even attempts refined
    """
    UNREFINED = "unrefined"
    REFINED = "refined"
    BOTH = "both"


class BudgetPolicy(BaseModel):
    """Budget and prompt options for the FC and TSR strategies."""
    total_seconds: float = 600.0
    slice_seconds: float = 100.0
    memory_bytes: int = 8 * GIB
    max_heuristics: int = 5
    max_compile_retries: int = 10
    strategize: bool = True
    refine: bool = False
    heuristic_mix: HeuristicMix = HeuristicMix.UNREFINED
    prefetch: bool = False
    cache_domain_phases: bool = False
    compile_timeout_seconds: float = 120.0

    @field_validator('total_seconds', 'slice_seconds', 'compile_timeout_seconds')
    @classmethod
    def validate_positive_seconds(cls, v):
        if v <= 0:
            raise ValueError("time budgets must be positive")
        return v

    @field_validator('memory_bytes')
    @classmethod
    def validate_memory(cls, v):
        if v <= 0:
            raise ValueError("memory_bytes must be positive")
        return v

    @field_validator('max_heuristics', 'max_compile_retries')
    @classmethod
    def validate_counts(cls, v):
        if v < 1:
            raise ValueError("attempt caps must be at least 1")
        return v

    @model_validator(mode='after')
    def validate_consistency(self):
        if self.slice_seconds > self.total_seconds:
            raise ValueError("slice_seconds cannot exceed total_seconds")
        if self.heuristic_mix is not HeuristicMix.UNREFINED and not self.refine:
            raise ValueError("a refined heuristic mix requires refine to be enabled")
        return self

    def refines(self, attempt_index: int) -> bool:
        """Whether the given 1-based attempt requests the refined phase."""
        if self.heuristic_mix is HeuristicMix.REFINED:
            return True
        if self.heuristic_mix is HeuristicMix.BOTH:
            return attempt_index % 2 == 0
        return False


def configure_logging(level_name: str = "INFO") -> logging.Logger:
    """Configure root logging once from a level name."""
    valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
    if level_name not in valid_levels:
        raise ValueError(
            f"log level must be one of: {', '.join(valid_levels)}")
    logging.basicConfig(level=getattr(logging, level_name), format=LOG_FORMAT)
    logging.getLogger().setLevel(getattr(logging, level_name))
    return logger
