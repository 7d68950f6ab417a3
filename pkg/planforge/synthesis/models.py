"""
Pydantic models for prompts, transcripts and compiled heuristic artifacts.
"""

import enum
import os
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class Phase(str, enum.Enum):
    """
    Prompt phase of a conversation turn.

    Values:
        STRATEGIZE: English description of a heuristic strategy
        UNREFINED: domain-level heuristic code
        REFINED: heuristic code refined for one instance
    """
    STRATEGIZE = "strategize"
    UNREFINED = "unrefined"
    REFINED = "refined"


class PromptBundle(BaseModel):
    """The prompts of one attempt, in conversation order."""
    phase1_strategize: Optional[str] = None
    phase2_unrefined: str
    phase3_refine: Optional[str] = None
    domain_source: str
    instance_json: Optional[str] = None

    @model_validator(mode='after')
    def validate_refine_has_instance(self):
        if self.phase3_refine is not None and self.instance_json is None:
            raise ValueError("the refine phase requires instance_json")
        return self

    def turns(self) -> List[tuple]:
        """(phase, prompt) pairs in the order they are sent."""
        turns = []
        if self.phase1_strategize is not None:
            turns.append((Phase.STRATEGIZE, self.phase1_strategize))
        turns.append((Phase.UNREFINED, self.phase2_unrefined))
        if self.phase3_refine is not None:
            turns.append((Phase.REFINED, self.phase3_refine))
        return turns

    @property
    def final_phase(self) -> Phase:
        return Phase.REFINED if self.phase3_refine is not None else Phase.UNREFINED


class TranscriptRecord(BaseModel):
    """Cost metadata for one provider call."""
    input_tokens: int = Field(0, ge=0)
    output_tokens: int = Field(0, ge=0)
    latency_seconds: float = Field(0.0, ge=0.0)
    model_id: str
    phase: Phase
    timestamp: Optional[datetime] = None
    usage_missing: bool = False
    cached: bool = False


class CompileStatus(BaseModel):
    """Ok(worker_path) when ``ok``; otherwise Failed(diagnostics)."""
    ok: bool
    worker_path: Optional[Path] = None
    diagnostics: str = ""

    @classmethod
    def success(cls, worker_path: Path) -> "CompileStatus":
        return cls(ok=True, worker_path=worker_path)

    @classmethod
    def failed(cls, diagnostics: str) -> "CompileStatus":
        return cls(ok=False, diagnostics=diagnostics or "compilation failed")

    def __str__(self):
        return f"Ok({self.worker_path})" if self.ok else "Failed"


class HeuristicArtifact(BaseModel):
    source: str
    phase: Phase = Phase.UNREFINED
    compile_status: CompileStatus
    attempt_index: int = Field(1, ge=1)
    transcripts: List[TranscriptRecord] = Field(default_factory=list)
    compile_seconds: float = 0.0

    @model_validator(mode='after')
    def validate_worker_exists(self):
        if self.compile_status.ok:
            path = self.compile_status.worker_path
            if path is None or not path.is_file() or not os.access(path, os.X_OK):
                raise ValueError("an Ok artifact needs an executable worker")
        return self

    @property
    def compiled(self) -> bool:
        return self.compile_status.ok

    @property
    def input_tokens(self) -> int:
        return sum(t.input_tokens for t in self.transcripts)

    @property
    def output_tokens(self) -> int:
        return sum(t.output_tokens for t in self.transcripts)
