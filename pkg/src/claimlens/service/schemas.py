"""Request bodies for the HTTP API.

Responses are the canonical dicts the core types already produce
(Document.to_dict, AnalysisResult.to_dict, SaliencyMatrix.to_dict), so only
the inbound shapes need models.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..saliency import ThresholdPolicy


class PolicyModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Literal["absolute", "relative", "top_m"] = "relative"
    params: dict[str, float] = Field(default_factory=dict)
    direction: Literal["outgoing", "incoming", "max_both"] = "max_both"

    def to_policy(self) -> tuple[ThresholdPolicy, float]:
        """Returns (policy, tau_confirm); tau_confirm rides in params."""
        params = dict(self.params)
        tau_confirm = float(params.pop("tau_confirm", 0.0))
        policy = ThresholdPolicy(
            mode=self.mode,
            tau=float(params.get("tau", 0.0)),
            k=float(params.get("k", 1.0)),
            m=int(params.get("m", 1)),
            direction=self.direction,
        )
        return policy, tau_confirm


class NLIConfigModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    min_confidence: float = Field(default=0.0, ge=0.0, le=1.0)
    batch_size: int = Field(default=16, ge=1)


class IngestRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str


class AnalyzeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    target_index: int | None = None
    target_char_offset: int | None = None
    policy: PolicyModel | None = None
    nli_config: NLIConfigModel | None = None

    @model_validator(mode="after")
    def _exactly_one_target(self) -> "AnalyzeRequest":
        if (self.target_index is None) == (self.target_char_offset is None):
            raise ValueError(
                "provide exactly one of target_index or target_char_offset")
        return self


class RefilterRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    policy: PolicyModel
    target_index: int | None = None  # default: the most recently analyzed target
