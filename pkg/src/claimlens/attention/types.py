"""Attention value types shared by all backends."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from ..errors import InfeasiblePattern

HEAD_REDUCTIONS = ("mean", "max", "single")

DEFAULT_ATTENTION_MODEL = "Qwen/Qwen3-1.7B"

# Row-stochasticity tolerance for model/synthetic providers.
ROW_SUM_TOL = 1e-4


@dataclass(frozen=True)
class TokenAttention:
    """Square token-to-token attention matrix from one layer, heads reduced.

    Rows attend, columns are attended. The matrix covers the provider's raw
    token sequence; ``special_token_mask`` marks tokens to exclude from
    sentence aggregation. Entries above the diagonal are exactly zero
    (causal mask), checked at construction.
    """

    matrix: np.ndarray
    layer_index: int
    head_reduction: str
    provider_id: str
    special_token_mask: tuple[bool, ...]

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"attention matrix must be square, got {m.shape}")
        if len(self.special_token_mask) != m.shape[0]:
            raise ValueError("special_token_mask length does not match matrix")
        if m.shape[0] and float(m.min()) < 0:
            raise ValueError("attention entries must be non-negative")
        if m.shape[0] and np.any(np.triu(m, k=1) != 0):
            raise ValueError("attention matrix violates the causal mask")
        if self.head_reduction not in HEAD_REDUCTIONS:
            raise ValueError(f"unknown head reduction {self.head_reduction!r}")
        m.setflags(write=False)

    @property
    def n_tokens(self) -> int:
        return self.matrix.shape[0]

    def row_stochastic_within(self, tol: float = ROW_SUM_TOL) -> bool:
        """True if every row sums to 1 within tol (before special-token exclusion)."""
        if self.n_tokens == 0:
            return True
        sums = self.matrix.sum(axis=1)
        return bool(np.max(np.abs(sums - 1.0)) <= tol)


@dataclass(frozen=True)
class ProviderConfig:
    """How to obtain attention: which backend, model, layer, and reduction."""

    backend: str = "model"  # model | file | synthetic
    model_id: str = DEFAULT_ATTENTION_MODEL
    layer_index: int | None = None  # None = final layer
    head_reduction: str = "mean"
    head_index: int = 0  # used when head_reduction == "single"
    max_tokens: int = 4096
    device: str = "cpu"
    attn_path: str | None = None  # file backend
    pattern: "AttentionPattern | None" = None  # synthetic backend

    def __post_init__(self):
        if self.backend not in ("model", "file", "synthetic"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.head_reduction not in HEAD_REDUCTIONS:
            raise ValueError(f"unknown head reduction {self.head_reduction!r}")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


_PATTERN_RE = re.compile(r"^(uniform|delta:(\d+)>(\d+)|block:(\d+)>(\d+)(?::([0-9.]+))?)$")


@dataclass(frozen=True)
class AttentionPattern:
    """Scripted attention shape for the synthetic backend and test oracles.

    kinds:
      uniform           -- every row spreads mass evenly over its causal range
      delta  (k -> l)   -- token row k is one-hot at column l
      block  (i -> j)   -- rows of sentence i put ``weight`` on sentence j
    """

    kind: str = "uniform"
    source: int = field(default=0)
    dest: int = field(default=0)
    weight: float = 0.9

    def __post_init__(self):
        if self.kind not in ("uniform", "delta", "block"):
            raise InfeasiblePattern(f"unknown pattern kind {self.kind!r}")
        if self.kind == "block" and not 0.0 < self.weight <= 1.0:
            raise InfeasiblePattern("block weight must be in (0, 1]")

    @classmethod
    def parse(cls, text: str) -> "AttentionPattern":
        """Parse 'uniform', 'delta:K>L', or 'block:I>J[:W]'."""
        m = _PATTERN_RE.match(text.strip())
        if not m:
            raise InfeasiblePattern(f"unparseable pattern {text!r}")
        if m.group(1) == "uniform":
            return cls(kind="uniform")
        if m.group(2) is not None:
            return cls(kind="delta", source=int(m.group(2)), dest=int(m.group(3)))
        weight = float(m.group(6)) if m.group(6) else 0.9
        return cls(kind="block", source=int(m.group(4)), dest=int(m.group(5)), weight=weight)
