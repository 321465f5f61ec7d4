"""Service configuration, read once from environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping

from ..attention.types import DEFAULT_ATTENTION_MODEL
from ..nli import DEFAULT_NLI_MODEL


@dataclass(frozen=True)
class Settings:
    backend_mode: str = "model"  # model | fixture
    attn_model_id: str = DEFAULT_ATTENTION_MODEL
    nli_model_id: str = DEFAULT_NLI_MODEL
    cache_bytes: int = 256 * 1024 * 1024
    max_tokens: int = 4096
    max_body_bytes: int = 1024 * 1024
    bind_addr: str = "127.0.0.1:8000"

    def __post_init__(self):
        if self.backend_mode not in ("model", "fixture"):
            raise ValueError(f"unknown backend mode {self.backend_mode!r}")
        if self.cache_bytes < 1 or self.max_tokens < 1 or self.max_body_bytes < 1:
            raise ValueError("size limits must be positive")

    @property
    def host(self) -> str:
        return self.bind_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.bind_addr.rsplit(":", 1)[1])

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "Settings":
        env = os.environ if env is None else env
        defaults = cls()
        return cls(
            backend_mode=env.get("BACKEND_MODE", defaults.backend_mode),
            attn_model_id=env.get("ATTN_MODEL_ID", defaults.attn_model_id),
            nli_model_id=env.get("NLI_MODEL_ID", defaults.nli_model_id),
            cache_bytes=int(env.get("CACHE_BYTES", defaults.cache_bytes)),
            max_tokens=int(env.get("MAX_TOKENS", defaults.max_tokens)),
            max_body_bytes=int(env.get("MAX_BODY_BYTES", defaults.max_body_bytes)),
            bind_addr=env.get("BIND_ADDR", defaults.bind_addr),
        )
