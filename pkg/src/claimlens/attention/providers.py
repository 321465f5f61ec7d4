"""Provider construction and dispatch."""

from __future__ import annotations

from pathlib import Path

from ..docmodel import Document, TokenAlignment
from ..errors import IOFailure
from .attnfile import read_attention_file
from .synthetic import SyntheticAttentionProvider
from .types import ProviderConfig, TokenAttention


class FileAttentionProvider:
    """Replays a committed attention file for one document."""

    provider_id = "file"

    def __init__(self, path: str | Path, *, verify_doc_id: bool = True):
        self.path = Path(path)
        self.verify_doc_id = verify_doc_id

    def get_attention(self, doc: Document) -> tuple[TokenAttention, TokenAlignment]:
        att, alignment, doc_id = read_attention_file(self.path)
        if self.verify_doc_id and doc_id != doc.doc_id:
            raise IOFailure(
                f"attention file was exported for doc {doc_id[:12]}..., "
                f"got doc {doc.doc_id[:12]}...")
        return att, alignment

    def describe(self) -> dict:
        status = "ok" if self.path.exists() else "unavailable"
        return {"backend": "file", "status": status, "model_id": str(self.path)}


def build_provider(config: ProviderConfig):
    """Instantiate the provider named by the config."""
    if config.backend == "synthetic":
        return SyntheticAttentionProvider(config.pattern, max_tokens=config.max_tokens)
    if config.backend == "file":
        if not config.attn_path:
            raise IOFailure("file backend requires attn_path")
        return FileAttentionProvider(config.attn_path)
    from .model import ModelAttentionProvider  # deferred: pulls in torch

    return ModelAttentionProvider(config)


def get_attention(doc: Document, config: ProviderConfig) -> tuple[TokenAttention, TokenAlignment]:
    """One-shot convenience: build the configured provider and run it."""
    return build_provider(config).get_attention(doc)
