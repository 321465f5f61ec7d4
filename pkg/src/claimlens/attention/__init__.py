"""Token-level attention providers: real causal LM, file replay, synthetic."""

from .types import AttentionPattern, ProviderConfig, TokenAttention
from .synthetic import (
    SyntheticAttentionProvider,
    synthesize_attention,
    word_alignment,
)
from .attnfile import read_attention_file, write_attention_file
from .providers import FileAttentionProvider, build_provider, get_attention

__all__ = [
    "AttentionPattern",
    "ProviderConfig",
    "TokenAttention",
    "SyntheticAttentionProvider",
    "FileAttentionProvider",
    "synthesize_attention",
    "word_alignment",
    "read_attention_file",
    "write_attention_file",
    "build_provider",
    "get_attention",
]
