"""Deterministic synthetic attention: word tokenizer plus scripted patterns."""

from __future__ import annotations

import re

import numpy as np

from ..docmodel import Document, TokenAlignment
from ..errors import DocumentTooLong, InfeasiblePattern
from .types import AttentionPattern, TokenAttention

_WORD_RE = re.compile(r"\S+")


def word_alignment(text: str) -> TokenAlignment:
    """One token per whitespace-delimited word; no special tokens."""
    offsets = tuple((m.start(), m.end()) for m in _WORD_RE.finditer(text))
    return TokenAlignment(offsets, (False,) * len(offsets))


def _uniform_row(row: np.ndarray, k: int) -> None:
    row[: k + 1] = 1.0 / (k + 1)


def synthesize_attention(
    pattern: AttentionPattern,
    n_tokens: int,
    *,
    sentence_token_ranges: list[tuple[int, int]] | None = None,
    layer_index: int = 0,
) -> TokenAttention:
    """Build a causal, row-normalized matrix following a scripted pattern.

    Block patterns need ``sentence_token_ranges`` (half-open token ranges in
    document order). Raises InfeasiblePattern when the pattern would place
    mass above the diagonal, e.g. delta to a future token.
    """
    if n_tokens <= 0:
        raise InfeasiblePattern("pattern needs at least one token")
    matrix = np.zeros((n_tokens, n_tokens), dtype=np.float32)

    if pattern.kind == "uniform":
        for k in range(n_tokens):
            _uniform_row(matrix[k], k)

    elif pattern.kind == "delta":
        k, l = pattern.source, pattern.dest
        if not (0 <= k < n_tokens and 0 <= l < n_tokens):
            raise InfeasiblePattern(f"delta indices ({k}, {l}) outside {n_tokens} tokens")
        if l > k:
            raise InfeasiblePattern(f"delta {k}->{l} attends a future token")
        for row in range(n_tokens):
            _uniform_row(matrix[row], row)
        matrix[k, :] = 0.0
        matrix[k, l] = 1.0

    else:  # block
        if sentence_token_ranges is None:
            raise InfeasiblePattern("block pattern requires sentence token ranges")
        n_sent = len(sentence_token_ranges)
        i, j = pattern.source, pattern.dest
        if not (0 <= i < n_sent and 0 <= j < n_sent):
            raise InfeasiblePattern(f"block sentences ({i}, {j}) outside {n_sent} sentences")
        src_lo, src_hi = sentence_token_ranges[i]
        dst_lo, dst_hi = sentence_token_ranges[j]
        for row in range(n_tokens):
            if not src_lo <= row < src_hi:
                _uniform_row(matrix[row], row)
                continue
            targets = [c for c in range(dst_lo, min(dst_hi, row + 1))]
            if not targets:
                raise InfeasiblePattern(
                    f"block {i}->{j}: token {row} has no causal target in sentence {j}")
            others = [c for c in range(row + 1) if not dst_lo <= c < dst_hi]
            if others:
                matrix[row, targets] = pattern.weight / len(targets)
                matrix[row, others] = (1.0 - pattern.weight) / len(others)
            else:
                matrix[row, targets] = 1.0 / len(targets)

    return TokenAttention(
        matrix=matrix,
        layer_index=layer_index,
        head_reduction="mean",
        provider_id="synthetic",
        special_token_mask=(False,) * n_tokens,
    )


class SyntheticAttentionProvider:
    """Pure, model-free provider: word tokens plus a scripted pattern.

    Used for tests and for fixture-mode fallback on documents that have no
    committed attention file.
    """

    provider_id = "synthetic"

    def __init__(self, pattern: AttentionPattern | None = None, *, max_tokens: int = 4096):
        self.pattern = pattern or AttentionPattern(kind="uniform")
        self.max_tokens = max_tokens

    def get_attention(self, doc: Document) -> tuple[TokenAttention, TokenAlignment]:
        alignment = word_alignment(doc.text)
        n = len(alignment)
        if n > self.max_tokens:
            raise DocumentTooLong(f"{n} tokens exceeds max_tokens={self.max_tokens}")
        ranges = None
        if self.pattern.kind == "block":
            ranges = _word_ranges(doc, alignment)
        att = synthesize_attention(self.pattern, n, sentence_token_ranges=ranges)
        return att, alignment

    def describe(self) -> dict:
        return {"backend": "synthetic", "status": "ok", "model_id": "synthetic"}


def _word_ranges(doc: Document, alignment: TokenAlignment) -> list[tuple[int, int]]:
    """Sentence token ranges under the word tokenizer (assignment by first char)."""
    from ..docmodel import align

    aligned = align(doc, alignment)
    return [(s.token_start, s.token_end) for s in aligned.sentences]
