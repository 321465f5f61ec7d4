"""Sentence-level saliency: aggregate token attention, stats, candidate selection.

The core quantity is the sentence saliency matrix: entry [i, j] is the mean
attention from every token of sentence i to every token of sentence j,
computed over non-special tokens only. Under a causal mask, [i, j] with
j > i is structurally zero, which drives both the statistics inclusion
rules and the direction handling below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attention.types import TokenAttention
from .docmodel import Document
from .errors import DimensionMismatch, IndexOutOfRange, SelfPair

INCLUSION_RULES = ("off_diagonal_nonzero", "off_diagonal_all")
DIRECTIONS = ("outgoing", "incoming", "max_both")
POLICY_MODES = ("absolute", "relative", "top_m")


@dataclass(frozen=True)
class SaliencyStats:
    """Population mean/std over the entries picked by the inclusion rule.

    off_diagonal_nonzero: strictly-lower-triangle entries only, so the
    structurally-zero upper triangle cannot deflate the statistics.
    off_diagonal_all: everything except the diagonal.
    """

    mean: float
    std: float
    included: str = "off_diagonal_nonzero"

    def __post_init__(self):
        if self.included not in INCLUSION_RULES:
            raise ValueError(f"unknown inclusion rule {self.included!r}")
        if self.std < 0 or self.mean < 0:
            raise ValueError("stats must be non-negative")


@dataclass(frozen=True)
class SaliencyMatrix:
    """n x n sentence saliency with summary statistics."""

    matrix: np.ndarray
    stats: SaliencyStats

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"saliency matrix must be square, got {m.shape}")
        if m.size and float(m.min()) < 0:
            raise ValueError("saliency entries must be non-negative")
        m.setflags(write=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "matrix": self.matrix.tolist(),
            "stats": {"mean": self.stats.mean, "std": self.stats.std,
                      "included": self.stats.included},
        }


@dataclass(frozen=True)
class ThresholdPolicy:
    """Candidate selection policy.

    relative uses tau = max(0, mean + k*std); top_m takes the m best
    regardless of any threshold. Ties at exactly tau are included, but a
    zero score never qualifies in threshold modes (zero attention means no
    connection at all).
    """

    mode: str = "relative"
    tau: float = 0.0
    k: float = 1.0
    m: int = 1
    direction: str = "max_both"

    def __post_init__(self):
        if self.mode not in POLICY_MODES:
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        if self.m < 1:
            raise ValueError("m must be at least 1")

    def params(self) -> dict:
        if self.mode == "absolute":
            return {"tau": self.tau}
        if self.mode == "relative":
            return {"k": self.k}
        return {"m": self.m}

    def to_dict(self) -> dict:
        return {"mode": self.mode, "params": self.params(), "direction": self.direction}

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdPolicy":
        params = data.get("params", {})
        return cls(
            mode=data.get("mode", "relative"),
            tau=float(params.get("tau", 0.0)),
            k=float(params.get("k", 1.0)),
            m=int(params.get("m", 1)),
            direction=data.get("direction", "max_both"),
        )


def compute_stats(matrix: np.ndarray, included: str = "off_diagonal_nonzero") -> SaliencyStats:
    """Population mean and std over the included entries; empty set -> zeros."""
    if included not in INCLUSION_RULES:
        raise ValueError(f"unknown inclusion rule {included!r}")
    n = matrix.shape[0]
    if included == "off_diagonal_nonzero":
        sel = np.tril_indices(n, k=-1)
    else:
        ii, jj = np.indices((n, n))
        keep = ii != jj
        sel = (ii[keep], jj[keep])
    values = matrix[sel]
    if values.size == 0:
        return SaliencyStats(mean=0.0, std=0.0, included=included)
    return SaliencyStats(mean=float(values.mean()), std=float(values.std()), included=included)


def aggregate(att: TokenAttention, doc: Document,
              included: str = "off_diagonal_nonzero") -> SaliencyMatrix:
    """Exact double-mean of token attention over every sentence pair.

    Special tokens are dropped from both axes first; the remaining matrix
    must line up with the document's token count.
    """
    if not doc.is_aligned:
        raise DimensionMismatch("document has no token alignment")
    keep = ~np.asarray(att.special_token_mask, dtype=bool)
    filtered = np.asarray(att.matrix, dtype=np.float64)[np.ix_(keep, keep)]
    if filtered.shape[0] != doc.token_count:
        raise DimensionMismatch(
            f"attention has {filtered.shape[0]} non-special tokens, "
            f"document aligned to {doc.token_count}")

    n = len(doc.sentences)
    out = np.zeros((n, n), dtype=np.float64)
    for i, si in enumerate(doc.sentences):
        rows = filtered[si.token_start:si.token_end]
        for j, sj in enumerate(doc.sentences):
            out[i, j] = rows[:, sj.token_start:sj.token_end].mean()
    return SaliencyMatrix(matrix=out, stats=compute_stats(out, included))


def saliency(sal: SaliencyMatrix, target: int, j: int, direction: str = "max_both") -> float:
    """Directed or bidirectional saliency between the target and sentence j.

    The literal formula reads target -> j, but under a causal mask that is
    structurally zero for any j after the target, so incoming (j -> target)
    and max_both are offered; max_both is the default everywhere.
    """
    n = sal.n
    if not (0 <= target < n and 0 <= j < n):
        raise IndexOutOfRange(f"indices ({target}, {j}) outside {n} sentences")
    if target == j:
        raise SelfPair("saliency of a sentence with itself is undefined")
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    outgoing = float(sal.matrix[target, j])
    incoming = float(sal.matrix[j, target])
    if direction == "outgoing":
        return outgoing
    if direction == "incoming":
        return incoming
    return max(outgoing, incoming)


def effective_threshold(sal: SaliencyMatrix, policy: ThresholdPolicy) -> float:
    """Resolve the policy to a numeric threshold (0 for top_m)."""
    if policy.mode == "absolute":
        return policy.tau
    if policy.mode == "relative":
        return max(0.0, sal.stats.mean + policy.k * sal.stats.std)
    return 0.0


def select_candidates(
    sal: SaliencyMatrix, target: int, policy: ThresholdPolicy,
) -> list[tuple[int, float]]:
    """All sentences whose saliency to the target clears the policy.

    Returns (index, score) pairs sorted by descending score (index breaks
    ties) — the candidate set handed to NLI classification.
    """
    n = sal.n
    if not 0 <= target < n:
        raise IndexOutOfRange(f"target {target} outside {n} sentences")
    scored = [(j, saliency(sal, target, j, policy.direction))
              for j in range(n) if j != target]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    if policy.mode == "top_m":
        return scored[:min(policy.m, n - 1)]
    tau = effective_threshold(sal, policy)
    return [(j, score) for j, score in scored if score >= tau and score > 0.0]
