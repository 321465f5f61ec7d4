"""Pipeline orchestration and the saliency-AND-label fusion rule.

A sentence is confirmed as a premise or contradiction only when the NLI
stage labeled it and its saliency clears the threshold. Candidates that
were labeled but fail the gate stay in the result with passed_fusion=False
so an interactive client can re-threshold without re-running inference.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass

from .attention import TokenAttention
from .docmodel import Document, align
from .errors import IndexOutOfRange, PipelineError, StaleCache
from .nli import NLIEngine, RelationshipMatrix
from .saliency import (
    SaliencyMatrix,
    SaliencyStats,
    ThresholdPolicy,
    aggregate,
    effective_threshold,
    saliency,
    select_candidates,
)


@dataclass(frozen=True)
class Annotation:
    index: int
    role: str  # premise | contradiction
    saliency: float
    nli_confidence: float
    passed_fusion: bool

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "role": self.role,
            "saliency": self.saliency,
            "nli_confidence": self.nli_confidence,
            "passed_fusion": self.passed_fusion,
        }


@dataclass(frozen=True)
class AnalysisResult:
    """Final annotations for one target, with enough provenance to re-filter."""

    doc_id: str
    target: int
    annotations: tuple[Annotation, ...]
    policy: ThresholdPolicy
    stats: SaliencyStats
    timings: dict[str, float]
    tau_confirm: float = 0.0

    @property
    def tau_effective(self) -> float:
        """The gate passed_fusion was evaluated against."""
        if self.policy.mode == "absolute":
            base = self.policy.tau
        elif self.policy.mode == "relative":
            base = max(0.0, self.stats.mean + self.policy.k * self.stats.std)
        else:
            base = 0.0
        return max(base, self.tau_confirm)

    def to_dict(self) -> dict:
        policy = self.policy.to_dict()
        if self.tau_confirm:
            policy["params"]["tau_confirm"] = self.tau_confirm
        return {
            "doc_id": self.doc_id,
            "target": self.target,
            "policy": policy,
            "stats": {"mean": self.stats.mean, "std": self.stats.std},
            "annotations": [a.to_dict() for a in self.annotations],
            "timings": self.timings,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisResult":
        params = dict(data["policy"].get("params", {}))
        tau_confirm = float(params.pop("tau_confirm", 0.0))
        policy = ThresholdPolicy.from_dict(
            {**data["policy"], "params": params})
        return cls(
            doc_id=data["doc_id"],
            target=data["target"],
            annotations=tuple(Annotation(**a) for a in data["annotations"]),
            policy=policy,
            stats=SaliencyStats(mean=data["stats"]["mean"], std=data["stats"]["std"]),
            timings=dict(data["timings"]),
            tau_confirm=tau_confirm,
        )


@dataclass(frozen=True)
class PreparedDocument:
    """Everything the attention stage produces for one document."""

    doc: Document  # token-aligned
    attention: TokenAttention
    saliency: SaliencyMatrix


@contextmanager
def _stage(name: str):
    try:
        yield
    except Exception as exc:
        raise PipelineError(name, exc) from exc


def prepare(doc: Document, attention_provider,
            included: str = "off_diagonal_nonzero") -> PreparedDocument:
    """Run attention extraction, alignment, and aggregation with stage tags."""
    with _stage("attention"):
        att, alignment = attention_provider.get_attention(doc)
        aligned = align(doc, alignment)
    with _stage("saliency"):
        sal = aggregate(att, aligned, included)
    return PreparedDocument(doc=aligned, attention=att, saliency=sal)


def analyze(
    doc: Document,
    target: int,
    *,
    attention_provider=None,
    nli: NLIEngine,
    policy: ThresholdPolicy | None = None,
    tau_confirm: float = 0.0,
    saliency_matrix: SaliencyMatrix | None = None,
    included: str = "off_diagonal_nonzero",
) -> AnalysisResult:
    """Full run for one target: select candidates, classify, fuse.

    Pass ``saliency_matrix`` (with an aligned ``doc``) to reuse a cached
    attention stage; otherwise ``attention_provider`` is required.
    """
    if not 0 <= target < len(doc.sentences):
        raise IndexOutOfRange(
            f"target {target} outside {len(doc.sentences)} sentences")

    t0 = time.perf_counter()
    if saliency_matrix is None:
        if attention_provider is None:
            raise ValueError("need an attention provider or a saliency matrix")
        prepared = prepare(doc, attention_provider, included)
        doc, sal = prepared.doc, prepared.saliency
    else:
        sal = saliency_matrix
        if sal.n != len(doc.sentences):
            raise StaleCache(
                f"saliency is {sal.n}x{sal.n} but document has "
                f"{len(doc.sentences)} sentences")
    t1 = time.perf_counter()

    policy = policy or ThresholdPolicy()
    with _stage("saliency"):
        candidates = select_candidates(sal, target, policy)
    t2 = time.perf_counter()

    with _stage("nli"):
        rel = nli.classify_candidates(doc, target, [c for c, _ in candidates])
    t3 = time.perf_counter()

    annotations = _fuse(sal, target, policy, tau_confirm, candidates, rel)
    return AnalysisResult(
        doc_id=doc.doc_id,
        target=target,
        annotations=annotations,
        policy=policy,
        stats=sal.stats,
        timings={
            "attention_ms": (t1 - t0) * 1000.0,
            "saliency_ms": (t2 - t1) * 1000.0,
            "nli_ms": (t3 - t2) * 1000.0,
        },
        tau_confirm=tau_confirm,
    )


def _fuse(sal, target, policy, tau_confirm, candidates, rel: RelationshipMatrix,
          carried: dict[int, Annotation] | None = None) -> tuple[Annotation, ...]:
    """Conjunction rule over the selected set plus carried-over annotations."""
    gate = max(effective_threshold(sal, policy), tau_confirm)
    selected = {c for c, _ in candidates}
    rows: dict[int, Annotation] = {}
    for prior in (carried or {}).values():
        score = saliency(sal, target, prior.index, policy.direction)
        rows[prior.index] = Annotation(
            index=prior.index, role=prior.role, saliency=score,
            nli_confidence=prior.nli_confidence,
            passed_fusion=prior.index in selected and score >= gate)
    for c, score in candidates:
        link = rel.links.get(c)
        if link is None:
            continue  # neutral in both orderings: discarded
        rows[c] = Annotation(
            index=c, role=link.relation, saliency=score,
            nli_confidence=link.confidence,
            passed_fusion=score >= gate)
    return tuple(rows[i] for i in sorted(rows))


def refilter(
    result: AnalysisResult,
    sal: SaliencyMatrix,
    new_policy: ThresholdPolicy,
    *,
    doc: Document,
    nli: NLIEngine | None = None,
    tau_confirm: float = 0.0,
) -> AnalysisResult:
    """Re-apply the fusion gate under a new policy without repeating inference.

    Sentences newly admitted by a looser threshold are classified on demand
    (the verdict cache makes repeats free); everything already labeled just
    gets its passed_fusion flag recomputed.
    """
    if doc.doc_id != result.doc_id:
        raise StaleCache("result and document disagree on doc_id")
    if sal.n != len(doc.sentences):
        raise StaleCache("saliency matrix does not match the document")

    t0 = time.perf_counter()
    candidates = select_candidates(sal, result.target, new_policy)
    known = {a.index: a for a in result.annotations}
    fresh = [c for c, _ in candidates if c not in known]
    t1 = time.perf_counter()

    if fresh:
        if nli is None:
            raise ValueError(
                "new candidates admitted by the looser policy need an NLI engine")
        with _stage("nli"):
            rel = nli.classify_candidates(doc, result.target, fresh)
    else:
        rel = RelationshipMatrix(target=result.target, links={})
    t2 = time.perf_counter()

    annotations = _fuse(sal, result.target, new_policy, tau_confirm,
                        candidates, rel, carried=known)
    return AnalysisResult(
        doc_id=result.doc_id,
        target=result.target,
        annotations=annotations,
        policy=new_policy,
        stats=sal.stats,
        timings={
            "attention_ms": 0.0,
            "saliency_ms": (t1 - t0) * 1000.0,
            "nli_ms": (t2 - t1) * 1000.0,
        },
        tau_confirm=tau_confirm,
    )
