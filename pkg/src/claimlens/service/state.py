"""In-memory session state: per-document cache and backend singletons."""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from time import perf_counter

from ..attention.model import ModelAttentionProvider
from ..attention.types import ProviderConfig, TokenAttention
from ..docmodel import Document, align, compute_doc_id, segment
from ..fixturedata import FixtureAttentionProvider
from ..fusion import AnalysisResult, _stage
from ..nli import NLIConfig, NLIEngine, VerdictCache, build_backend
from ..saliency import SaliencyMatrix, aggregate
from .settings import Settings


@dataclass
class CacheEntry:
    """Every derived stage for one document; evicted as a unit."""

    doc: Document
    attention: TokenAttention
    saliency: SaliencyMatrix
    engine: NLIEngine
    nbytes: int
    analyses: dict[int, AnalysisResult] = field(default_factory=dict)
    last_target: int | None = None


class SessionCache:
    """LRU over whole documents, bounded by an approximate byte size.

    The newest entry is never evicted, even when it alone exceeds the cap:
    rejecting it would make the document unusable right after ingestion.
    """

    def __init__(self, cap_bytes: int):
        self.cap_bytes = cap_bytes
        self._entries: OrderedDict[str, CacheEntry] = OrderedDict()
        self._lock = threading.RLock()
        self._total = 0

    def get(self, doc_id: str) -> CacheEntry | None:
        with self._lock:
            entry = self._entries.get(doc_id)
            if entry is not None:
                self._entries.move_to_end(doc_id)
            return entry

    def put(self, doc_id: str, entry: CacheEntry) -> None:
        with self._lock:
            old = self._entries.pop(doc_id, None)
            if old is not None:
                self._total -= old.nbytes
            self._entries[doc_id] = entry
            self._total += entry.nbytes
            while self._total > self.cap_bytes and len(self._entries) > 1:
                _, evicted = self._entries.popitem(last=False)
                self._total -= evicted.nbytes

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    @property
    def total_bytes(self) -> int:
        with self._lock:
            return self._total


def _entry_size(entry_doc: Document, att: TokenAttention, sal: SaliencyMatrix) -> int:
    return (att.matrix.nbytes + sal.matrix.nbytes
            + 2 * len(entry_doc.text.encode("utf-8")) + 4096)


class ServiceState:
    """Backends, cache, and the single-flight ingestion path."""

    def __init__(self, settings: Settings):
        self.settings = settings
        self.cache = SessionCache(settings.cache_bytes)
        self._ingest_locks: dict[str, threading.Lock] = {}
        self._master = threading.Lock()

        if settings.backend_mode == "fixture":
            self.attention_provider = FixtureAttentionProvider(
                max_tokens=settings.max_tokens)
            self.nli_config = NLIConfig(backend="fixture")
        else:
            self.attention_provider = ModelAttentionProvider(ProviderConfig(
                backend="model", model_id=settings.attn_model_id,
                max_tokens=settings.max_tokens))
            self.nli_config = NLIConfig(
                backend="model", model_id=settings.nli_model_id)
        self.nli_backend = build_backend(self.nli_config)

    def _lock_for(self, doc_id: str) -> threading.Lock:
        with self._master:
            if len(self._ingest_locks) > 1024:
                self._ingest_locks = {
                    k: v for k, v in self._ingest_locks.items()
                    if self.cache.get(k) is not None}
            return self._ingest_locks.setdefault(doc_id, threading.Lock())

    def ingest(self, text: str) -> tuple[CacheEntry, bool, dict[str, float]]:
        """Segment, extract attention, aggregate, cache. Returns
        (entry, was_cached, timings)."""
        doc_id = compute_doc_id(text)
        entry = self.cache.get(doc_id)
        if entry is not None:
            return entry, True, {"attention_ms": 0.0, "saliency_ms": 0.0}

        with self._lock_for(doc_id):
            entry = self.cache.get(doc_id)  # a concurrent ingest may have won
            if entry is not None:
                return entry, True, {"attention_ms": 0.0, "saliency_ms": 0.0}

            with _stage("segmentation"):
                doc = segment(text)
            t0 = perf_counter()
            with _stage("attention"):
                att, alignment = self.attention_provider.get_attention(doc)
                aligned = align(doc, alignment)
            t1 = perf_counter()
            with _stage("saliency"):
                sal = aggregate(att, aligned)
            t2 = perf_counter()

            engine = NLIEngine(self.nli_backend, config=self.nli_config,
                               cache=VerdictCache())
            entry = CacheEntry(
                doc=aligned, attention=att, saliency=sal, engine=engine,
                nbytes=_entry_size(aligned, att, sal),
            )
            self.cache.put(doc_id, entry)
            return entry, False, {"attention_ms": (t1 - t0) * 1000.0,
                                  "saliency_ms": (t2 - t1) * 1000.0}
