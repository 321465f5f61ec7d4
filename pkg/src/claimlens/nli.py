"""Ordered-pair NLI classification and the per-target relationship matrix.

For each candidate sentence two ordered pairs are checked: (candidate,
target) for entailment — the candidate is a premise — and (target,
candidate) for contradiction. Neutral pairs are discarded. Verdicts are
cached by content hash so interactive re-thresholding never re-pays
inference for pairs it has already seen.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from .docmodel import Document
from .errors import BackendUnavailable, IndexOutOfRange, TextTooLong

LABELS = ("entailment", "neutral", "contradiction")

DEFAULT_NLI_MODEL = "MoritzLaurer/DeBERTa-v3-large-mnli-fever-anli-ling-wanli"

_CANNED_PROBS = {
    "entailment": (0.96, 0.03, 0.01),
    "neutral": (0.05, 0.90, 0.05),
    "contradiction": (0.01, 0.04, 0.95),
}


def derive_label(probs: tuple[float, float, float]) -> str:
    """Argmax label; exact ties resolve entailment > contradiction > neutral."""
    e, n, c = probs
    best = max(e, n, c)
    if e == best:
        return "entailment"
    if c == best:
        return "contradiction"
    return "neutral"


@dataclass(frozen=True)
class NLIVerdict:
    """One classified ordered pair. probs are (entailment, neutral, contradiction)."""

    label: str
    probs: tuple[float, float, float]
    premise_text: str
    hypothesis_text: str
    backend_id: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be non-negative")
        if abs(sum(self.probs) - 1.0) > 1e-4:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, not 1")
        if self.label != derive_label(self.probs):
            raise ValueError("label is not the argmax of probs")

    @property
    def confidence(self) -> float:
        return self.probs[LABELS.index(self.label)]


@dataclass(frozen=True)
class RelationLink:
    """A premise/contradiction link from one candidate to the target."""

    relation: str  # premise | contradiction
    confidence: float
    premise_verdict: NLIVerdict  # (candidate, target) check
    contradiction_verdict: NLIVerdict  # (target, candidate) check


@dataclass(frozen=True)
class RelationshipMatrix:
    """Labeled links from candidate sentences to one target."""

    target: int
    links: dict[int, RelationLink]

    def __post_init__(self):
        if self.target in self.links:
            raise ValueError("target cannot link to itself")


@dataclass(frozen=True)
class NLIConfig:
    backend: str = "model"  # model | fixture | scripted
    model_id: str = DEFAULT_NLI_MODEL
    min_confidence: float = 0.0  # 0.0 = pure argmax
    batch_size: int = 16
    device: str = "cpu"

    def __post_init__(self):
        if self.backend not in ("model", "fixture", "scripted"):
            raise ValueError(f"unknown NLI backend {self.backend!r}")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError("min_confidence must be in [0, 1]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


class ScriptedNLIBackend:
    """Rule-table backend for tests: exact (premise, hypothesis) -> outcome."""

    def __init__(self, rules: dict[tuple[str, str], str | tuple[float, float, float]],
                 backend_id: str = "scripted"):
        self.rules = dict(rules)
        self.backend_id = backend_id

    def classify_batch(self, pairs):
        out = []
        for premise, hypothesis in pairs:
            rule = self.rules.get((premise, hypothesis), "neutral")
            out.append(_CANNED_PROBS[rule] if isinstance(rule, str) else rule)
        return out

    def describe(self) -> dict:
        return {"backend": "scripted", "status": "ok", "model_id": self.backend_id}


class FixtureNLIBackend:
    """Replays committed verdicts; unknown pairs fall back to neutral.

    The fallback keeps fixture mode usable on arbitrary text; pass
    strict=True to raise instead.
    """

    backend_id = "fixture"

    def __init__(self, records: dict[tuple[str, str], tuple[float, float, float]],
                 *, strict: bool = False):
        self.records = dict(records)
        self.strict = strict

    @classmethod
    def from_jsonl(cls, paths, *, strict: bool = False) -> "FixtureNLIBackend":
        records = {}
        for path in paths:
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    records[(rec["premise"], rec["hypothesis"])] = tuple(rec["probs"])
        return cls(records, strict=strict)

    def classify_batch(self, pairs):
        out = []
        for premise, hypothesis in pairs:
            probs = self.records.get((premise, hypothesis))
            if probs is None:
                if self.strict:
                    raise BackendUnavailable(
                        "fixture backend has no verdict for this pair",
                        diagnostics=f"premise={premise[:48]!r}")
                probs = _CANNED_PROBS["neutral"]
            out.append(probs)
        return out

    def describe(self) -> dict:
        return {"backend": "fixture", "status": "ok", "model_id": "fixture"}


class ModelNLIBackend:
    """Transformers sequence-classification backend (lazy import)."""

    def __init__(self, config: NLIConfig):
        self.config = config
        self.backend_id = f"model:{config.model_id}"
        self._lock = threading.Lock()
        self._model = None
        self._tokenizer = None
        self._label_order: list[int] | None = None
        self._load_error: str | None = None

    def _load(self):
        if self._model is not None:
            return
        try:
            import torch  # noqa: F401
            from transformers import AutoModelForSequenceClassification, AutoTokenizer
        except ImportError as exc:
            self._load_error = str(exc)
            raise BackendUnavailable(
                "NLI model backend needs the [models] extra", diagnostics=str(exc)) from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(self.config.model_id)
            self._model = AutoModelForSequenceClassification.from_pretrained(
                self.config.model_id).to(self.config.device)
            self._model.eval()
            id2label = {int(i): lbl.lower() for i, lbl in
                        self._model.config.id2label.items()}
            self._label_order = [
                next(i for i, lbl in id2label.items() if lbl.startswith(prefix))
                for prefix in ("entail", "neutral", "contradiction")
            ]
        except Exception as exc:
            self._load_error = str(exc)
            raise BackendUnavailable(
                f"failed to load {self.config.model_id}", diagnostics=str(exc)) from exc

    def classify_batch(self, pairs):
        with self._lock:
            self._load()
            import torch

            max_len = self._tokenizer.model_max_length
            for premise, hypothesis in pairs:
                n_tok = len(self._tokenizer(premise, hypothesis)["input_ids"])
                if n_tok > max_len:
                    raise TextTooLong(
                        f"pair tokenizes to {n_tok} > model limit {max_len}")
            encoded = self._tokenizer(
                [p for p, _ in pairs], [h for _, h in pairs],
                return_tensors="pt", padding=True).to(self.config.device)
            try:
                with torch.no_grad():
                    logits = self._model(**encoded).logits
            except Exception as exc:
                raise BackendUnavailable("NLI forward pass failed",
                                         diagnostics=str(exc)) from exc
            probs = torch.softmax(logits, dim=-1).cpu().numpy()
        e, n, c = self._label_order
        return [(float(row[e]), float(row[n]), float(row[c])) for row in probs]

    def describe(self) -> dict:
        status = "unavailable" if self._load_error else "ok"
        return {"backend": "model", "status": status, "model_id": self.config.model_id,
                **({"error": self._load_error} if self._load_error else {})}


def _text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class VerdictCache:
    """Content-hash keyed verdict store with an optional append-only JSONL file.

    Entries are deterministic for a fixed model, so concurrent last-write-wins
    races are benign.
    """

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.Lock()
        self._store: dict[tuple[str, str, str], tuple[float, float, float]] = {}
        self._path = Path(path) if path else None
        if self._path and self._path.exists():
            with open(self._path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    key = (rec["p_hash"], rec["h_hash"], rec["model_id"])
                    self._store[key] = tuple(rec["probs"])

    def __len__(self) -> int:
        return len(self._store)

    def get(self, premise: str, hypothesis: str, model_id: str):
        return self._store.get((_text_hash(premise), _text_hash(hypothesis), model_id))

    def put(self, premise: str, hypothesis: str, model_id: str,
            probs: tuple[float, float, float]) -> None:
        key = (_text_hash(premise), _text_hash(hypothesis), model_id)
        with self._lock:
            if key in self._store:
                return
            self._store[key] = probs
            if self._path:
                record = {"p_hash": key[0], "h_hash": key[1], "model_id": key[2],
                          "probs": list(probs)}
                with open(self._path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record) + "\n")


@dataclass
class NLICounters:
    """pair_requests counts classifications asked for (the 2-per-candidate
    budget); backend_pairs counts pairs that actually hit the backend after
    the cache."""

    pair_requests: int = 0
    backend_pairs: int = 0


def build_backend(config: NLIConfig, *, fixture_records=None):
    if config.backend == "scripted":
        return ScriptedNLIBackend(fixture_records or {})
    if config.backend == "fixture":
        if fixture_records is None:
            from .fixturedata import load_nli_fixture_records

            fixture_records = load_nli_fixture_records()
        return FixtureNLIBackend(fixture_records)
    return ModelNLIBackend(config)


class NLIEngine:
    """Backend plus cache plus instrumentation; the unit the pipeline holds."""

    def __init__(self, backend, config: NLIConfig | None = None,
                 cache: VerdictCache | None = None):
        self.backend = backend
        self.config = config or NLIConfig(backend="scripted")
        self.cache = cache if cache is not None else VerdictCache()
        self.counters = NLICounters()
        self._lock = threading.Lock()

    def classify_pair(self, premise: str, hypothesis: str) -> NLIVerdict:
        if not premise.strip() or not hypothesis.strip():
            raise ValueError("premise and hypothesis must be non-empty")
        return self._classify_many([(premise, hypothesis)])[0]

    def _classify_many(self, pairs: list[tuple[str, str]]) -> list[NLIVerdict]:
        model_id = getattr(self.backend, "backend_id", "unknown")
        with self._lock:
            self.counters.pair_requests += len(pairs)
        results: list[NLIVerdict | None] = [None] * len(pairs)
        misses: list[int] = []
        for idx, (p, h) in enumerate(pairs):
            probs = self.cache.get(p, h, model_id)
            if probs is None:
                misses.append(idx)
            else:
                results[idx] = self._verdict(p, h, probs, model_id)
        for lo in range(0, len(misses), self.config.batch_size):
            chunk = misses[lo:lo + self.config.batch_size]
            batch = [pairs[i] for i in chunk]
            probs_list = self.backend.classify_batch(batch)
            with self._lock:
                self.counters.backend_pairs += len(batch)
            for idx, probs in zip(chunk, probs_list):
                p, h = pairs[idx]
                self.cache.put(p, h, model_id, tuple(probs))
                results[idx] = self._verdict(p, h, tuple(probs), model_id)
        return results  # type: ignore[return-value]

    @staticmethod
    def _verdict(premise, hypothesis, probs, backend_id) -> NLIVerdict:
        return NLIVerdict(label=derive_label(probs), probs=probs,
                          premise_text=premise, hypothesis_text=hypothesis,
                          backend_id=backend_id)

    def classify_candidates(self, doc: Document, target: int,
                            candidates: list[int]) -> RelationshipMatrix:
        """Both ordered checks per candidate; neutral pairs produce no link.

        On backend failure, completed candidates are kept: the raised
        BackendUnavailable carries ``partial`` (index -> RelationLink) and
        ``failed_indices``.
        """
        n = len(doc.sentences)
        for idx in [target, *candidates]:
            if not 0 <= idx < n:
                raise IndexOutOfRange(f"sentence index {idx} outside {n} sentences")
        if target in candidates:
            raise IndexOutOfRange("target cannot be its own candidate")

        target_text = doc.sentence_text(target)
        pairs: list[tuple[str, str]] = []
        for c in candidates:
            c_text = doc.sentence_text(c)
            pairs.append((c_text, target_text))  # premise check
            pairs.append((target_text, c_text))  # contradiction check

        try:
            verdicts = self._classify_many(pairs)
        except (BackendUnavailable, TextTooLong) as exc:
            # Re-run candidate by candidate to salvage completed ones.
            links, failed = self._salvage(pairs, candidates)
            raise BackendUnavailable(
                f"NLI backend failed: {exc}", diagnostics=str(exc),
                partial=links, failed_indices=failed) from exc

        links: dict[int, RelationLink] = {}
        for pos, c in enumerate(candidates):
            link = self._fuse_verdicts(verdicts[2 * pos], verdicts[2 * pos + 1])
            if link is not None:
                links[c] = link
        return RelationshipMatrix(target=target, links=links)

    def _salvage(self, pairs, candidates):
        links: dict[int, RelationLink] = {}
        failed: list[int] = []
        for pos, c in enumerate(candidates):
            try:
                pair_verdicts = self._classify_many(pairs[2 * pos:2 * pos + 2])
            except (BackendUnavailable, TextTooLong):
                failed.append(c)
                continue
            link = self._fuse_verdicts(*pair_verdicts)
            if link is not None:
                links[c] = link
        return links, failed

    def _fuse_verdicts(self, premise_v: NLIVerdict,
                       contra_v: NLIVerdict) -> RelationLink | None:
        min_conf = self.config.min_confidence
        premise_fires = (premise_v.label == "entailment"
                         and premise_v.confidence >= min_conf)
        contra_fires = (contra_v.label == "contradiction"
                        and contra_v.confidence >= min_conf)
        if not premise_fires and not contra_fires:
            return None
        if premise_fires and contra_fires:
            # Both orderings fire: keep the higher-confidence relation;
            # ties go to contradiction (the costlier miss).
            if premise_v.confidence > contra_v.confidence:
                relation, confidence = "premise", premise_v.confidence
            else:
                relation, confidence = "contradiction", contra_v.confidence
        elif premise_fires:
            relation, confidence = "premise", premise_v.confidence
        else:
            relation, confidence = "contradiction", contra_v.confidence
        return RelationLink(relation=relation, confidence=confidence,
                            premise_verdict=premise_v, contradiction_verdict=contra_v)
