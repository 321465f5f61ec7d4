"""Committed demo documents with recorded attention and NLI verdicts.

Each case ships three files under ``fixtures/``: the text, a binary
attention file, and a JSONL of NLI verdicts for the pairs that matter.
Together they make the whole pipeline runnable and bit-deterministic with
no models installed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .attention.attnfile import read_attention_file
from .attention.synthetic import SyntheticAttentionProvider
from .attention.types import TokenAttention
from .docmodel import Document, TokenAlignment, align, segment
from .errors import IOFailure

_FIXTURE_DIR = Path(__file__).parent / "fixtures"

CASE1_TEXT = (
    "The sun is a star. It is the center of our solar system. "
    "The sun is a planet. All planets revolve around it."
)

CASE2_TEXT = (
    "Mark decided to build a bookshelf from scratch. He started by "
    "carefully measuring the space in his living room. Next, he bought "
    "high-quality oak wood and cut each piece to the exact size. He spent "
    "a full weekend sanding, assembling, and staining the bookshelf. He "
    "found that IKEA fits perfectly to his requirements. In the end, the "
    "bookshelf was sturdy, fit perfectly in the space, and looked "
    "professionally made."
)

CASE3_TEXT = (
    "Many cities are exploring the idea of replacing traditional "
    "streetlights with smart LED systems. These smart lights are far more "
    "energy-efficient than conventional bulbs, helping municipalities cut "
    "electricity costs. In fact, several pilot programs have reported "
    "savings of up to 60% on lighting expenses after switching to LEDs. "
    "However, the data systems that control these lights require regular "
    "software updates and cybersecurity measures, which have added "
    "unexpected ongoing costs for some cities. In some cases, these "
    "challenges have led municipalities to abandon LED upgrades altogether "
    "and return to conventional lighting."
)

OCEAN_TEXT = (
    "The ocean is a crucial carbon sink. Marine ecosystems absorb vast "
    "amounts of CO2. Conversely, the ocean does not play any role in "
    "climate regulation. Protecting these habitats is vital for mitigating "
    "climate change. This is because healthy oceans sequester carbon."
)


@dataclass(frozen=True)
class FixtureCase:
    name: str
    text: str
    target: int
    roles: dict[int, str]  # sentence index -> premise | contradiction


CASES: dict[str, FixtureCase] = {
    "case1": FixtureCase("case1", CASE1_TEXT, target=0,
                         roles={1: "premise", 2: "contradiction"}),
    "case2": FixtureCase("case2", CASE2_TEXT, target=0,
                         roles={4: "contradiction"}),
    "case3": FixtureCase("case3", CASE3_TEXT, target=2,
                         roles={1: "premise", 4: "contradiction"}),
    "ocean": FixtureCase("ocean", OCEAN_TEXT, target=0,
                         roles={1: "premise", 2: "contradiction"}),
}

_SUFFIXES = {"text": ".txt", "attn": ".attn", "nli": ".nli.jsonl"}


def fixture_names() -> tuple[str, ...]:
    return tuple(CASES)


def fixture_case(name: str) -> FixtureCase:
    try:
        return CASES[name]
    except KeyError:
        raise ValueError(
            f"unknown fixture {name!r}; available: {', '.join(CASES)}") from None


def fixture_path(name: str, kind: str) -> Path:
    fixture_case(name)
    return _FIXTURE_DIR / f"{name}{_SUFFIXES[kind]}"


def load_fixture_document(name: str) -> tuple[Document, TokenAttention]:
    """Segment the committed text and pair it with its attention file."""
    case = fixture_case(name)
    doc = segment(case.text)
    att, alignment, doc_id = read_attention_file(fixture_path(name, "attn"))
    if doc_id != doc.doc_id:
        raise IOFailure(f"fixture {name} attention file does not match its text")
    return align(doc, alignment), att


def load_nli_fixture_records(
    names: tuple[str, ...] | None = None,
) -> dict[tuple[str, str], tuple[float, float, float]]:
    """Merged (premise, hypothesis) -> probs map across the committed cases."""
    records: dict[tuple[str, str], tuple[float, float, float]] = {}
    for name in names or fixture_names():
        path = fixture_path(name, "nli")
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                records[(rec["premise"], rec["hypothesis"])] = tuple(rec["probs"])
    return records


_DOC_ID_INDEX: dict[str, str] | None = None


def find_fixture_by_doc_id(doc_id: str) -> str | None:
    global _DOC_ID_INDEX
    if _DOC_ID_INDEX is None:
        _DOC_ID_INDEX = {segment(c.text).doc_id: c.name for c in CASES.values()}
    return _DOC_ID_INDEX.get(doc_id)


class FixtureAttentionProvider:
    """Replays committed attention for known texts; synthesizes otherwise.

    The uniform-pattern fallback keeps fixture mode usable on arbitrary
    input instead of rejecting everything that is not a committed case.
    """

    provider_id = "fixture"

    def __init__(self, *, max_tokens: int = 4096):
        self.max_tokens = max_tokens
        self._fallback = SyntheticAttentionProvider(max_tokens=max_tokens)

    def get_attention(self, doc: Document) -> tuple[TokenAttention, TokenAlignment]:
        name = find_fixture_by_doc_id(doc.doc_id)
        if name is None:
            return self._fallback.get_attention(doc)
        att, alignment, _ = read_attention_file(fixture_path(name, "attn"))
        return att, alignment

    def describe(self) -> dict:
        return {"backend": "fixture", "status": "ok", "model_id": "fixture"}
