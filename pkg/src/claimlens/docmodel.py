"""Document model: text with aligned sentence spans and token spans.

A Document keeps one NFC-normalized text plus sentence character spans,
so the token-level view (attention matrices) and the sentence-level view
(saliency, annotations) always refer to the same offsets. All types are
immutable; operations return new values.
"""

from __future__ import annotations

import bisect
import hashlib
import re
import unicodedata
from dataclasses import dataclass, replace

from .errors import AlignmentGap, EmptyDocument, OffsetOutOfBounds

# Tokens stripped of the terminal period before the guard lookup. Entries
# are matched case-sensitively. Terminal-position abbreviations ("etc.")
# are deliberately absent: they end sentences more often than not.
DEFAULT_ABBREVIATIONS = frozenset({
    "Dr", "Mr", "Mrs", "Ms", "Prof", "Rev", "Hon", "Sen", "Gov", "Pres",
    "Gen", "Col", "Capt", "Lt", "Sgt", "Jr", "Sr", "St", "Mt",
    "Ave", "Blvd", "Rd", "Dept", "Univ", "Inc", "Ltd", "Co", "Corp",
    "Jan", "Feb", "Mar", "Apr", "Jun", "Jul", "Aug", "Sep", "Sept",
    "Oct", "Nov", "Dec", "Mon", "Tue", "Tues", "Wed", "Thu", "Thurs",
    "Fri", "Sat", "Sun", "Fig", "Eq", "e.g", "i.e", "vs", "cf", "al",
    "approx",
})

# Terminal punctuation run, optionally followed by closing quotes/brackets.
_TERMINAL_RE = re.compile(r"[.!?]+[\"'”’)\]]*")
_LAST_TOKEN_RE = re.compile(r"(\S+)\Z")


@dataclass(frozen=True)
class SentenceSpan:
    """Half-open character span of one sentence; token range filled by align().

    ``token_start``/``token_end`` index the document's *non-special* token
    sequence (special tokens are excluded before aggregation).
    """

    index: int
    char_start: int
    char_end: int
    token_start: int | None = None
    token_end: int | None = None

    def __post_init__(self):
        if self.char_start >= self.char_end:
            raise ValueError(f"empty sentence span at index {self.index}")
        if self.token_start is not None and self.token_end is not None:
            if self.token_start >= self.token_end:
                raise ValueError(f"sentence {self.index} has an empty token range")


@dataclass(frozen=True)
class TokenAlignment:
    """Per-token character offsets plus a special-token mask.

    Covers the provider's *raw* token sequence; tokens flagged special
    (BOS/EOS/padding) are excluded from sentence assignment and from every
    token set used in saliency aggregation.
    """

    token_char_offsets: tuple[tuple[int, int], ...]
    special_token_mask: tuple[bool, ...]

    def __post_init__(self):
        if len(self.token_char_offsets) != len(self.special_token_mask):
            raise ValueError("offsets and mask lengths differ")
        prev = -1
        for (start, end), special in zip(self.token_char_offsets, self.special_token_mask):
            if special:
                continue
            if start < prev:
                raise ValueError("token offsets must be non-decreasing")
            if end < start:
                raise ValueError("token span end precedes start")
            prev = start

    def __len__(self) -> int:
        return len(self.token_char_offsets)

    @property
    def non_special_count(self) -> int:
        return sum(1 for s in self.special_token_mask if not s)


@dataclass(frozen=True)
class Document:
    """Raw text plus ordered, non-overlapping sentence spans."""

    text: str
    sentences: tuple[SentenceSpan, ...]
    doc_id: str

    def __post_init__(self):
        prev_end = 0
        for i, span in enumerate(self.sentences):
            if span.index != i:
                raise ValueError("sentence indices must be consecutive from 0")
            if span.char_start < prev_end:
                raise ValueError("sentence spans overlap or are out of order")
            if span.char_start < 0 or span.char_end > len(self.text):
                raise ValueError("sentence span outside text bounds")
            if not self.text[span.char_start:span.char_end].strip():
                raise ValueError(f"sentence {i} is whitespace-only")
            prev_end = span.char_end

    @property
    def is_aligned(self) -> bool:
        return all(s.token_start is not None for s in self.sentences)

    @property
    def token_count(self) -> int:
        """Total non-special tokens; requires alignment."""
        if not self.is_aligned:
            raise ValueError("document is not token-aligned")
        return self.sentences[-1].token_end  # ranges are a partition of [0, n)

    def sentence_text(self, index: int) -> str:
        span = self.sentences[index]
        return self.text[span.char_start:span.char_end]

    def to_dict(self) -> dict:
        """Canonical wire representation."""
        return {
            "doc_id": self.doc_id,
            "text": self.text,
            "sentences": [
                {
                    "index": s.index,
                    "char_start": s.char_start,
                    "char_end": s.char_end,
                    "token_start": s.token_start,
                    "token_end": s.token_end,
                }
                for s in self.sentences
            ],
        }


def compute_doc_id(text: str) -> str:
    """Hex digest of the NFC-normalized text. Deterministic across clients."""
    normalized = unicodedata.normalize("NFC", text)
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()


def _is_boundary(text: str, match: re.Match, abbreviations: frozenset[str]) -> bool:
    """Decide whether a terminal-punctuation run ends a sentence.

    Boundary rule: the run must be followed by whitespace and then an
    uppercase letter. For a lone period, the preceding token is checked
    against the abbreviation list and a single-letter-initial guard.
    """
    end = match.end()
    rest = text[end:]
    if not rest or not rest[0].isspace():
        return False
    nxt = rest.lstrip()
    if not nxt or not nxt[0].isupper():
        return False
    run = match.group().rstrip("\"'”’)]")
    if run == ".":
        m = _LAST_TOKEN_RE.search(text, 0, match.start())
        if m:
            word = m.group(1).lstrip("\"'“‘([").rstrip(".")
            if word in abbreviations:
                return False
            if len(word) == 1 and word.isalpha():
                return False  # initials: "J. K. Rowling"
    return True


def segment(text: str, *, abbreviations: frozenset[str] | None = None) -> Document:
    """Split text into sentences with stable character offsets.

    Rule-based: a sentence ends at terminal punctuation (., !, ?) followed
    by whitespace and a capital letter, unless an abbreviation or initial
    guard applies. Deterministic by construction so committed fixtures do
    not drift with library versions. Known limitation: an acronym directly
    before a capitalized name ("U.S. Senate") splits.

    Raises EmptyDocument when no non-whitespace content remains.
    """
    if abbreviations is None:
        abbreviations = DEFAULT_ABBREVIATIONS
    normalized = unicodedata.normalize("NFC", text)
    if not normalized.strip():
        raise EmptyDocument("document has no sentence-worthy content")

    cut_points: list[int] = []
    for match in _TERMINAL_RE.finditer(normalized):
        if _is_boundary(normalized, match, abbreviations):
            cut_points.append(match.end())

    spans: list[SentenceSpan] = []
    start = 0
    for cut in cut_points + [len(normalized)]:
        segment_text = normalized[start:cut]
        stripped = segment_text.strip()
        if stripped:
            lead = len(segment_text) - len(segment_text.lstrip())
            trail = len(segment_text) - len(segment_text.rstrip())
            spans.append(SentenceSpan(
                index=len(spans),
                char_start=start + lead,
                char_end=cut - trail,
            ))
        start = cut

    return Document(text=normalized, sentences=tuple(spans), doc_id=compute_doc_id(normalized))


def align(doc: Document, alignment: TokenAlignment) -> Document:
    """Assign every non-special token to a sentence and fill token ranges.

    A token belongs to the sentence containing its first character; tokens
    starting in inter-sentence whitespace attach to the following sentence
    (trailing whitespace attaches to the last sentence). Token indices are
    positions in the filtered, non-special sequence.

    Raises AlignmentGap if any sentence ends up with zero tokens, and
    OffsetOutOfBounds for offsets outside the text.
    """
    n_sent = len(doc.sentences)
    starts = [s.char_start for s in doc.sentences]

    counts = [0] * n_sent
    filtered_index = 0
    first_token: list[int | None] = [None] * n_sent
    for (char_start, char_end), special in zip(
            alignment.token_char_offsets, alignment.special_token_mask):
        if special:
            continue
        if char_start < 0 or char_end > len(doc.text):
            raise OffsetOutOfBounds(
                f"token span ({char_start}, {char_end}) outside text of length {len(doc.text)}")
        sent = _locate(doc, starts, char_start)
        if first_token[sent] is None:
            first_token[sent] = filtered_index
        counts[sent] += 1
        filtered_index += 1

    for i, c in enumerate(counts):
        if c == 0:
            raise AlignmentGap(f"sentence {i} received no tokens")

    new_spans = []
    cursor = 0
    for span, count in zip(doc.sentences, counts):
        new_spans.append(replace(span, token_start=cursor, token_end=cursor + count))
        cursor += count
    return Document(text=doc.text, sentences=tuple(new_spans), doc_id=doc.doc_id)


def _locate(doc: Document, starts: list[int], offset: int) -> int:
    """Sentence index for a character offset; whitespace maps forward."""
    i = bisect.bisect_right(starts, offset) - 1
    if i < 0:
        return 0  # before the first sentence: attach forward
    if offset < doc.sentences[i].char_end:
        return i
    # Past sentence i's end: inter-sentence whitespace goes to the next
    # sentence; trailing whitespace clamps to the last one.
    return min(i + 1, len(doc.sentences) - 1)


def find_sentence(doc: Document, char_offset: int) -> int:
    """Index of the sentence containing the offset.

    Offsets inside inter-sentence whitespace resolve to the nearest
    following sentence (UI clicks between sentences select the next one).
    """
    if char_offset < 0 or char_offset >= len(doc.text):
        raise OffsetOutOfBounds(
            f"offset {char_offset} outside text of length {len(doc.text)}")
    starts = [s.char_start for s in doc.sentences]
    return _locate(doc, starts, char_offset)
