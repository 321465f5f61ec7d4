"""Render an analysis result as JSON, a standalone HTML page, or ANSI text."""

from __future__ import annotations

import html as _html
import json

from .docmodel import Document
from .fusion import AnalysisResult

FORMATS = ("json", "html", "terminal")

_PAGE = """<!doctype html>
<html>
<head>
<meta charset="utf-8">
<title>claim analysis</title>
<style>
body {{ font: 16px/1.7 Georgia, serif; max-width: 46em; margin: 3em auto; padding: 0 1em; }}
.target {{ background: #c9ecc9; }}
.premise {{ background: #ffe9a3; }}
.contradiction {{ background: #ffc2c2; }}
.candidate {{ outline: 1px dashed #888; }}
</style>
</head>
<body>
<p>{body}</p>
</body>
</html>
"""

_ANSI = {
    "target": "\x1b[32m",
    "premise": "\x1b[33m",
    "contradiction": "\x1b[31m",
    "candidate": "\x1b[2m",
    "reset": "\x1b[0m",
}


def _classes(result: AnalysisResult) -> dict[int, tuple[str, str]]:
    """sentence index -> (css class, hover note)."""
    out = {result.target: ("target", "target")}
    for a in result.annotations:
        note = (f"{a.role} | saliency {a.saliency:.4f} | "
                f"confidence {a.nli_confidence:.2f}")
        if a.passed_fusion:
            out[a.index] = (a.role, note)
        else:
            out[a.index] = ("candidate", note + " | below threshold")
    return out


def render_json(result: AnalysisResult) -> str:
    return json.dumps(result.to_dict(), indent=2)


def render_html(result: AnalysisResult, doc: Document) -> str:
    classes = _classes(result)
    parts: list[str] = []
    pos = 0
    for span in doc.sentences:
        parts.append(_html.escape(doc.text[pos:span.char_start]))
        piece = _html.escape(doc.text[span.char_start:span.char_end])
        if span.index in classes:
            cls, note = classes[span.index]
            parts.append(
                f'<span class="{cls}" title="{_html.escape(note)}">{piece}</span>')
        else:
            parts.append(piece)
        pos = span.char_end
    parts.append(_html.escape(doc.text[pos:]))
    return _PAGE.format(body="".join(parts))


def render_terminal(result: AnalysisResult, doc: Document) -> str:
    classes = _classes(result)
    parts: list[str] = []
    pos = 0
    for span in doc.sentences:
        parts.append(doc.text[pos:span.char_start])
        piece = doc.text[span.char_start:span.char_end]
        if span.index in classes:
            cls, _ = classes[span.index]
            piece = f"{_ANSI[cls]}{piece}{_ANSI['reset']}"
        parts.append(piece)
        pos = span.char_end
    parts.append(doc.text[pos:])
    return "".join(parts)


def render(result: AnalysisResult, doc: Document | None, fmt: str) -> str:
    if fmt == "json":
        return render_json(result)
    if doc is None:
        raise ValueError(f"{fmt} rendering needs the document text")
    if fmt == "html":
        return render_html(result, doc)
    if fmt == "terminal":
        return render_terminal(result, doc)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
