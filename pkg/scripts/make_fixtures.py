#!/usr/bin/env python3
"""Regenerate the committed fixtures under src/claimlens/fixtures/.

Each case gets a block-constant token attention matrix: every token pair
inside sentence block (i, j) carries the same weight, so the sentence-level
aggregate equals that weight exactly, and leftover row mass sits on the
diagonal to keep rows stochastic. Case 2's two unpinned blocks are solved
so the document stats land exactly on mean 0.0135 / std 0.0284.

Run from the repo root after an editable install:  python3 scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from claimlens.attention.attnfile import read_attention_file, write_attention_file
from claimlens.attention.synthetic import word_alignment
from claimlens.attention.types import TokenAttention
from claimlens.docmodel import align, segment
from claimlens.fixturedata import CASES, load_nli_fixture_records
from claimlens.fusion import analyze
from claimlens.nli import FixtureNLIBackend, NLIEngine, derive_label
from claimlens.saliency import ThresholdPolicy, aggregate

OUT = Path(__file__).resolve().parent.parent / "src" / "claimlens" / "fixtures"

LAYER_INDEX = 27  # last layer of the 28-layer attention model


def solve_case2_free_values(fixed: dict, count: int,
                            mean: float, std: float) -> tuple[float, float]:
    """Two block weights x <= y with sum/sum-of-squares hitting mean/std."""
    s = count * mean - sum(fixed.values())
    q = count * (std * std + mean * mean) - sum(v * v for v in fixed.values())
    disc = s * s - 2.0 * (s * s - q)
    if disc <= 0:
        raise SystemExit("case2 stats are not reachable from the fixed blocks")
    x = (s - math.sqrt(disc)) / 2.0
    y = (s + math.sqrt(disc)) / 2.0
    if x <= 0:
        raise SystemExit("case2 solution has a non-positive block weight")
    return x, y


_CASE2_FIXED = {
    (1, 0): 0.004,
    (2, 0): 0.003,
    (3, 0): 0.002, (3, 1): 0.002, (3, 2): 0.002,
    (4, 0): 0.0768,  # target -> IKEA, pinned to the published score
    (4, 1): 0.002, (4, 2): 0.002, (4, 3): 0.002,
    (5, 0): 0.001, (5, 1): 0.002, (5, 2): 0.002, (5, 3): 0.002,
}

_CASE2_X, _CASE2_Y = solve_case2_free_values(_CASE2_FIXED, 15, 0.0135, 0.0284)

BLOCK_VALUES: dict[str, dict[tuple[int, int], float]] = {
    "case1": {
        (1, 0): 0.110,    # premise -> target
        (2, 0): 0.1288,   # contradiction -> target, published
        (2, 1): 0.010,
        (3, 0): 0.008, (3, 1): 0.006, (3, 2): 0.004,
    },
    "case2": {**_CASE2_FIXED, (2, 1): _CASE2_X, (5, 4): _CASE2_Y},
    "case3": {
        (1, 0): 0.0005,
        (2, 0): 0.0005, (2, 1): 0.0024,   # premise pair, published
        (3, 0): 0.0005, (3, 1): 0.0005, (3, 2): 0.0005,
        (4, 0): 0.0005, (4, 1): 0.0005, (4, 2): 0.0008,  # contradiction, published
        (4, 3): 0.0005,
    },
    "ocean": {
        (1, 0): 0.09,
        (2, 0): 0.11,
        (2, 1): 0.004,
        (3, 0): 0.004, (3, 1): 0.004, (3, 2): 0.004,
        (4, 0): 0.004, (4, 1): 0.004, (4, 2): 0.004, (4, 3): 0.004,
    },
}

# (premise index, hypothesis index, (entail, neutral, contradiction)).
# Covers both ordered checks for every sentence a test can admit as a
# candidate; everything else falls back to neutral.
NLI_RECORDS: dict[str, list[tuple[int, int, tuple[float, float, float]]]] = {
    "case1": [
        (1, 0, (0.912, 0.063, 0.025)),
        (0, 1, (0.041, 0.902, 0.057)),
        (2, 0, (0.021, 0.047, 0.932)),
        (0, 2, (0.013, 0.028, 0.959)),
        (3, 0, (0.036, 0.921, 0.043)),
        (0, 3, (0.044, 0.913, 0.043)),
    ],
    "case2": [
        (4, 0, (0.052, 0.871, 0.077)),
        (0, 4, (0.031, 0.102, 0.867)),
        (1, 0, (0.063, 0.894, 0.043)),
        (0, 1, (0.058, 0.907, 0.035)),
    ],
    "case3": [
        (1, 2, (0.874, 0.098, 0.028)),
        (2, 1, (0.094, 0.868, 0.038)),
        (4, 2, (0.049, 0.885, 0.066)),
        (2, 4, (0.042, 0.117, 0.841)),
        (0, 2, (0.072, 0.891, 0.037)),
        (2, 0, (0.066, 0.903, 0.031)),
        (3, 2, (0.057, 0.889, 0.054)),
        (2, 3, (0.061, 0.894, 0.045)),
    ],
    "ocean": [
        (1, 0, (0.897, 0.078, 0.025)),
        (0, 1, (0.066, 0.881, 0.053)),
        (0, 2, (0.009, 0.018, 0.973)),
        (2, 0, (0.011, 0.033, 0.956)),
    ],
}


def build_matrix(values: dict[tuple[int, int], float],
                 ranges: list[tuple[int, int]], n_tokens: int) -> np.ndarray:
    m = np.zeros((n_tokens, n_tokens), dtype=np.float64)
    for (i, j), v in values.items():
        if j >= i:
            raise SystemExit(f"block ({i}, {j}) is not strictly below the diagonal")
        (ri_lo, ri_hi), (rj_lo, rj_hi) = ranges[i], ranges[j]
        m[ri_lo:ri_hi, rj_lo:rj_hi] = v
    slack = 1.0 - m.sum(axis=1)
    if slack.min() < 0.02:
        raise SystemExit(f"row budget exhausted (min slack {slack.min():.4f})")
    m[np.arange(n_tokens), np.arange(n_tokens)] = slack
    return m


def build_case(name: str) -> None:
    case = CASES[name]
    doc = segment(case.text)
    alignment = word_alignment(doc.text)
    aligned = align(doc, alignment)
    ranges = [(s.token_start, s.token_end) for s in aligned.sentences]
    n = aligned.token_count

    matrix = build_matrix(BLOCK_VALUES[name], ranges, n).astype(np.float32)
    att = TokenAttention(
        matrix=matrix,
        layer_index=LAYER_INDEX,
        head_reduction="mean",
        provider_id="fixture",
        special_token_mask=(False,) * n,
    )
    assert att.row_stochastic_within(1e-4)

    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / f"{name}.txt").write_text(case.text, encoding="utf-8")
    write_attention_file(OUT / f"{name}.attn", att, alignment, doc.doc_id)
    with open(OUT / f"{name}.nli.jsonl", "w", encoding="utf-8") as fh:
        for p_idx, h_idx, probs in NLI_RECORDS[name]:
            fh.write(json.dumps({
                "premise": doc.sentence_text(p_idx),
                "hypothesis": doc.sentence_text(h_idx),
                "probs": list(probs),
                "label": derive_label(probs),
            }) + "\n")

    verify(name)
    print(f"{name}: {n} tokens, {len(aligned.sentences)} sentences -> ok")


def _engine(name: str) -> NLIEngine:
    return NLIEngine(FixtureNLIBackend(load_nli_fixture_records((name,))))


def _roles(result) -> dict[int, str]:
    return {a.index: a.role for a in result.annotations if a.passed_fusion}


def verify(name: str) -> None:
    case = CASES[name]
    doc = segment(case.text)
    att, alignment, doc_id = read_attention_file(OUT / f"{name}.attn")
    assert doc_id == doc.doc_id
    aligned = align(doc, alignment)
    sal = aggregate(att, aligned)
    for (i, j), v in BLOCK_VALUES[name].items():
        if abs(sal.matrix[i, j] - v) > 2e-8:
            raise SystemExit(f"{name} block ({i},{j}) drifted: {sal.matrix[i, j]!r}")

    run = lambda policy: analyze(  # noqa: E731
        aligned, case.target, nli=_engine(name), policy=policy, saliency_matrix=sal)

    if name == "case1":
        assert abs(sal.stats.mean - 0.0444667) < 1e-6 and _roles(run(ThresholdPolicy())) == case.roles
    elif name == "case2":
        assert abs(sal.stats.mean - 0.0135) < 1e-8
        assert abs(sal.stats.std - 0.0284) < 1e-8
        assert _roles(run(ThresholdPolicy(mode="relative", k=2.0))) == case.roles
        assert _roles(run(ThresholdPolicy(mode="relative", k=3.0))) == {}
    elif name == "case3":
        assert _roles(run(ThresholdPolicy(mode="relative", k=0.0))) == case.roles
        assert _roles(run(ThresholdPolicy())) == {1: "premise"}
    else:
        assert _roles(run(ThresholdPolicy())) == case.roles


def main() -> None:
    for name in CASES:
        build_case(name)
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
