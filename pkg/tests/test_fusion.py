"""Pipeline fusion: analyze, refilter, result serialization, and rendering."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimlens.docmodel import segment
from claimlens.errors import IndexOutOfRange, PipelineError, StaleCache
from claimlens.fixturedata import load_fixture_document, load_nli_fixture_records
from claimlens.fusion import AnalysisResult, analyze, prepare, refilter
from claimlens.nli import FixtureNLIBackend, NLIConfig, NLIEngine, ScriptedNLIBackend
from claimlens.render import render, render_html, render_json, render_terminal
from claimlens.saliency import (
    SaliencyMatrix,
    ThresholdPolicy,
    aggregate,
    compute_stats,
)


def _fixture_setup(name):
    """Aligned document, saliency matrix, and a fresh engine for one case."""
    doc, attention = load_fixture_document(name)
    sal = aggregate(attention, doc)
    engine = NLIEngine(FixtureNLIBackend(load_nli_fixture_records([name])),
                       NLIConfig(backend="fixture"))
    return doc, sal, engine


def _scripted_setup(text, rules, matrix):
    doc = segment(text)
    spans = []
    cursor = 0
    for s in doc.sentences:
        spans.append((cursor, cursor + 1))
        cursor += 1
    # One token per sentence keeps the saliency matrix hand-writable.
    from claimlens.docmodel import SentenceSpan, Document
    sentences = tuple(
        SentenceSpan(index=s.index, char_start=s.char_start, char_end=s.char_end,
                     token_start=spans[i][0], token_end=spans[i][1])
        for i, s in enumerate(doc.sentences))
    doc = Document(text=doc.text, sentences=sentences, doc_id=doc.doc_id)
    matrix = np.asarray(matrix, dtype=np.float64)
    sal = SaliencyMatrix(matrix=matrix, stats=compute_stats(matrix))
    engine = NLIEngine(ScriptedNLIBackend(rules), NLIConfig(backend="scripted"))
    return doc, sal, engine


class TestAnalyze:
    def test_case1_flags_premise_and_contradiction(self):
        doc, sal, engine = _fixture_setup("case1")
        result = analyze(doc, 0, nli=engine, saliency_matrix=sal)
        roles = {a.index: a for a in result.annotations}
        assert set(roles) == {1, 2}
        assert roles[1].role == "premise" and roles[1].passed_fusion
        assert roles[2].role == "contradiction" and roles[2].passed_fusion
        assert roles[1].saliency == pytest.approx(0.110, abs=1e-6)
        assert roles[2].saliency == pytest.approx(0.1288, abs=1e-6)

    def test_case2_contradiction_under_k2(self):
        doc, sal, engine = _fixture_setup("case2")
        policy = ThresholdPolicy(mode="relative", k=2.0)
        result = analyze(doc, 0, nli=engine, saliency_matrix=sal, policy=policy)
        roles = {a.index: a for a in result.annotations}
        assert roles[4].role == "contradiction"
        assert roles[4].passed_fusion
        assert roles[4].saliency == pytest.approx(0.0768, abs=1e-6)

    def test_labeled_but_zero_saliency_fails_fusion(self):
        # top_m admits a zero-saliency sentence; NLI labels it; the
        # confirmation gate still rejects it.
        doc, sal, engine = _scripted_setup(
            "Alpha. Beta. Gamma.",
            {("Beta.", "Alpha."): "entailment", ("Gamma.", "Alpha."): "entailment"},
            [[0.0, 0.0, 0.0], [0.2, 0.0, 0.0], [0.0, 0.0, 0.0]])
        policy = ThresholdPolicy(mode="top_m", m=2)
        result = analyze(doc, 0, nli=engine, saliency_matrix=sal,
                         policy=policy, tau_confirm=0.1)
        rows = {a.index: a for a in result.annotations}
        assert rows[1].passed_fusion  # 0.2 >= 0.1
        assert rows[2].role == "premise" and not rows[2].passed_fusion

    def test_tau_confirm_raises_the_gate(self):
        doc, sal, engine = _fixture_setup("case1")
        result = analyze(doc, 0, nli=engine, saliency_matrix=sal, tau_confirm=0.12)
        rows = {a.index: a for a in result.annotations}
        assert result.tau_effective == pytest.approx(0.12)
        assert not rows[1].passed_fusion  # 0.110 < 0.12
        assert rows[2].passed_fusion      # 0.1288 >= 0.12

    def test_annotations_sorted_and_target_absent(self):
        doc, sal, engine = _fixture_setup("case3")
        result = analyze(doc, 2, nli=engine, saliency_matrix=sal,
                         policy=ThresholdPolicy(mode="relative", k=0.0))
        indices = [a.index for a in result.annotations]
        assert indices == sorted(indices)
        assert 2 not in indices

    @pytest.mark.parametrize("name,target", [
        ("case1", 0), ("case2", 0), ("case3", 2), ("ocean", 0)])
    def test_conjunction_soundness(self, name, target):
        doc, sal, engine = _fixture_setup(name)
        for k in (-1.0, 0.0, 1.0):
            result = analyze(doc, target, nli=engine, saliency_matrix=sal,
                             policy=ThresholdPolicy(mode="relative", k=k))
            for a in result.annotations:
                assert a.role in ("premise", "contradiction")
                assert a.passed_fusion == (a.saliency >= result.tau_effective)

    def test_full_pipeline_from_provider(self):
        from claimlens.fixturedata import CASE1_TEXT, FixtureAttentionProvider
        doc = segment(CASE1_TEXT)
        engine = NLIEngine(FixtureNLIBackend(load_nli_fixture_records(["case1"])),
                           NLIConfig(backend="fixture"))
        result = analyze(doc, 0, attention_provider=FixtureAttentionProvider(),
                         nli=engine)
        assert {a.index for a in result.annotations if a.passed_fusion} == {1, 2}
        assert result.timings["attention_ms"] >= 0.0

    def test_bad_target_rejected(self):
        doc, sal, engine = _fixture_setup("case1")
        with pytest.raises(IndexOutOfRange):
            analyze(doc, 99, nli=engine, saliency_matrix=sal)

    def test_provider_or_matrix_required(self):
        doc, _, engine = _fixture_setup("case1")
        with pytest.raises(ValueError):
            analyze(doc, 0, nli=engine)

    def test_cached_saliency_must_match_document(self):
        doc, _, engine = _fixture_setup("case1")
        wrong = SaliencyMatrix(matrix=np.zeros((2, 2)),
                               stats=compute_stats(np.zeros((2, 2))))
        with pytest.raises(StaleCache):
            analyze(doc, 0, nli=engine, saliency_matrix=wrong)

    def test_attention_failure_carries_stage_tag(self):
        class BrokenProvider:
            provider_id = "broken"

            def get_attention(self, doc):
                raise RuntimeError("attention backend exploded")

        doc, _, engine = _fixture_setup("case1")
        with pytest.raises(PipelineError) as excinfo:
            prepare(doc, BrokenProvider())
        assert excinfo.value.stage == "attention"

    def test_nli_failure_carries_stage_tag(self):
        class BrokenBackend:
            backend_id = "broken"

            def classify_batch(self, pairs):
                raise RuntimeError("socket closed")

        doc, sal, _ = _fixture_setup("case1")
        engine = NLIEngine(BrokenBackend(), NLIConfig(backend="scripted"))
        with pytest.raises(PipelineError) as excinfo:
            analyze(doc, 0, nli=engine, saliency_matrix=sal)
        assert excinfo.value.stage == "nli"

    def test_deterministic_apart_from_timings(self):
        doc, sal, engine = _fixture_setup("case1")
        a = analyze(doc, 0, nli=engine, saliency_matrix=sal).to_dict()
        b = analyze(doc, 0, nli=engine, saliency_matrix=sal).to_dict()
        a.pop("timings"), b.pop("timings")
        assert a == b


class TestRefilter:
    def test_identical_policy_is_idempotent(self):
        doc, sal, engine = _fixture_setup("case1")
        first = analyze(doc, 0, nli=engine, saliency_matrix=sal)
        second = refilter(first, sal, first.policy, doc=doc, nli=engine)
        assert second.annotations == first.annotations
        assert second.policy == first.policy
        assert second.stats == first.stats

    def test_tighten_above_everything_clears_flags(self):
        doc, sal, engine = _fixture_setup("case1")
        first = analyze(doc, 0, nli=engine, saliency_matrix=sal)
        tight = refilter(first, sal, ThresholdPolicy(mode="absolute", tau=1.0), doc=doc)
        assert len(tight.annotations) == len(first.annotations)
        assert all(not a.passed_fusion for a in tight.annotations)
        # Roles and confidences carry over untouched.
        assert {a.index: a.role for a in tight.annotations} == \
            {a.index: a.role for a in first.annotations}

    def test_loosen_classifies_new_candidates_on_demand(self):
        doc, sal, engine = _fixture_setup("case3")
        first = analyze(doc, 2, nli=engine, saliency_matrix=sal,
                        policy=ThresholdPolicy(mode="relative", k=2.0))
        assert {a.index for a in first.annotations} == {1}
        before = engine.counters.backend_pairs

        loose = refilter(first, sal, ThresholdPolicy(mode="relative", k=0.0),
                         doc=doc, nli=engine)
        rows = {a.index: a for a in loose.annotations}
        assert rows[4].role == "contradiction" and rows[4].passed_fusion
        assert rows[1].passed_fusion
        # Only the newly admitted sentence paid for NLI (two ordered pairs).
        assert engine.counters.backend_pairs == before + 2

    def test_tighten_needs_no_engine(self):
        doc, sal, engine = _fixture_setup("case3")
        first = analyze(doc, 2, nli=engine, saliency_matrix=sal,
                        policy=ThresholdPolicy(mode="relative", k=0.0))
        tight = refilter(first, sal, ThresholdPolicy(mode="relative", k=1.0), doc=doc)
        rows = {a.index: a for a in tight.annotations}
        assert rows[1].passed_fusion          # 0.0024 clears k=1
        assert not rows[4].passed_fusion      # 0.0008 no longer selected

    def test_fresh_candidates_without_engine_raise(self):
        doc, sal, engine = _fixture_setup("case3")
        first = analyze(doc, 2, nli=engine, saliency_matrix=sal,
                        policy=ThresholdPolicy(mode="relative", k=2.0))
        with pytest.raises(ValueError):
            refilter(first, sal, ThresholdPolicy(mode="relative", k=0.0), doc=doc)

    def test_doc_id_mismatch_rejected(self):
        doc, sal, engine = _fixture_setup("case1")
        other_doc, other_sal, _ = _fixture_setup("case2")
        result = analyze(doc, 0, nli=engine, saliency_matrix=sal)
        with pytest.raises(StaleCache):
            refilter(result, other_sal, result.policy, doc=other_doc)

    def test_wrong_size_matrix_rejected(self):
        doc, sal, engine = _fixture_setup("case1")
        result = analyze(doc, 0, nli=engine, saliency_matrix=sal)
        small = SaliencyMatrix(matrix=np.zeros((2, 2)),
                               stats=compute_stats(np.zeros((2, 2))))
        with pytest.raises(StaleCache):
            refilter(result, small, result.policy, doc=doc)

    @given(st.lists(st.floats(min_value=0.0, max_value=0.2),
                    min_size=2, max_size=6))
    @settings(max_examples=25, deadline=None)
    def test_raising_tau_never_adds_passing_annotations(self, taus):
        doc, sal, engine = _fixture_setup("case1")
        base = analyze(doc, 0, nli=engine, saliency_matrix=sal,
                       policy=ThresholdPolicy(mode="absolute", tau=0.0))
        passing = []
        for tau in sorted(taus):
            result = refilter(base, sal, ThresholdPolicy(mode="absolute", tau=tau),
                              doc=doc, nli=engine)
            passing.append({a.index for a in result.annotations if a.passed_fusion})
        for looser, tighter in zip(passing, passing[1:]):
            assert tighter <= looser


class TestResultSerialization:
    def test_canonical_json_shape(self):
        doc, sal, engine = _fixture_setup("case1")
        data = analyze(doc, 0, nli=engine, saliency_matrix=sal).to_dict()
        assert set(data) == {"doc_id", "target", "policy", "stats",
                             "annotations", "timings"}
        assert set(data["policy"]) == {"mode", "params", "direction"}
        assert set(data["stats"]) == {"mean", "std"}
        assert set(data["timings"]) == {"attention_ms", "saliency_ms", "nli_ms"}
        for row in data["annotations"]:
            assert set(row) == {"index", "role", "saliency",
                                "nli_confidence", "passed_fusion"}

    @pytest.mark.parametrize("tau_confirm", [0.0, 0.12])
    def test_dict_round_trip(self, tau_confirm):
        doc, sal, engine = _fixture_setup("case1")
        result = analyze(doc, 0, nli=engine, saliency_matrix=sal,
                         tau_confirm=tau_confirm)
        clone = AnalysisResult.from_dict(json.loads(json.dumps(result.to_dict())))
        assert clone == result
        assert clone.tau_effective == result.tau_effective


class TestRender:
    def _case1_result(self):
        doc, sal, engine = _fixture_setup("case1")
        return analyze(doc, 0, nli=engine, saliency_matrix=sal), doc

    def test_html_has_three_highlights(self):
        result, doc = self._case1_result()
        page = render_html(result, doc)
        assert page.count('<span class="target"') == 1
        assert page.count('<span class="premise"') == 1
        assert page.count('<span class="contradiction"') == 1
        assert page.count("<span") == 3

    def test_html_no_passing_annotations_highlights_only_target(self):
        result, doc = self._case1_result()
        tight = refilter(result, aggregate(
            load_fixture_document("case1")[1], doc),
            ThresholdPolicy(mode="absolute", tau=1.0), doc=doc)
        page = render_html(tight, doc)
        assert page.count('<span class="target"') == 1
        # Labeled-but-failing sentences keep a subdued candidate marker.
        assert page.count('<span class="candidate"') == 2
        assert '<span class="premise"' not in page

    def test_html_escapes_text(self):
        doc, sal, engine = _scripted_setup(
            "Tom & Jerry fight. Cats <i>hate</i> mice.",
            {}, [[0.0, 0.0], [0.1, 0.0]])
        result = analyze(doc, 0, nli=engine, saliency_matrix=sal)
        page = render_html(result, doc)
        assert "Tom &amp; Jerry" in page
        assert "<i>" not in page

    def test_terminal_uses_ansi_colors(self):
        result, doc = self._case1_result()
        text = render_terminal(result, doc)
        assert "\x1b[32m" in text  # target green
        assert "\x1b[33m" in text  # premise yellow
        assert "\x1b[31m" in text  # contradiction red
        stripped = text
        for code in ("\x1b[32m", "\x1b[33m", "\x1b[31m", "\x1b[2m", "\x1b[0m"):
            stripped = stripped.replace(code, "")
        assert stripped == doc.text

    def test_json_render_round_trips(self):
        result, doc = self._case1_result()
        clone = AnalysisResult.from_dict(json.loads(render_json(result)))
        assert clone == result

    def test_render_dispatch_and_unknown_format(self):
        result, doc = self._case1_result()
        assert render(result, None, "json") == render_json(result)
        assert render(result, doc, "html") == render_html(result, doc)
        with pytest.raises(ValueError):
            render(result, doc, "pdf")
        with pytest.raises(ValueError):
            render(result, None, "html")
