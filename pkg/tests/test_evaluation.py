import math
import random
import unicodedata

import pytest
from hypothesis import given
from hypothesis import strategies as st

from xqasrl.corpus import TokenSpan
from xqasrl.evaluation import (
    EmbeddingCache,
    EvalConfig,
    EvalError,
    MatchReport,
    Scores,
    SpanNode,
    Tally,
    aggregate,
    evaluate_nodes,
    evaluate_predicate,
    evaluate_records,
    flatten_qas,
    match_arguments,
    normalize_question,
    question_exact_match,
    question_semantic_match,
    read_reports,
    report_from_dict,
    report_to_dict,
    token_iou,
    write_reports,
)
from xqasrl.projection import Answer, ProjectedQA

from conftest import brute_force_matching, make_record

# unit vectors whose dot products with e1 are exactly representable floats
COS_078 = (0.78, 0.6257795138864806)
COS_090 = (0.9, 0.4358898943540673)


class StaticEmbedder:
    def __init__(self, table):
        self.table = dict(table)
        self.calls = 0

    def embed_question(self, question):
        self.calls += 1
        return self.table[question]


def nodes(*spans):
    return [SpanNode(span=TokenSpan(s, e), question=f"q{i}") for i, (s, e) in enumerate(spans)]


# -- IOU ------------------------------------------------------------------------


def test_token_iou_cases():
    assert token_iou(TokenSpan(0, 2), TokenSpan(0, 2)) == 1.0
    assert token_iou(TokenSpan(0, 2), TokenSpan(2, 4)) == 0.0
    assert token_iou(TokenSpan(0, 2), TokenSpan(1, 5)) == 0.2
    assert token_iou(TokenSpan(0, 2), TokenSpan(1, 4)) == 0.25
    assert token_iou(TokenSpan(0, 4), TokenSpan(0, 2)) == 0.5


@given(
    st.integers(0, 20).flatmap(lambda s: st.tuples(st.just(s), st.integers(s + 1, 21))),
    st.integers(0, 20).flatmap(lambda s: st.tuples(st.just(s), st.integers(s + 1, 21))),
)
def test_token_iou_symmetric_bounded(a, b):
    sa, sb = TokenSpan(*a), TokenSpan(*b)
    v = token_iou(sa, sb)
    assert v == token_iou(sb, sa)
    assert 0.0 <= v <= 1.0
    assert (v == 1.0) == (sa == sb)


# -- matching --------------------------------------------------------------------


def test_match_boundary_iou_is_inclusive():
    # IOU exactly tau must match
    pred = nodes((0, 2))
    gold = nodes((0, 4))
    assert match_arguments(pred, gold, 0.5) == [(0, 0)]
    assert match_arguments(pred, gold, 0.51) == []


def test_match_tie_prefers_lexicographically_first():
    pred = nodes((0, 2), (2, 4))
    gold = nodes((0, 4))
    # both predictions overlap gold at exactly 0.5; the earlier pred index wins
    assert match_arguments(pred, gold, 0.5) == [(0, 0)]


def test_match_prefers_total_weight_over_lexicographic_order():
    # (0,0) is the lexicographically first edge, but taking it starves gold1,
    # whose only qualifying partner is pred0; the optimum routes around it
    pred = nodes((0, 4), (6, 10))
    gold = nodes((0, 10), (0, 4))
    pairs = match_arguments(pred, gold, 0.4)
    assert pairs == [(0, 1), (1, 0)]


def test_match_empty_sides():
    assert match_arguments([], nodes((0, 1)), 0.5) == []
    assert match_arguments(nodes((0, 1)), [], 0.5) == []


def test_match_one_to_one():
    pred = nodes((0, 3))
    gold = nodes((0, 3), (0, 3))
    pairs = match_arguments(pred, gold, 0.5)
    assert len(pairs) == 1  # a predicted node is consumed by one gold node only


def test_match_against_brute_force_small_instances():
    rng = random.Random(20260817)
    for _ in range(150):
        n_pred, n_gold = rng.randint(0, 5), rng.randint(0, 5)
        mk = lambda: (lambda s: TokenSpan(s, s + rng.randint(1, 4)))(rng.randint(0, 8))
        pred = [SpanNode(mk(), f"p{i}") for i in range(n_pred)]
        gold = [SpanNode(mk(), f"g{i}") for i in range(n_gold)]
        tau = rng.choice([0.0, 0.3, 0.5, 0.75])
        got = match_arguments(pred, gold, tau)
        want = brute_force_matching([n.span for n in pred], [n.span for n in gold], tau)
        assert got == want, (pred, gold, tau)


@given(st.data())
def test_match_output_is_valid_matching(data):
    spans = st.tuples(st.integers(0, 8), st.integers(1, 4)).map(lambda t: TokenSpan(t[0], t[0] + t[1]))
    pred = [SpanNode(s, "p") for s in data.draw(st.lists(spans, max_size=6))]
    gold = [SpanNode(s, "g") for s in data.draw(st.lists(spans, max_size=6))]
    tau = data.draw(st.sampled_from([0.25, 0.5, 0.8]))
    pairs = match_arguments(pred, gold, tau)
    gs = [g for g, _ in pairs]
    ps = [p for _, p in pairs]
    assert len(set(gs)) == len(gs)
    assert len(set(ps)) == len(ps)
    assert gs == sorted(gs)
    for g, p in pairs:
        assert token_iou(gold[g].span, pred[p].span) >= tau


def test_match_tau_monotone():
    rng = random.Random(5)
    spans = [TokenSpan(rng.randint(0, 6), rng.randint(0, 6) + 7) for _ in range(5)]
    pred = [SpanNode(s, "p") for s in spans[:3]]
    gold = [SpanNode(s, "g") for s in spans[2:]]
    sizes = [len(match_arguments(pred, gold, t / 10)) for t in range(0, 11)]
    assert sizes == sorted(sizes, reverse=True)


# -- question matching -------------------------------------------------------------


def test_normalize_fold_collapses_case_and_space():
    assert normalize_question("  Who   LEFT ?\t") == "who left ?"
    assert question_exact_match("Who  LEFT ?", "who left ?")
    assert not question_exact_match("Who LEFT ?", "who left ?", policy="strict")


def test_normalize_strict_keeps_case():
    assert normalize_question("Qui Vote ?", policy="strict") == "Qui Vote ?"
    decomposed = unicodedata.normalize("NFD", "voté")
    assert question_exact_match(f"qui a {decomposed} ?", "qui a voté ?", policy="strict")


def test_semantic_match_inclusive_at_theta():
    emb = StaticEmbedder({"a?": (1.0, 0.0), "b?": COS_078, "c?": (0.0, 1.0), "d?": COS_090})
    ok, cos = question_semantic_match("a?", "b?", emb, theta=0.78)
    assert cos == 0.78 and ok
    ok, cos = question_semantic_match("a?", "c?", emb, theta=0.78)
    assert cos == 0.0 and not ok
    ok, cos = question_semantic_match("a?", "d?", emb, theta=0.78)
    assert cos == 0.9 and ok
    ok, _ = question_semantic_match("a?", "b?", emb, theta=0.781)
    assert not ok


def test_cache_identity_shortcut_needs_no_embedder():
    cache = EmbeddingCache(embedder=None)
    assert cache.cosine("מי אישר ?", "מי אישר ?") == 1.0
    composed = "voté"
    decomposed = unicodedata.normalize("NFD", composed)
    assert cache.cosine(composed, decomposed) == 1.0
    with pytest.raises(EvalError, match="requires an embedder"):
        cache.cosine("a", "b")


def test_cache_embeds_each_text_once():
    emb = StaticEmbedder({"a?": (1.0, 0.0), "b?": COS_078, "c?": (0.0, 1.0)})
    cache = EmbeddingCache(emb)
    cache.cosine("a?", "b?")
    cache.cosine("a?", "c?")
    cache.cosine("b?", "c?")
    assert emb.calls == 3


def test_cache_rejects_dimension_mismatch():
    emb = StaticEmbedder({"a?": (1.0, 0.0), "b?": (1.0, 0.0, 0.0)})
    with pytest.raises(EvalError, match="dimensionality"):
        EmbeddingCache(emb).cosine("a?", "b?")


def test_cosine_clipped_to_unit_interval():
    emb = StaticEmbedder({"a?": (3.0, 4.0), "b?": (6.0, 8.0)})
    assert EmbeddingCache(emb).cosine("a?", "b?") == 1.0
    neg = StaticEmbedder({"a?": (1.0, 0.0), "b?": (-1.0, 0.0)})
    assert EmbeddingCache(neg).cosine("a?", "b?") == -1.0


# -- per-predicate evaluation ---------------------------------------------------


def _qa(question, *spans, texts=None):
    answers = tuple(Answer(TokenSpan(s, e), (texts or {}).get((s, e), "")) for s, e in spans)
    return ProjectedQA(question=question, question_en="", answers=answers)


def test_flatten_qas_one_node_per_answer():
    qas = [_qa("q1?", (0, 1), (2, 3)), _qa("q2?", (4, 5))]
    flat = flatten_qas(qas)
    assert [(n.question, n.span.start) for n in flat] == [("q1?", 0), ("q1?", 2), ("q2?", 4)]


def test_evaluate_predicate_tallies():
    emb = StaticEmbedder({"who left?": (1.0, 0.0), "who departed?": COS_090, "what broke?": (0.0, 1.0)})
    pred_qas = [_qa("who departed?", (0, 2)), _qa("what broke?", (6, 8))]
    gold_qas = [_qa("who left?", (0, 2)), _qa("when?", (3, 4))]
    report = evaluate_predicate(pred_qas, gold_qas, EvalConfig(), embedder=emb)
    # spans: (0,2) matches (0,2); (6,8) and (3,4) are unmatched
    assert report.unlabeled == Tally(tp=1, fp=1, fn=1)
    # matched questions differ as strings but cosine 0.9 >= 0.78
    assert report.exact == Tally(tp=0, fp=2, fn=2)
    assert report.semantic == Tally(tp=1, fp=1, fn=1)
    [pair] = report.matched_pairs
    assert pair.cosine == 0.9 and pair.semantic and not pair.exact


def test_evaluate_exact_fold_counts_case_variants():
    emb = StaticEmbedder({"WHO LEFT?": (1.0, 0.0), "who left?": COS_090})
    pred_qas = [_qa("WHO LEFT?", (0, 2))]
    gold_qas = [_qa("who left?", (0, 2))]
    fold = evaluate_predicate(pred_qas, gold_qas, EvalConfig(), embedder=emb)
    assert fold.exact == Tally(1, 0, 0)
    strict = evaluate_predicate(
        pred_qas, gold_qas, EvalConfig(exact_normalization="strict"), embedder=emb
    )
    # case differs, so the strict policy refuses the pair
    assert strict.exact == Tally(0, 1, 1)


def test_evaluate_identity_is_perfect_without_embedder():
    gold = [make_record(sent_id=f"s{i}") for i in range(3)]
    reports = evaluate_records(gold, gold, EvalConfig(), embedder=None)
    summary = aggregate(reports)
    assert summary.predicates == 3
    for scores in (summary.unlabeled, summary.exact, summary.semantic):
        assert (scores.precision, scores.recall, scores.f1) == (1.0, 1.0, 1.0)


def test_evaluate_records_pairs_by_id_and_pads_missing():
    gold = [make_record(sent_id="a"), make_record(sent_id="b")]
    pred = [make_record(sent_id="b"), make_record(sent_id="c")]
    reports = evaluate_records(pred, gold, EvalConfig())
    assert [r.predicate_id for r in reports] == ["a#1", "b#1", "c#1"]
    by_id = {r.predicate_id: r for r in reports}
    assert by_id["a#1"].unlabeled == Tally(0, 0, 1)  # gold only: false negative
    assert by_id["c#1"].unlabeled == Tally(0, 1, 0)  # pred only: false positive
    assert by_id["b#1"].unlabeled == Tally(1, 0, 0)


def test_evaluate_records_rejects_duplicate_ids():
    gold = [make_record(sent_id="a"), make_record(sent_id="a")]
    with pytest.raises(EvalError, match="duplicate record ids"):
        evaluate_records([], gold, EvalConfig())


def test_evaluate_records_accepts_generators():
    gold = [make_record(sent_id=f"s{i}") for i in range(4)]
    reports = evaluate_records(iter(gold), iter(gold), EvalConfig())
    assert len(reports) == 4


def test_aggregate_micro_f1():
    r1 = MatchReport("a", (), Tally(2, 1, 0), Tally(0, 0, 0), Tally(0, 0, 0))
    r2 = MatchReport("b", (), Tally(1, 0, 2), Tally(0, 0, 0), Tally(0, 0, 0))
    summary = aggregate([r1, r2])
    assert summary.unlabeled.precision == 0.75
    assert summary.unlabeled.recall == 0.6
    assert math.isclose(summary.unlabeled.f1, 2 / 3, rel_tol=1e-12)
    assert summary.predicates == 2


def test_scores_zero_denominators():
    assert Scores.from_tally(Tally(0, 0, 0)) == Scores(0.0, 0.0, 0.0)
    assert Scores.from_tally(Tally(0, 3, 0)).precision == 0.0


def test_evaluate_symmetry_of_unlabeled_f1():
    a = [make_record(sent_id="x"), make_record(sent_id="y")]
    b = [make_record(sent_id="x")]
    f_ab = aggregate(evaluate_records(a, b, EvalConfig())).unlabeled
    f_ba = aggregate(evaluate_records(b, a, EvalConfig())).unlabeled
    assert f_ab.f1 == f_ba.f1
    assert f_ab.precision == f_ba.recall and f_ab.recall == f_ba.precision


def test_report_round_trip(tmp_path):
    emb = StaticEmbedder({"who left?": (1.0, 0.0), "who departed?": COS_090})
    pred_qas = [_qa("who departed?", (0, 2))]
    gold_qas = [_qa("who left?", (0, 2))]
    report = evaluate_nodes(
        flatten_qas(pred_qas), flatten_qas(gold_qas), EvalConfig(), emb, predicate_id="s1#0"
    )
    path = tmp_path / "reports.jsonl"
    write_reports([report], path)
    [back] = read_reports(path)
    assert back == report
    assert report_from_dict(report_to_dict(report)) == report


def test_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(tau=1.5)
    with pytest.raises(ValueError):
        EvalConfig(theta=-0.1)
    with pytest.raises(ValueError):
        EvalConfig(exact_normalization="loose")
