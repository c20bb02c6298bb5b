from fractions import Fraction

import pytest

from xqasrl.corpus import PredicateInstance, Sentence, Token, TokenSpan
from xqasrl.projection import Answer, ProjectedQA, ProjectedRecord

# Lines queued by the acceptance tests; echoed by pytest_terminal_summary so
# they stay visible even when output capture is on.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def make_sentence(words, sent_id="s1", language="he"):
    """Build a Sentence from (surface, upos) or (surface, upos, lemma) tuples."""
    tokens = []
    for i, item in enumerate(words):
        surface, upos = item[0], item[1]
        lemma = item[2] if len(item) > 2 else None
        tokens.append(Token(index=i, surface=surface, upos=upos, lemma=lemma))
    return Sentence(id=sent_id, language=language, tokens=tuple(tokens))


def make_record(sent_id="s1", language="fr", predicate_index=1, qas=None, words=None):
    words = words or [("Je", "PRON"), ("vote", "VERB"), ("demain", "ADV")]
    sentence = make_sentence(words, sent_id=sent_id, language=language)
    if qas is None:
        qas = (
            ProjectedQA(
                question="Qui vote ?",
                question_en="Who votes?",
                answers=(Answer.from_span(TokenSpan(0, 1), sentence),),
            ),
        )
    return ProjectedRecord(
        sentence=sentence,
        predicate=PredicateInstance(
            sentence_id=sent_id, token_index=predicate_index, kind="verbal", lemma=None
        ),
        qas=tuple(qas),
    )


def brute_force_matching(pred_spans, gold_spans, tau):
    """Reference maximizer for argument matching, by full enumeration.

    Returns the maximum-total-IOU one-to-one matching as (gold, pred) index
    pairs sorted by gold index; ties broken by smallest pair sequence under
    tuple ordering. Exponential — only for small oracle instances.
    """

    def iou(a, b):
        inter = min(a.end, b.end) - max(a.start, b.start)
        if inter <= 0:
            return Fraction(0)
        return Fraction(inter, len(a) + len(b) - inter)

    tau = Fraction(str(tau)) if not isinstance(tau, Fraction) else tau
    edges = {}
    for g, gs in enumerate(gold_spans):
        for p, ps in enumerate(pred_spans):
            w = iou(gs, ps)
            if w >= tau:
                edges[(g, p)] = w

    best = (Fraction(-1), ())

    def rec(g, used, acc, weight):
        nonlocal best
        if g == len(gold_spans):
            key = (weight, tuple(acc))
            if key[0] > best[0] or (key[0] == best[0] and key[1] < best[1]):
                best = key
            return
        rec(g + 1, used, acc, weight)
        for p in range(len(pred_spans)):
            if (g, p) in edges and p not in used:
                rec(g + 1, used | {p}, acc + [(g, p)], weight + edges[(g, p)])

    rec(0, set(), [], Fraction(0))
    return list(best[1])


@pytest.fixture
def golden_dir():
    from pathlib import Path

    path = Path(__file__).resolve().parent.parent / "fixtures" / "golden_projection_fr"
    if not path.exists():
        pytest.skip("golden fixture not built")
    return path
