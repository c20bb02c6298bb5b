import pytest
from hypothesis import given
from hypothesis import strategies as st

from xqasrl.corpus import (
    ConlluParseError,
    PredicatePolicy,
    Sentence,
    Token,
    TokenSpan,
    candidate_predicates,
    corpus_to_conllu,
    parse_conllu,
    sentence_to_conllu,
)

from conftest import make_sentence

SAMPLE = """\
# sent_id = w1
# text = Finally , I abstained from voting .
1\tFinally\tfinally\tADV\t_\t_\t0\t_\t_\t_
2\t,\t,\tPUNCT\t_\t_\t0\t_\t_\t_
3\tI\tI\tPRON\t_\t_\t0\t_\t_\t_
4\tabstained\tabstain\tVERB\t_\t_\t0\t_\t_\t_
5\tfrom\tfrom\tADP\t_\t_\t0\t_\t_\t_
6\tvoting\tvote\tNOUN\t_\t_\t0\t_\t_\t_
7\t.\t.\tPUNCT\t_\t_\t0\t_\t_\t_
"""


def test_parse_single_sentence():
    sentences = parse_conllu(SAMPLE, "en")
    assert len(sentences) == 1
    sent = sentences[0]
    assert sent.id == "w1"
    assert sent.language == "en"
    assert len(sent) == 7
    # 1-based CoNLL-U row 4 lands at 0-based index 3 with lemma preserved
    tok = sent.tokens[3]
    assert tok == Token(index=3, surface="abstained", upos="VERB", lemma="abstain")
    assert sent.tokens[0].surface == "Finally"
    assert sent.tokens[6].upos == "PUNCT"


def test_parse_underscore_lemma_becomes_none():
    doc = "1\tfoo\t_\tNOUN\t_\t_\t0\t_\t_\t_\n"
    [sent] = parse_conllu(doc, "en")
    assert sent.tokens[0].lemma is None


def test_parse_skips_multiword_token_ranges():
    doc = """\
# sent_id = mwt
1-2\tdu\t_\t_\t_\t_\t_\t_\t_\t_
1\tde\tde\tADP\t_\t_\t0\t_\t_\t_
2\tle\tle\tDET\t_\t_\t0\t_\t_\t_
3\tvote\tvote\tNOUN\t_\t_\t0\t_\t_\t_
"""
    [sent] = parse_conllu(doc, "fr")
    assert sent.surfaces == ("de", "le", "vote")


def test_parse_skips_empty_nodes():
    doc = """\
1\ta\ta\tDET\t_\t_\t0\t_\t_\t_
1.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_
2\tb\tb\tNOUN\t_\t_\t0\t_\t_\t_
"""
    [sent] = parse_conllu(doc, "en")
    assert sent.surfaces == ("a", "b")


def test_parse_synthesizes_missing_sent_id():
    doc = "1\thello\t_\tINTJ\t_\t_\t0\t_\t_\t_\n"
    [sent] = parse_conllu(doc, "en")
    assert sent.id == "s1"


def test_parse_multiple_sentences():
    doc = SAMPLE + "\n# sent_id = w2\n1\tYes\tyes\tINTJ\t_\t_\t0\t_\t_\t_\n"
    sentences = parse_conllu(doc, "en")
    assert [s.id for s in sentences] == ["w1", "w2"]


def test_parse_rejects_wrong_column_count():
    doc = "1\tonly\tthree\n"
    with pytest.raises(ConlluParseError, match="line 1"):
        parse_conllu(doc, "en")


def test_parse_rejects_id_gap():
    doc = (
        "1\ta\t_\tX\t_\t_\t0\t_\t_\t_\n"
        "3\tb\t_\tX\t_\t_\t0\t_\t_\t_\n"
    )
    with pytest.raises(ConlluParseError, match="contiguity"):
        parse_conllu(doc, "en")


def test_parse_rejects_bad_token_id():
    doc = "x\ta\t_\tX\t_\t_\t0\t_\t_\t_\n"
    with pytest.raises(ConlluParseError, match="bad token id"):
        parse_conllu(doc, "en")


def test_parse_rejects_empty_form():
    doc = "1\t\t_\tX\t_\t_\t0\t_\t_\t_\n"
    with pytest.raises(ConlluParseError, match="empty FORM"):
        parse_conllu(doc, "en")


_surface = st.text(
    alphabet=st.characters(blacklist_characters="\t\r\n", blacklist_categories=("Cs",)),
    min_size=1,
    max_size=8,
)
_word = st.tuples(
    _surface,
    st.sampled_from(["VERB", "NOUN", "AUX", "ADV", "PRON", "PUNCT"]),
    st.one_of(st.none(), _surface.filter(lambda s: s != "_")),
)
_sent_id = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789-_", min_size=1, max_size=12)


@st.composite
def sentences(draw):
    words = draw(st.lists(_word, min_size=1, max_size=10))
    return make_sentence(words, sent_id=draw(_sent_id), language="he")


@given(st.lists(sentences(), min_size=1, max_size=4))
def test_conllu_round_trip(sents):
    document = corpus_to_conllu(sents)
    parsed = parse_conllu(document, "he")
    assert parsed == sents


def test_sentence_to_conllu_shape():
    sent = make_sentence([("vote", "VERB", "voter")], sent_id="x")
    block = sentence_to_conllu(sent)
    assert block.splitlines()[0] == "# sent_id = x"
    assert block.splitlines()[1].split("\t") == [
        "1", "vote", "voter", "VERB", "_", "_", "_", "_", "_", "_",
    ]


def test_candidate_predicates_kinds():
    sent = make_sentence(
        [("He", "PRON"), ("was", "AUX"), ("shot", "VERB"), ("in", "ADP"), ("attack", "NOUN")]
    )
    cands = candidate_predicates(sent)
    assert [(c.token_index, c.kind) for c in cands] == [(2, "verbal"), (4, "nominal")]


def test_candidate_predicates_include_aux():
    sent = make_sentence([("was", "AUX"), ("shot", "VERB")])
    assert len(candidate_predicates(sent)) == 1
    both = candidate_predicates(sent, PredicatePolicy(include_aux=True))
    assert [(c.token_index, c.kind) for c in both] == [(0, "verbal"), (1, "verbal")]


@given(sentences())
def test_candidate_predicates_ordered_subset(sent):
    cands = candidate_predicates(sent)
    indices = [c.token_index for c in cands]
    assert indices == sorted(indices)
    for cand in cands:
        tok = sent.tokens[cand.token_index]
        assert tok.upos in ("VERB", "NOUN")
        assert cand.kind == ("verbal" if tok.upos == "VERB" else "nominal")
        assert cand.lemma == tok.lemma


def test_token_span_validation():
    with pytest.raises(ValueError):
        TokenSpan(2, 2)
    with pytest.raises(ValueError):
        TokenSpan(-1, 3)
    with pytest.raises(ValueError):
        TokenSpan(3, 1)


def test_token_span_helpers():
    span = TokenSpan(1, 3)
    assert len(span) == 2
    assert list(span.indices()) == [1, 2]
    sent = make_sentence([("a", "X"), ("b", "X"), ("c", "X")])
    assert span.text_in(sent) == "b c"
    assert span.check_bounds(3) is span
    with pytest.raises(ValueError, match="exceeds sentence length"):
        span.check_bounds(2)


def test_sentence_rejects_misindexed_tokens():
    with pytest.raises(ValueError, match="token index"):
        Sentence(id="bad", language="en", tokens=(Token(index=1, surface="a", upos="X"),))
