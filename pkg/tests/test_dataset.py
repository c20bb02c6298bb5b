import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xqasrl.corpus import PredicateInstance, Sentence, Token, TokenSpan
from xqasrl.dataset import (
    DatasetError,
    TemplateMissing,
    compute_stats,
    default_icl_templates,
    emit_icl_prompt,
    emit_training_examples,
    marked_sentence_text,
    read_records,
    record_from_dict,
    record_to_dict,
    split_dataset,
    split_record_id,
    write_records,
)
from xqasrl.projection import Answer, ProjectedQA, ProjectedRecord
from xqasrl.providers import AlignmentMap, Translation

from conftest import make_record, make_sentence


def test_split_record_id():
    assert split_record_id("europarl-fr-1204#7") == ("europarl-fr-1204", 7)
    assert split_record_id("plain") == ("plain", None)
    assert split_record_id("a#b") == ("a#b", None)
    assert split_record_id("x#3#4") == ("x#3", 4)


def test_round_trip_minimal_record():
    record = make_record()
    assert record_from_dict(record_to_dict(record)) == record


def test_round_trip_full_record():
    sentence = make_sentence(
        [("Je", "PRON"), ("vote", "VERB"), (".", "PUNCT")], sent_id="fr-7", language="fr"
    )
    record = ProjectedRecord(
        sentence=sentence,
        predicate=PredicateInstance(sentence_id="fr-7", token_index=1, kind="verbal", lemma="voter"),
        qas=(
            ProjectedQA(
                question="Qui vote ?",
                question_en="Who votes?",
                answers=(Answer.from_span(TokenSpan(0, 1), sentence),),
                answers_en=(TokenSpan(0, 1),),
                flags=("minor",),
                heuristics=("gap_fill", "trim"),
            ),
        ),
        english=Translation(text="I vote .", tokens=("I", "vote", ".")),
        english_predicate_index=1,
        alignment=AlignmentMap(frozenset({(0, 0), (1, 1), (2, 2)})),
    )
    d = record_to_dict(record)
    assert d["id"] == "fr-7#1"
    assert d["alignment"] == [[0, 0], [1, 1], [2, 2]]
    assert d["qas"][0]["answers_en"] == [{"start": 0, "end": 1}]
    back = record_from_dict(d)
    assert back == record


def test_from_dict_rebuilds_lemma_only_on_predicate():
    record = make_record()
    d = record_to_dict(record)
    d["predicate"]["lemma"] = "voter"
    assert record_from_dict(d).predicate.lemma == "voter"


def test_missing_field_error_names_line():
    d = record_to_dict(make_record())
    del d["qas"]
    with pytest.raises(DatasetError, match="missing field qas at line 12"):
        record_from_dict(d, line=12)


def test_span_bounds_error_names_location():
    d = record_to_dict(make_record())
    d["qas"][0]["answers"][0]["end"] = 99
    with pytest.raises(DatasetError, match=r"qas\[0\].answers\[0\] at line 3"):
        record_from_dict(d, line=3)


def test_alignment_requires_english():
    d = record_to_dict(make_record())
    d["alignment"] = [[0, 0]]
    with pytest.raises(DatasetError, match="requires english block"):
        record_from_dict(d)


def test_bad_provenance_rejected():
    d = record_to_dict(make_record())
    d["provenance"] = "scraped"
    with pytest.raises(DatasetError, match="provenance"):
        record_from_dict(d)


def test_empty_answers_rejected():
    d = record_to_dict(make_record())
    d["qas"][0]["answers"] = []
    with pytest.raises(DatasetError, match="non-empty list"):
        record_from_dict(d)


def test_read_records_error_carries_line_number(tmp_path):
    good = json.dumps(record_to_dict(make_record()), ensure_ascii=False)
    bad = good.replace('"qas"', '"qqq"')
    path = tmp_path / "data.jsonl"
    path.write_text(good + "\n" + bad + "\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="line 2"):
        read_records(path)


def test_write_read_preserves_unicode(tmp_path):
    record = make_record(
        words=[("מי", "PRON"), ("אישר", "VERB")], language="he", predicate_index=1,
        qas=(ProjectedQA(question="מי אישר ?", question_en="Who approved?",
                         answers=(Answer(TokenSpan(0, 1), "מי"),)),),
    )
    path = tmp_path / "he.jsonl"
    write_records([record], path)
    raw = path.read_text(encoding="utf-8")
    assert "אישר" in raw  # not \u-escaped
    assert read_records(path) == [record]


_word_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=6
)


@st.composite
def records(draw, sent_id=None):
    n = draw(st.integers(1, 8))
    words = [(draw(_word_text), draw(st.sampled_from(["VERB", "NOUN", "X"]))) for _ in range(n)]
    sentence = make_sentence(
        words,
        sent_id=sent_id or draw(st.text("abcdefgh0123456789-", min_size=1, max_size=8)),
        language=draw(st.sampled_from(["he", "fr", "ru"])),
    )
    qas = []
    for _ in range(draw(st.integers(0, 3))):
        start = draw(st.integers(0, n - 1))
        end = draw(st.integers(start + 1, n))
        qas.append(
            ProjectedQA(
                question=draw(_word_text),
                question_en=draw(_word_text),
                answers=(Answer.from_span(TokenSpan(start, end), sentence),),
                source=draw(st.sampled_from(["projected", "manual", "model"])),
                flags=tuple(draw(st.lists(st.sampled_from(["minor", "substantial"]), max_size=1))),
                heuristics=tuple(
                    draw(st.lists(st.sampled_from(["gap_fill", "trim", "split"]), max_size=2, unique=True))
                ),
            )
        )
    return ProjectedRecord(
        sentence=sentence,
        predicate=PredicateInstance(
            sentence_id=sentence.id,
            token_index=draw(st.integers(0, n - 1)),
            kind=draw(st.sampled_from(["verbal", "nominal"])),
            lemma=draw(st.one_of(st.none(), _word_text)),
        ),
        qas=tuple(qas),
    )


@given(records())
@settings(max_examples=200)
def test_record_round_trip_property(record):
    d = json.loads(json.dumps(record_to_dict(record), ensure_ascii=False))
    back = record_from_dict(d)
    # the serialization keeps the predicate lemma but not per-token lemmas
    assert back.sentence.surfaces == record.sentence.surfaces
    assert back.predicate == record.predicate
    assert back.qas == record.qas
    assert back.provenance == record.provenance


def test_bulk_file_round_trip(tmp_path):
    rng = random.Random(7)
    rows = []
    for i in range(300):
        n = rng.randint(1, 6)
        words = [(f"w{rng.randint(0, 99)}", rng.choice(["VERB", "NOUN", "X"])) for _ in range(n)]
        rows.append(
            make_record(
                sent_id=f"s{i // 3}", words=words, predicate_index=rng.randrange(n),
                qas=(ProjectedQA(
                    question=f"q{i}?", question_en=f"e{i}?",
                    answers=(Answer.from_span(TokenSpan(0, n), make_sentence(words)),),
                ),),
            )
        )
    path = tmp_path / "bulk.jsonl"
    write_records(rows, path)
    assert read_records(path) == rows


# -- stats ---------------------------------------------------------------------


def test_stats_hand_counts():
    sentence = make_sentence([("a", "VERB"), ("b", "NOUN")], sent_id="s1")
    qa = ProjectedQA(question="q?", question_en="e?", answers=(Answer(TokenSpan(0, 1), "a"),))
    r1 = ProjectedRecord(
        sentence=sentence,
        predicate=PredicateInstance(sentence_id="s1", token_index=0, kind="verbal"),
        qas=(qa, qa),
    )
    r2 = ProjectedRecord(
        sentence=sentence,
        predicate=PredicateInstance(sentence_id="s1", token_index=1, kind="nominal"),
        qas=(qa,),
    )
    r3 = make_record(sent_id="s2")
    stats = compute_stats([r1, r2, r3])
    assert stats.sentences == 2
    assert stats.predicates == 3
    assert stats.qas == 4
    assert stats.to_dict() == {"sentences": 2, "predicates": 3, "qas": 4}


@given(st.lists(records(), max_size=8))
def test_stats_permutation_invariant(rows):
    shuffled = list(rows)
    random.Random(0).shuffle(shuffled)
    assert compute_stats(shuffled) == compute_stats(rows)


def test_stats_accepts_generator():
    rows = [make_record(sent_id=f"s{i}") for i in range(4)]
    assert compute_stats(iter(rows)).predicates == 4


# -- splitting -------------------------------------------------------------------


def _corpus(n_sentences, per_sentence=2):
    rows = []
    for i in range(n_sentences):
        for p in range(per_sentence):
            rows.append(
                make_record(
                    sent_id=f"sent-{i:03d}",
                    words=[("a", "VERB"), ("b", "NOUN"), ("c", "X")],
                    predicate_index=p,
                )
            )
    return rows


def test_split_ratios_8_1_1():
    rows = _corpus(10)
    train, dev, test = split_dataset(rows, seed=0)
    sent_ids = lambda f: {r.sentence.id for r in f.records}
    assert len(sent_ids(train)) == 8
    assert len(sent_ids(dev)) == 1
    assert len(sent_ids(test)) == 1
    assert len(train.records) + len(dev.records) + len(test.records) == len(rows)
    assert (train.split, dev.split, test.split) == ("train", "dev", "test")


def test_split_is_deterministic_and_seed_sensitive():
    rows = _corpus(30)
    a = split_dataset(rows, seed=3)
    b = split_dataset(rows, seed=3)
    c = split_dataset(rows, seed=4)
    assert [r.record_id for r in a[0].records] == [r.record_id for r in b[0].records]
    assert [r.record_id for r in a[0].records] != [r.record_id for r in c[0].records]


def test_split_keeps_sentences_whole():
    rows = _corpus(12, per_sentence=3)
    train, dev, test = split_dataset(rows, seed=1)
    seen = {}
    for name, f in (("train", train), ("dev", dev), ("test", test)):
        for record in f.records:
            assert seen.setdefault(record.sentence.id, name) == name


def test_split_rejects_bad_ratios():
    rows = _corpus(5)
    with pytest.raises(ValueError, match="sum to 1"):
        split_dataset(rows, ratios=(0.5, 0.2, 0.2))
    with pytest.raises(ValueError, match="3 ratios"):
        split_dataset(rows, ratios=(0.5, 0.5))


def test_split_preserves_input_order_within_split():
    rows = _corpus(10)
    train, _, _ = split_dataset(rows, seed=0)
    ids = [r.record_id for r in train.records]
    original_order = [r.record_id for r in rows if r.record_id in set(ids)]
    assert ids == original_order


# -- training emission ------------------------------------------------------------


def test_emit_training_example_shape(golden_dir):
    [record] = read_records(golden_dir / "expected.jsonl")
    [example] = emit_training_examples([record])
    assert "**abstenue**" in example["input"]
    assert example["input"].count("**") == 2
    lines = example["output"].split("\n")
    assert lines[0] == "Qui s'est abstenue de quelque chose ?\tJe"
    assert len(lines) == 3


def test_emit_training_joins_multiple_answers():
    sentence = make_sentence([("a", "X"), ("b", "VERB"), ("c", "X")])
    qa = ProjectedQA(
        question="q?",
        question_en="e?",
        answers=(Answer(TokenSpan(0, 1), "a"), Answer(TokenSpan(2, 3), "c")),
    )
    record = ProjectedRecord(
        sentence=sentence,
        predicate=PredicateInstance(sentence_id="s1", token_index=1, kind="verbal"),
        qas=(qa,),
    )
    [example] = emit_training_examples([record])
    assert example["input"] == "a **b** c"
    assert example["output"] == "q?\ta ; c"


def test_emit_training_skips_empty_records():
    record = make_record()
    empty = ProjectedRecord(
        sentence=record.sentence, predicate=record.predicate, qas=()
    )
    assert emit_training_examples([empty]) == []


def test_marked_sentence_index_zero():
    sentence = make_sentence([("vote", "VERB"), ("now", "ADV")])
    assert marked_sentence_text(sentence, 0) == "**vote** now"
    with pytest.raises(ValueError):
        marked_sentence_text(sentence, 2)


# -- prompt emission ---------------------------------------------------------------


def test_default_templates_cover_both_kinds():
    templates = default_icl_templates()
    assert "Who performed?" in templates["verbal"]
    assert "What is understood?" in templates["nominal"]


def test_emit_icl_prompt_substitutes_slot():
    sentence = make_sentence([("Je", "PRON"), ("vote", "VERB")], language="fr")
    prompt = emit_icl_prompt(sentence, 1, "verbal")
    assert "Je **vote**" in prompt
    assert "<sentence with" not in prompt
    # exemplars from the shipped template frame the sentence
    assert "Who performed?" in prompt


def test_emit_icl_prompt_unknown_kind():
    sentence = make_sentence([("a", "X")])
    with pytest.raises(TemplateMissing):
        emit_icl_prompt(sentence, 0, "verbal", language_templates={("fr", "verbal"): "x"})
    with pytest.raises(TemplateMissing):
        emit_icl_prompt(sentence, 0, "adjectival")


def test_emit_icl_prompt_user_templates_win():
    sentence = make_sentence([("Je", "PRON"), ("vote", "VERB")], language="fr")
    templates = {("fr", "verbal"): "Q: <sentence with **predicate**> A:"}
    assert emit_icl_prompt(sentence, 1, "verbal", templates) == "Q: Je **vote** A:"
