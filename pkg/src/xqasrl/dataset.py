"""Record serialization, corpus statistics, splits, and training/ICL emission.

One JSON object per line is the single interchange format for projected,
gold, and model-predicted data:

    {"id", "language", "tokens": [...], "pos": [...],
     "english": {"text", "tokens": [...], "predicate_index"},
     "predicate": {"index", "kind", "lemma"},
     "alignment": [[e, t], ...],
     "qas": [{"question", "question_en",
              "answers": [{"start", "end", "text"}],
              "answers_en": [{"start", "end"}],
              "source", "flags": [...], "heuristics": [...]}],
     "provenance"}

"english", "alignment", and per-QA "answers_en" are optional (absent for gold
and model records). Record ids follow the local convention
"<sentence_id>#<predicate_index>"; the sentence id is recovered by splitting
on the last "#" when the suffix is numeric.
"""

from __future__ import annotations

import importlib.resources
import json
import random
from dataclasses import dataclass

from .corpus import PREDICATE_KINDS, PredicateInstance, Sentence, Token, TokenSpan
from .projection import PROVENANCES, Answer, ProjectedQA, ProjectedRecord
from .providers import AlignmentMap, Translation

SPLITS = ("train", "dev", "test")

ICL_SLOT = "<sentence with **predicate**>"


class DatasetError(ValueError):
    """Schema violation while reading or validating record files."""


class TemplateMissing(KeyError):
    """No ICL template registered for the requested (language, kind)."""


def split_record_id(record_id: str) -> tuple[str, int | None]:
    """Return (sentence_id, predicate_index) for ids shaped like "sent#3"."""
    head, sep, tail = record_id.rpartition("#")
    if sep and tail.isdigit():
        return head, int(tail)
    return record_id, None


def record_to_dict(record: ProjectedRecord) -> dict:
    d: dict = {
        "id": record.record_id,
        "language": record.sentence.language,
        "tokens": list(record.sentence.surfaces),
        "pos": [t.upos for t in record.sentence.tokens],
    }
    if record.english is not None and record.english_predicate_index is not None:
        d["english"] = {
            "text": record.english.text,
            "tokens": list(record.english.tokens),
            "predicate_index": record.english_predicate_index,
        }
    d["predicate"] = {
        "index": record.predicate.token_index,
        "kind": record.predicate.kind,
        "lemma": record.predicate.lemma,
    }
    if record.alignment is not None:
        d["alignment"] = record.alignment.as_pair_list()
    d["qas"] = [
        {
            "question": qa.question,
            "question_en": qa.question_en,
            "answers": [{"start": a.span.start, "end": a.span.end, "text": a.text} for a in qa.answers],
            **(
                {"answers_en": [{"start": s.start, "end": s.end} for s in qa.answers_en]}
                if qa.answers_en
                else {}
            ),
            "source": qa.source,
            "flags": list(qa.flags),
            "heuristics": list(qa.heuristics),
        }
        for qa in record.qas
    ]
    d["provenance"] = record.provenance
    return d


def _require(d: dict, name: str, line: int):
    if name not in d:
        raise DatasetError(f"missing field {name} at line {line}")
    return d[name]


def _span_from_dict(obj: dict, n_tokens: int, line: int, where: str) -> TokenSpan:
    try:
        start, end = int(obj["start"]), int(obj["end"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"invalid field {where} at line {line}: {exc}") from exc
    if not 0 <= start < end <= n_tokens:
        raise DatasetError(
            f"invalid field {where} at line {line}: span [{start},{end}) out of bounds "
            f"for {n_tokens} tokens"
        )
    return TokenSpan(start, end)


def record_from_dict(d: dict, line: int = 0) -> ProjectedRecord:
    record_id = _require(d, "id", line)
    language = _require(d, "language", line)
    tokens = _require(d, "tokens", line)
    pos = _require(d, "pos", line)
    if not isinstance(tokens, list) or not tokens:
        raise DatasetError(f"invalid field tokens at line {line}: non-empty list required")
    if not isinstance(pos, list) or len(pos) != len(tokens):
        raise DatasetError(f"invalid field pos at line {line}: must parallel tokens")

    sentence_id, _ = split_record_id(str(record_id))
    try:
        sentence = Sentence(
            id=sentence_id,
            language=str(language),
            tokens=tuple(Token(i, str(s), str(p)) for i, (s, p) in enumerate(zip(tokens, pos))),
        )
    except ValueError as exc:
        raise DatasetError(f"invalid field tokens at line {line}: {exc}") from exc

    pred = _require(d, "predicate", line)
    try:
        predicate = PredicateInstance(
            sentence_id=sentence.id,
            token_index=int(pred["index"]),
            kind=pred["kind"],
            lemma=pred.get("lemma"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"invalid field predicate at line {line}: {exc}") from exc
    if predicate.token_index >= len(sentence):
        raise DatasetError(
            f"invalid field predicate.index at line {line}: {predicate.token_index} "
            f"out of bounds for {len(sentence)} tokens"
        )
    if predicate.kind not in PREDICATE_KINDS:
        raise DatasetError(f"invalid field predicate.kind at line {line}: {predicate.kind!r}")

    english = None
    english_predicate_index = None
    if "english" in d and d["english"] is not None:
        eng = d["english"]
        try:
            english = Translation(text=str(eng["text"]), tokens=tuple(str(t) for t in eng["tokens"]))
            english_predicate_index = int(eng["predicate_index"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"invalid field english at line {line}: {exc}") from exc
        if not english.tokens or not 0 <= english_predicate_index < len(english.tokens):
            raise DatasetError(f"invalid field english.predicate_index at line {line}")

    alignment = None
    if "alignment" in d and d["alignment"] is not None:
        if english is None:
            raise DatasetError(f"invalid field alignment at line {line}: requires english block")
        try:
            pairs = frozenset((int(e), int(t)) for e, t in d["alignment"])
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"invalid field alignment at line {line}: {exc}") from exc
        try:
            alignment = AlignmentMap(pairs).check_bounds(len(english.tokens), len(sentence))
        except ValueError as exc:
            raise DatasetError(f"invalid field alignment at line {line}: {exc}") from exc

    raw_qas = _require(d, "qas", line)
    if not isinstance(raw_qas, list):
        raise DatasetError(f"invalid field qas at line {line}: list required")
    qas = []
    for qi, raw in enumerate(raw_qas):
        where = f"qas[{qi}]"
        if not isinstance(raw, dict):
            raise DatasetError(f"invalid field {where} at line {line}: object required")
        if "question" not in raw:
            raise DatasetError(f"missing field {where}.question at line {line}")
        answers_raw = raw.get("answers")
        if not isinstance(answers_raw, list) or not answers_raw:
            raise DatasetError(f"invalid field {where}.answers at line {line}: non-empty list required")
        answers = tuple(
            Answer(
                span=_span_from_dict(a, len(sentence), line, f"{where}.answers[{ai}]"),
                text=str(a.get("text", "")),
            )
            for ai, a in enumerate(answers_raw)
        )
        answers_en = ()
        if raw.get("answers_en"):
            if english is None:
                raise DatasetError(f"invalid field {where}.answers_en at line {line}: requires english block")
            answers_en = tuple(
                _span_from_dict(a, len(english.tokens), line, f"{where}.answers_en[{ai}]")
                for ai, a in enumerate(raw["answers_en"])
            )
        qas.append(
            ProjectedQA(
                question=str(raw["question"]),
                question_en=str(raw.get("question_en", "")),
                answers=answers,
                answers_en=answers_en,
                source=str(raw.get("source", "projected")),
                flags=tuple(str(f) for f in raw.get("flags", [])),
                heuristics=tuple(str(h) for h in raw.get("heuristics", [])),
            )
        )

    provenance = _require(d, "provenance", line)
    if provenance not in PROVENANCES:
        raise DatasetError(f"invalid field provenance at line {line}: {provenance!r}")

    return ProjectedRecord(
        sentence=sentence,
        predicate=predicate,
        qas=tuple(qas),
        english=english,
        english_predicate_index=english_predicate_index,
        alignment=alignment,
        provenance=provenance,
    )


def write_records(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False))
            fh.write("\n")


def read_records(path) -> list[ProjectedRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"invalid JSON at line {line_no}: {exc}") from exc
            out.append(record_from_dict(d, line=line_no))
    return out


@dataclass
class DatasetFile:
    records: list
    split: str | None = None
    language: str | None = None
    path: str | None = None


@dataclass(frozen=True)
class DatasetStats:
    sentences: int
    predicates: int
    qas: int

    def to_dict(self) -> dict:
        return {"sentences": self.sentences, "predicates": self.predicates, "qas": self.qas}


def compute_stats(records) -> DatasetStats:
    records = list(records)
    return DatasetStats(
        sentences=len({r.sentence.id for r in records}),
        predicates=len(records),
        qas=sum(len(r.qas) for r in records),
    )


def split_dataset(records, ratios=(0.8, 0.1, 0.1), seed: int = 0):
    """Seeded sentence-granular split: all records of a sentence share a split.

    Sentence ids are shuffled deterministically and allocated to train/dev/test
    by largest-remainder apportionment of the ratios.
    """
    if len(ratios) != len(SPLITS):
        raise ValueError(f"expected {len(SPLITS)} ratios")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    records = list(records)
    sentence_ids = sorted({r.sentence.id for r in records})
    rng = random.Random(seed)
    rng.shuffle(sentence_ids)

    n = len(sentence_ids)
    exact = [r * n for r in ratios]
    counts = [int(x) for x in exact]
    remainder = n - sum(counts)
    by_frac = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in by_frac[:remainder]:
        counts[i] += 1

    assignment: dict[str, str] = {}
    cursor = 0
    for split, count in zip(SPLITS, counts):
        for sid in sentence_ids[cursor : cursor + count]:
            assignment[sid] = split
        cursor += count

    language = records[0].sentence.language if records else None
    files = {
        split: DatasetFile(records=[], split=split, language=language) for split in SPLITS
    }
    for record in records:
        files[assignment[record.sentence.id]].records.append(record)
    return files["train"], files["dev"], files["test"]


@dataclass(frozen=True)
class TrainingTemplate:
    marker: str = "**"
    qa_separator: str = "\n"
    answer_separator: str = " ; "


def marked_sentence_text(sentence: Sentence, predicate_index: int, marker: str = "**") -> str:
    if not 0 <= predicate_index < len(sentence):
        raise ValueError(f"predicate index {predicate_index} out of bounds")
    parts = list(sentence.surfaces)
    parts[predicate_index] = f"{marker}{parts[predicate_index]}{marker}"
    return " ".join(parts)


def emit_training_examples(records, template: TrainingTemplate = TrainingTemplate()) -> list[dict]:
    """One {input, output} pair per record; records without QAs are excluded."""
    out = []
    for record in records:
        if not record.qas:
            continue
        text = marked_sentence_text(record.sentence, record.predicate.token_index, template.marker)
        lines = [
            f"{qa.question}\t{template.answer_separator.join(a.text for a in qa.answers)}"
            for qa in record.qas
        ]
        out.append({"input": text, "output": template.qa_separator.join(lines)})
    return out


def _load_default_icl_templates() -> dict[str, str]:
    data = importlib.resources.files("xqasrl").joinpath("data/icl_templates.json")
    return json.loads(data.read_text(encoding="utf-8"))


_DEFAULT_ICL: dict[str, str] | None = None


def default_icl_templates() -> dict[str, str]:
    global _DEFAULT_ICL
    if _DEFAULT_ICL is None:
        _DEFAULT_ICL = _load_default_icl_templates()
    return _DEFAULT_ICL


def emit_icl_prompt(
    sentence: Sentence,
    predicate_index: int,
    kind: str,
    language_templates: dict | None = None,
) -> str:
    """Render the few-shot QA-generation prompt for one predicate.

    ``language_templates`` maps (language, kind) to template text containing
    the sentence slot; when omitted, the shipped kind-level defaults are used.
    """
    if language_templates is not None:
        key = (sentence.language, kind)
        if key not in language_templates:
            raise TemplateMissing(f"no template for {key}")
        template = language_templates[key]
    else:
        defaults = default_icl_templates()
        if kind not in defaults:
            raise TemplateMissing(f"no template for kind {kind!r}")
        template = defaults[kind]
    marked = marked_sentence_text(sentence, predicate_index)
    return template.replace(ICL_SLOT, marked)
