#!/usr/bin/env python3
"""Regenerate the French golden projection fixture.

Writes fixtures/golden_projection_fr/: a one-sentence CoNLL-U corpus, the
fixture tables every provider call will hit, and expected.jsonl. The expected
record is written out literally here — not produced by running the pipeline —
so the golden test compares the pipeline against an independent statement of
what it must produce.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from xqasrl.fixtures import FixtureTable
from xqasrl.providers import (
    align_request,
    ctranslate_request,
    detect_request,
    nomclass_request,
    parse_request,
    translate_request,
)

OUT_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "golden_projection_fr"

# (surface, lemma, upos) rows of the French sentence.
FR_ROWS = [
    ("Je", "je", "PRON"),
    ("me", "me", "PRON"),
    ("suis", "être", "AUX"),
    ("finalement", "finalement", "ADV"),
    ("abstenue", "abstenir", "VERB"),
    ("en", "en", "ADP"),
    ("ce", "ce", "PRON"),
    ("qui", "qui", "PRON"),
    ("concerne", "concerner", "VERB"),
    ("le", "le", "DET"),
    ("vote", "vote", "NOUN"),
    ("pour", "pour", "ADP"),
    ("un", "un", "DET"),
    ("certain", "certain", "ADJ"),
    ("nombre", "nombre", "NOUN"),
    ("de", "de", "ADP"),
    ("raisons", "raison", "NOUN"),
    (".", ".", "PUNCT"),
]
FR_TOKENS = [r[0] for r in FR_ROWS]
FR_POS = [r[2] for r in FR_ROWS]

EN_TEXT = "Finally, I abstained from voting for a number of reasons."
EN_TOKENS = ["Finally", ",", "I", "abstained", "from", "voting", "for", "a", "number", "of", "reasons", "."]

# english index -> french index; "certain" (13) is deliberately unaligned so
# the why-answer exercises gap filling.
ALIGNMENT = [
    [0, 3],
    [2, 0],
    [3, 4],
    [5, 9],
    [5, 10],
    [6, 11],
    [7, 12],
    [8, 14],
    [9, 15],
    [10, 16],
    [11, 17],
]

QUESTIONS = [
    ("Who abstained from something?", "Qui s'est abstenue de quelque chose ?", [2, 3]),
    ("What did someone abstain from?", "De quoi quelqu'un s'est-il abstenue ?", [5, 6]),
    (
        "Why did someone abstain from something?",
        "Pourquoi quelqu'un s'est-il abstenue de quelque chose ?",
        [6, 11],
    ),
]


def write_conllu(path: Path) -> None:
    lines = ["# sent_id = fr-0001", f"# text = {' '.join(FR_TOKENS)}"]
    for i, (form, lemma, upos) in enumerate(FR_ROWS, start=1):
        lines.append(f"{i}\t{form}\t{lemma}\t{upos}\t_\t_\t0\t_\t_\t_")
    path.write_text("\n".join(lines) + "\n\n", encoding="utf-8")


def build_tables() -> dict[str, FixtureTable]:
    translate = FixtureTable()
    translate.put(
        translate_request("fr", FR_TOKENS),
        {"text": EN_TEXT, "tokens": EN_TOKENS},
    )

    detect = FixtureTable()
    detect.put(
        detect_request(EN_TOKENS),
        {"predicates": [{"index": 3, "kind": "verbal"}, {"index": 5, "kind": "nominal"}]},
    )

    align = FixtureTable()
    align.put(align_request(EN_TOKENS, FR_TOKENS), {"pairs": ALIGNMENT})

    parse = FixtureTable()
    parse.put(
        parse_request(EN_TOKENS, 3, "verbal"),
        {
            "text": EN_TEXT,
            "qas": [{"question": q_en, "answers": [span]} for q_en, _, span in QUESTIONS],
        },
    )

    ctranslate = FixtureTable()
    for q_en, q_fr, _ in QUESTIONS:
        ctranslate.put(ctranslate_request(q_en, "abstenue", "fr", "default"), {"question": q_fr})

    nomclass = FixtureTable()
    nomclass.put(nomclass_request("vote", "fr", "default"), {"label": False})

    return {
        "translate": translate,
        "detect": detect,
        "align": align,
        "parse": parse,
        "ctranslate": ctranslate,
        "nomclass": nomclass,
    }


# The record the pipeline must emit, stated independently of the code. The
# nominal candidate ("voting" -> "vote") is gated out by the classifier; the
# why-answer spans six French tokens from five aligned indices, so it carries
# the gap_fill heuristic.
EXPECTED = {
    "id": "fr-0001#4",
    "language": "fr",
    "tokens": FR_TOKENS,
    "pos": FR_POS,
    "english": {"text": EN_TEXT, "tokens": EN_TOKENS, "predicate_index": 3},
    "predicate": {"index": 4, "kind": "verbal", "lemma": "abstenir"},
    "alignment": sorted(ALIGNMENT),
    "qas": [
        {
            "question": "Qui s'est abstenue de quelque chose ?",
            "question_en": "Who abstained from something?",
            "answers": [{"start": 0, "end": 1, "text": "Je"}],
            "answers_en": [{"start": 2, "end": 3}],
            "source": "projected",
            "flags": [],
            "heuristics": [],
        },
        {
            "question": "De quoi quelqu'un s'est-il abstenue ?",
            "question_en": "What did someone abstain from?",
            "answers": [{"start": 9, "end": 11, "text": "le vote"}],
            "answers_en": [{"start": 5, "end": 6}],
            "source": "projected",
            "flags": [],
            "heuristics": [],
        },
        {
            "question": "Pourquoi quelqu'un s'est-il abstenue de quelque chose ?",
            "question_en": "Why did someone abstain from something?",
            "answers": [{"start": 11, "end": 17, "text": "pour un certain nombre de raisons"}],
            "answers_en": [{"start": 6, "end": 11}],
            "source": "projected",
            "flags": [],
            "heuristics": ["gap_fill"],
        },
    ],
    "provenance": "projected",
}


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    write_conllu(OUT_DIR / "sentences.conllu")
    for name, table in build_tables().items():
        table.save(OUT_DIR / f"{name}.json")
    with open(OUT_DIR / "expected.jsonl", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(EXPECTED, ensure_ascii=False))
        fh.write("\n")
    print(f"wrote {OUT_DIR}")


if __name__ == "__main__":
    main()
