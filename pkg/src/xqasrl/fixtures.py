"""Deterministic table-backed providers for offline runs and tests.

A fixture table maps the canonical hash of a request body to a stored
response. Misses are hard errors naming the operation and the sentence or
question involved — except nominalization classification, which degrades to
``False`` with a warning so that gating stays conservative rather than
crashing a long projection run.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from pathlib import Path

from .corpus import Sentence
from .providers import (
    AlignmentMap,
    DetectedPredicate,
    EnglishParse,
    FixtureMiss,
    Translation,
    align_request,
    canonical_json,
    ctranslate_request,
    detect_request,
    embed_request,
    nomclass_request,
    parse_payload_to_english_parse,
    parse_request,
    request_key,
    translate_request,
    check_unit_norm,
)

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATE_NAME = "default"


class FixtureTable:
    """Request-hash -> response lookup, serializable to a single JSON file."""

    def __init__(self, entries: dict[str, dict] | None = None):
        # key -> {"request": <body>, "response": <payload>}
        self.entries: dict[str, dict] = dict(entries or {})

    @classmethod
    def load(cls, path) -> "FixtureTable":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError(f"fixture file {path} must contain a JSON object")
        return cls(raw)

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.entries, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
            encoding="utf-8",
        )

    def put(self, request: dict, response) -> str:
        key = request_key(request)
        self.entries[key] = {"request": request, "response": response}
        return key

    def lookup(self, request: dict, context: str):
        key = request_key(request)
        entry = self.entries.get(key)
        if entry is None:
            raise FixtureMiss(f"fixture miss: {context} (request {canonical_json(request)})")
        return entry["response"]

    def __len__(self):
        return len(self.entries)


class FixtureTranslator:
    def __init__(self, table: FixtureTable):
        self.table = table

    def translate_sentence(self, sentence: Sentence) -> Translation:
        body = translate_request(sentence.language, sentence.surfaces)
        payload = self.table.lookup(body, f"translate for sentence {sentence.id}")
        return Translation(text=payload["text"], tokens=tuple(payload["tokens"]))


class FixtureQasrlParser:
    def __init__(self, table: FixtureTable):
        self.table = table

    def parse_qasrl_english(self, english_tokens, predicate_index: int, kind: str) -> EnglishParse:
        body = parse_request(english_tokens, predicate_index, kind)
        payload = self.table.lookup(body, f"parse for predicate index {predicate_index}")
        return parse_payload_to_english_parse(payload, english_tokens, predicate_index, kind)


class FixturePredicateDetector:
    def __init__(self, table: FixtureTable):
        self.table = table

    def detect_predicates_english(self, english_tokens) -> list[DetectedPredicate]:
        body = detect_request(english_tokens)
        payload = self.table.lookup(body, "detect for english sentence")
        out = [DetectedPredicate(index=int(p["index"]), kind=p["kind"]) for p in payload["predicates"]]
        out.sort(key=lambda p: p.index)
        return out


class FixtureWordAligner:
    def __init__(self, table: FixtureTable):
        self.table = table

    def align_words(self, english_tokens, target_tokens) -> AlignmentMap:
        body = align_request(english_tokens, target_tokens)
        payload = self.table.lookup(body, "align for sentence pair")
        pairs = frozenset((int(e), int(t)) for e, t in payload["pairs"])
        return AlignmentMap(pairs).check_bounds(len(english_tokens), len(target_tokens))


class FixtureConstrainedTranslator:
    def __init__(self, table: FixtureTable, template_name: str = DEFAULT_TEMPLATE_NAME):
        self.table = table
        self.template_name = template_name

    def constrained_translate_question(
        self, question_en: str, target_predicate_form: str, language: str
    ) -> str:
        body = ctranslate_request(question_en, target_predicate_form, language, self.template_name)
        payload = self.table.lookup(body, f"ctranslate for question {question_en!r}")
        return payload["question"]


class FixtureQuestionEmbedder:
    def __init__(self, table: FixtureTable):
        self.table = table

    def embed_question(self, question: str) -> tuple[float, ...]:
        body = embed_request(question)
        payload = self.table.lookup(body, f"embed for question {question!r}")
        return check_unit_norm(tuple(float(v) for v in payload["vector"]))


class FixtureNominalizationClassifier:
    """Table-backed classifier; misses gate conservatively instead of raising."""

    def __init__(self, table: FixtureTable, template_name: str = DEFAULT_TEMPLATE_NAME):
        self.table = table
        self.template_name = template_name

    def classify_nominalization(self, noun: str, language: str) -> bool:
        body = nomclass_request(noun, language, self.template_name)
        entry = self.table.entries.get(request_key(body))
        if entry is None:
            logger.warning(
                "nominalization fixture miss for %r (%s); treating as non-nominalization",
                noun,
                language,
            )
            return False
        return bool(entry["response"]["label"])


class HashEmbedder:
    """Deterministic pseudo-embedder: stable unit vectors derived from SHA-256.

    Not a semantic model — identical strings map to identical vectors and
    distinct strings to (almost surely) different ones, which is exactly what
    offline smoke runs and identity checks need.
    """

    def __init__(self, dim: int = 32):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim

    def embed_question(self, question: str) -> tuple[float, ...]:
        if not question:
            raise ValueError("cannot embed empty text")
        data = question.encode("utf-8")
        values: list[float] = []
        counter = 0
        while len(values) < self.dim:
            digest = hashlib.sha256(data + b"\x00" + counter.to_bytes(4, "big")).digest()
            for i in range(0, len(digest), 4):
                raw = int.from_bytes(digest[i : i + 4], "big")
                values.append((raw / 2**32) * 2.0 - 1.0)
            counter += 1
        values = values[: self.dim]
        norm = math.sqrt(sum(v * v for v in values))
        if norm == 0.0:
            values[0] = 1.0
            norm = 1.0
        return tuple(v / norm for v in values)
