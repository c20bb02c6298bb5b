"""Contracts and HTTP clients for the external model services the pipeline consumes.

Every service speaks a minimal JSON-over-HTTP protocol: one POST route per
operation, request/response bodies mirroring the operation signatures, bearer
auth from a configured environment variable. Deterministic table-backed
implementations of the same contracts live in :mod:`xqasrl.fixtures`.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field

import requests

from .corpus import PREDICATE_KINDS, Sentence, TokenSpan

logger = logging.getLogger(__name__)

ROUTE_TRANSLATE = "/translate"
ROUTE_PARSE = "/parse"
ROUTE_DETECT = "/detect"
ROUTE_ALIGN = "/align"
ROUTE_CTRANSLATE = "/ctranslate"
ROUTE_EMBED = "/embed"
ROUTE_NOMCLASS = "/nomclass"

EMBED_NORM_TOLERANCE = 1e-6


class ProviderError(Exception):
    """Base class for provider failures."""


class ProviderTransportError(ProviderError):
    """Network-level failure that persisted through the retry budget."""


class ProviderContentError(ProviderError):
    """The service answered, but with an unusable payload."""


class FixtureMiss(ProviderError):
    """A fixture table has no entry for the request."""


@dataclass(frozen=True)
class ProviderEndpoint:
    base_url: str
    auth_token_env: str = ""
    timeout: float = 30.0
    max_retries: int = 2
    backoff_base: float = 0.5

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    text: str


# Few-shot scaffolds for the in-context services. The constrained-translation
# prompt pins the target predicate with a pipe separator; the nominalization
# prompt contrasts action nouns with common nouns.
DEFAULT_CONSTRAINED_TEMPLATE = PromptTemplate(
    name="default",
    text=(
        "Translate the English question into the target language. The translated "
        "question must contain the given predicate form verbatim.\n"
        "Format: <english question> | <predicate>\n"
        "Answer with the translated question only.\n"
    ),
)

DEFAULT_NOMCLASS_TEMPLATE = PromptTemplate(
    name="default",
    text=(
        "Classify each noun as an action noun (derived from a verb, denoting an "
        "event) or a common noun (a static entity).\n"
        "assiette: nom commun\n"
        "invitation: nom d'action\n"
        "comité: nom commun\n"
        "permission: nom d'action\n"
        "libération: nom d'action\n"
    ),
)


@dataclass(frozen=True)
class Translation:
    text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class DetectedPredicate:
    index: int
    kind: str


@dataclass(frozen=True)
class EnglishQA:
    question: str
    answers: tuple[TokenSpan, ...]


@dataclass(frozen=True)
class EnglishParse:
    text: str
    tokens: tuple[str, ...]
    predicate_index: int
    predicate_kind: str
    qas: tuple[EnglishQA, ...]

    def __post_init__(self):
        if not 0 <= self.predicate_index < len(self.tokens):
            raise ValueError(f"predicate index {self.predicate_index} out of bounds")
        if self.predicate_kind not in PREDICATE_KINDS:
            raise ValueError(f"unknown predicate kind {self.predicate_kind!r}")
        for qa in self.qas:
            for span in qa.answers:
                span.check_bounds(len(self.tokens))


@dataclass(frozen=True)
class AlignmentMap:
    """Word-alignment pairs (english_index, target_index)."""

    pairs: frozenset[tuple[int, int]]

    def check_bounds(self, english_length: int, target_length: int) -> "AlignmentMap":
        for e, t in self.pairs:
            if not (0 <= e < english_length and 0 <= t < target_length):
                raise ValueError(f"alignment pair ({e}, {t}) out of bounds")
        return self

    def targets_of(self, english_index: int) -> list[int]:
        return sorted(t for e, t in self.pairs if e == english_index)

    def targets_of_span(self, span: TokenSpan) -> list[int]:
        hits = {t for e, t in self.pairs if span.start <= e < span.end}
        return sorted(hits)

    def as_pair_list(self) -> list[list[int]]:
        return [list(p) for p in sorted(self.pairs)]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def request_key(body: dict) -> str:
    """Canonical hash of a request body; fixture tables are keyed by it."""
    return hashlib.sha256(canonical_json(body).encode("utf-8")).hexdigest()


def translate_request(language: str, tokens) -> dict:
    return {"language": language, "tokens": list(tokens)}


def parse_request(tokens, predicate_index: int, kind: str) -> dict:
    return {"tokens": list(tokens), "predicate_index": predicate_index, "kind": kind}


def detect_request(tokens) -> dict:
    return {"tokens": list(tokens)}


def align_request(source_tokens, target_tokens) -> dict:
    return {"source_tokens": list(source_tokens), "target_tokens": list(target_tokens)}


def ctranslate_request(question: str, predicate: str, language: str, template: str) -> dict:
    return {
        "question": question,
        "predicate": predicate,
        "language": language,
        "template": template,
    }


def embed_request(question: str) -> dict:
    return {"question": question}


def nomclass_request(noun: str, language: str, template: str) -> dict:
    return {"noun": noun, "language": language, "template": template}


def parse_payload_to_english_parse(payload: dict, tokens, predicate_index, kind) -> EnglishParse:
    qas = tuple(
        EnglishQA(
            question=qa["question"],
            answers=tuple(TokenSpan(int(a[0]), int(a[1])) for a in qa["answers"]),
        )
        for qa in payload.get("qas", [])
    )
    return EnglishParse(
        text=payload.get("text", " ".join(tokens)),
        tokens=tuple(tokens),
        predicate_index=predicate_index,
        predicate_kind=kind,
        qas=qas,
    )


def check_unit_norm(vector: tuple[float, ...]) -> tuple[float, ...]:
    norm = math.sqrt(sum(v * v for v in vector))
    if abs(norm - 1.0) > EMBED_NORM_TOLERANCE:
        raise ProviderContentError(f"embedding norm {norm} deviates from 1")
    return vector


class HttpTransport:
    """POST JSON with bounded retries and exponential backoff.

    Transport failures (connection errors, timeouts, 5xx, 429) are retried up
    to ``max_retries`` extra attempts; anything else the service answers is
    final. The two failure families surface as distinct exception types.
    """

    def __init__(self, endpoint: ProviderEndpoint, session=None, sleep=time.sleep):
        self.endpoint = endpoint
        self._session = session if session is not None else requests.Session()
        self._sleep = sleep

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.endpoint.auth_token_env:
            token = os.environ.get(self.endpoint.auth_token_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def post(self, route: str, body: dict) -> dict:
        url = self.endpoint.base_url.rstrip("/") + route
        last_error: Exception | None = None
        for attempt in range(self.endpoint.max_retries + 1):
            if attempt:
                self._sleep(self.endpoint.backoff_base * (2 ** (attempt - 1)))
            try:
                response = self._session.post(
                    url, json=body, headers=self._headers(), timeout=self.endpoint.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                logger.warning("POST %s transport failure (attempt %d): %s", route, attempt + 1, exc)
                continue
            status = response.status_code
            if status >= 500 or status == 429:
                last_error = ProviderTransportError(f"POST {route} returned {status}")
                logger.warning("POST %s returned %d (attempt %d)", route, status, attempt + 1)
                continue
            if status >= 400:
                raise ProviderContentError(f"POST {route} returned {status}: {response.text[:200]}")
            try:
                return response.json()
            except ValueError as exc:
                raise ProviderContentError(f"POST {route} returned non-JSON body") from exc
        raise ProviderTransportError(
            f"POST {route} failed after {self.endpoint.max_retries + 1} attempts: {last_error}"
        )


class HttpTranslator:
    def __init__(self, endpoint: ProviderEndpoint, source_language: str, session=None, sleep=time.sleep):
        self.source_language = source_language
        self._transport = HttpTransport(endpoint, session=session, sleep=sleep)

    def translate_sentence(self, sentence: Sentence) -> Translation:
        if sentence.language != self.source_language:
            raise ProviderContentError(
                f"translator configured for {self.source_language!r}, "
                f"sentence {sentence.id} is {sentence.language!r}"
            )
        payload = self._transport.post(
            ROUTE_TRANSLATE, translate_request(sentence.language, sentence.surfaces)
        )
        tokens = tuple(payload.get("tokens", ()))
        text = payload.get("text", "")
        if not tokens or not text:
            raise ProviderContentError(f"empty translation for sentence {sentence.id}")
        return Translation(text=text, tokens=tokens)


class HttpQasrlParser:
    def __init__(self, endpoint: ProviderEndpoint, session=None, sleep=time.sleep):
        self._transport = HttpTransport(endpoint, session=session, sleep=sleep)

    def parse_qasrl_english(self, english_tokens, predicate_index: int, kind: str) -> EnglishParse:
        payload = self._transport.post(
            ROUTE_PARSE, parse_request(english_tokens, predicate_index, kind)
        )
        return parse_payload_to_english_parse(payload, english_tokens, predicate_index, kind)


class HttpPredicateDetector:
    def __init__(self, endpoint: ProviderEndpoint, session=None, sleep=time.sleep):
        self._transport = HttpTransport(endpoint, session=session, sleep=sleep)

    def detect_predicates_english(self, english_tokens) -> list[DetectedPredicate]:
        if not english_tokens:
            raise ValueError("empty token list")
        payload = self._transport.post(ROUTE_DETECT, detect_request(english_tokens))
        out = [
            DetectedPredicate(index=int(p["index"]), kind=p["kind"])
            for p in payload.get("predicates", [])
        ]
        out.sort(key=lambda p: p.index)
        return out


class HttpWordAligner:
    def __init__(self, endpoint: ProviderEndpoint, session=None, sleep=time.sleep):
        self._transport = HttpTransport(endpoint, session=session, sleep=sleep)

    def align_words(self, english_tokens, target_tokens) -> AlignmentMap:
        if not english_tokens or not target_tokens:
            raise ValueError("alignment requires non-empty token lists")
        payload = self._transport.post(ROUTE_ALIGN, align_request(english_tokens, target_tokens))
        pairs = frozenset((int(e), int(t)) for e, t in payload.get("pairs", []))
        return AlignmentMap(pairs).check_bounds(len(english_tokens), len(target_tokens))


class HttpConstrainedTranslator:
    def __init__(
        self,
        endpoint: ProviderEndpoint,
        template: PromptTemplate = DEFAULT_CONSTRAINED_TEMPLATE,
        session=None,
        sleep=time.sleep,
    ):
        self.template = template
        self._transport = HttpTransport(endpoint, session=session, sleep=sleep)

    def constrained_translate_question(
        self, question_en: str, target_predicate_form: str, language: str
    ) -> str:
        if not target_predicate_form:
            raise ValueError("target predicate form must be non-empty")
        payload = self._transport.post(
            ROUTE_CTRANSLATE,
            ctranslate_request(question_en, target_predicate_form, language, self.template.name),
        )
        question = payload.get("question", "")
        if not question:
            raise ProviderContentError("empty constrained-translation completion")
        return question


class HttpQuestionEmbedder:
    def __init__(self, endpoint: ProviderEndpoint, session=None, sleep=time.sleep):
        self._transport = HttpTransport(endpoint, session=session, sleep=sleep)

    def embed_question(self, question: str) -> tuple[float, ...]:
        if not question:
            raise ValueError("cannot embed empty text")
        payload = self._transport.post(ROUTE_EMBED, embed_request(question))
        vector = tuple(float(v) for v in payload.get("vector", ()))
        if not vector:
            raise ProviderContentError("empty embedding vector")
        return check_unit_norm(vector)


class HttpNominalizationClassifier:
    def __init__(
        self,
        endpoint: ProviderEndpoint,
        template: PromptTemplate = DEFAULT_NOMCLASS_TEMPLATE,
        session=None,
        sleep=time.sleep,
    ):
        self.template = template
        self._transport = HttpTransport(endpoint, session=session, sleep=sleep)

    def classify_nominalization(self, noun: str, language: str) -> bool:
        if not noun:
            raise ValueError("noun must be non-empty")
        payload = self._transport.post(
            ROUTE_NOMCLASS, nomclass_request(noun, language, self.template.name)
        )
        label = payload.get("label")
        if not isinstance(label, bool):
            logger.warning("unparseable nominalization label %r for %r, treating as false", label, noun)
            return False
        return label


@dataclass
class ProviderSet:
    """The full bundle of services the projection pipeline consumes."""

    translator: object
    parser: object
    detector: object
    aligner: object
    constrained_translator: object
    embedder: object = None
    nominalization_classifier: object = None

    @classmethod
    def from_endpoints(
        cls, endpoints: dict[str, ProviderEndpoint], source_language: str, session=None
    ) -> "ProviderSet":
        def ep(name):
            if name not in endpoints:
                raise KeyError(f"no endpoint configured for provider {name!r}")
            return endpoints[name]

        return cls(
            translator=HttpTranslator(ep("translate"), source_language, session=session),
            parser=HttpQasrlParser(ep("parse"), session=session),
            detector=HttpPredicateDetector(ep("detect"), session=session),
            aligner=HttpWordAligner(ep("align"), session=session),
            constrained_translator=HttpConstrainedTranslator(ep("ctranslate"), session=session),
            embedder=HttpQuestionEmbedder(ep("embed"), session=session) if "embed" in endpoints else None,
            nominalization_classifier=(
                HttpNominalizationClassifier(ep("nomclass"), session=session)
                if "nomclass" in endpoints
                else None
            ),
        )
