"""Cross-lingual QA-SRL projection: predicate alignment, span projection, gating.

Given a target-language sentence, the pipeline translates it to English,
obtains English QA-SRL annotations, and carries them back through word
alignment. Answer spans pass through three post-processing heuristics
(gap_fill, trim, split); questions are re-translated under a predicate
constraint and validated for predicate containment before a record is
emitted.
"""

from __future__ import annotations

import importlib.resources
import json
import logging
import unicodedata
from dataclasses import dataclass, field

from .corpus import NOMINAL, VERBAL, PredicateInstance, Sentence, TokenSpan
from .providers import AlignmentMap, ProviderError, Translation

logger = logging.getLogger(__name__)

KEEP_VERBAL = "keep_verbal"
KEEP_NOMINAL = "keep_nominal"
DROP = "drop"

HEURISTIC_GAP_FILL = "gap_fill"
HEURISTIC_TRIM = "trim"
HEURISTIC_SPLIT = "split"
HEURISTIC_ORDER = (HEURISTIC_GAP_FILL, HEURISTIC_TRIM, HEURISTIC_SPLIT)

PROVENANCE_PROJECTED = "projected"
PROVENANCE_MANUAL = "manual"
PROVENANCE_MODEL = "model"
PROVENANCES = (PROVENANCE_PROJECTED, PROVENANCE_MANUAL, PROVENANCE_MODEL)

# Hebrew clitic prefixes that may attach to a predicate form inside a question
# token when affixed matching is switched on.
DEFAULT_CLITIC_PREFIXES = ("ו", "ש", "ה", "ב", "ל", "כ", "מ")


class ProjectionDrop(Exception):
    """Control-flow signal: the current predicate or QA cannot be projected."""

    reason = "dropped"


class PredicateUnaligned(ProjectionDrop):
    reason = "predicate_unaligned"


class PredicateFiltered(ProjectionDrop):
    reason = "predicate_filtered"


class SpanUnaligned(ProjectionDrop):
    reason = "span_unaligned"


class SpanDegenerate(ProjectionDrop):
    reason = "span_degenerate"


def _load_function_words() -> dict[str, frozenset[str]]:
    data = importlib.resources.files("xqasrl").joinpath("data/function_words.json")
    raw = json.loads(data.read_text(encoding="utf-8"))
    return {lang: frozenset(words) for lang, words in raw.items()}


@dataclass(frozen=True)
class ProjectionConfig:
    """Knobs for span post-processing and constrained-question validation.

    Trailing function-word trimming is per-language (shipped default covers
    Hebrew only); the affixed-predicate switch lets a question token carry a
    clitic prefix in front of the exact predicate form.
    """

    trim_languages: frozenset[str] = frozenset({"he"})
    function_words: dict[str, frozenset[str]] = field(default_factory=_load_function_words)
    constrained_translation_retries: int = 3
    allow_affixed_predicate_match: bool = False
    clitic_prefixes: tuple[str, ...] = DEFAULT_CLITIC_PREFIXES
    drop_on_unaligned_predicate: bool = True

    def __post_init__(self):
        if self.constrained_translation_retries < 0:
            raise ValueError("retries must be >= 0")

    def trim_enabled(self, language: str) -> bool:
        return language in self.trim_languages


@dataclass(frozen=True)
class Answer:
    span: TokenSpan
    text: str

    @classmethod
    def from_span(cls, span: TokenSpan, sentence: Sentence) -> "Answer":
        return cls(span=span, text=span.text_in(sentence))


@dataclass(frozen=True)
class ProjectedQA:
    question: str
    question_en: str
    answers: tuple[Answer, ...]
    answers_en: tuple[TokenSpan, ...] = ()
    source: str = PROVENANCE_PROJECTED
    flags: tuple[str, ...] = ()
    heuristics: tuple[str, ...] = ()


@dataclass(frozen=True)
class DroppedQA:
    question_en: str
    reason: str


@dataclass(frozen=True)
class AuditEvent:
    sentence_id: str
    stage: str  # sentence | predicate | qa
    reason: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "stage": self.stage,
            "reason": self.reason,
            "detail": self.detail,
        }


@dataclass
class ProjectedRecord:
    """One predicate instance with its bilingual QA set — the dataset atom."""

    sentence: Sentence
    predicate: PredicateInstance
    qas: tuple[ProjectedQA, ...]
    english: Translation | None = None
    english_predicate_index: int | None = None
    alignment: AlignmentMap | None = None
    provenance: str = PROVENANCE_PROJECTED
    dropped_qas: tuple[DroppedQA, ...] = ()  # audit only, not serialized

    @property
    def record_id(self) -> str:
        return f"{self.sentence.id}#{self.predicate.token_index}"


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def align_predicate(english_index: int, alignment: AlignmentMap, sentence: Sentence) -> int:
    """Locate the target token for an English predicate.

    Among the aligned target tokens, only VERB/NOUN tokens qualify; the
    leftmost qualifying token wins and any multiplicity is logged.
    """
    targets = alignment.targets_of(english_index)
    if not targets:
        raise PredicateUnaligned(f"english token {english_index} has no alignment")
    qualifying = [t for t in targets if sentence.tokens[t].upos in ("VERB", "NOUN")]
    if not qualifying:
        raise PredicateFiltered(
            f"english token {english_index} aligns only to non-predicate POS at {targets}"
        )
    if len(qualifying) > 1:
        logger.info(
            "sentence %s: english token %d aligns to %d predicate candidates %s, keeping %d",
            sentence.id,
            english_index,
            len(qualifying),
            qualifying,
            qualifying[0],
        )
    return qualifying[0]


def gate_predicate(target_index: int, sentence: Sentence, classifier) -> str:
    """Keep verbal targets outright; keep nominal ones only when the
    classifier confirms a deverbal nominalization."""
    token = sentence.tokens[target_index]
    if token.upos == "VERB":
        return KEEP_VERBAL
    if token.upos == "NOUN":
        if classifier is None:
            logger.debug("no nominalization classifier configured; dropping %r", token.surface)
            return DROP
        word = token.lemma or token.surface
        try:
            is_nominalization = bool(classifier.classify_nominalization(word, sentence.language))
        except ProviderError as exc:
            logger.warning("nominalization classification failed for %r: %s", word, exc)
            return DROP
        return KEEP_NOMINAL if is_nominalization else DROP
    return DROP


def project_answer_span(
    english_span: TokenSpan, alignment: AlignmentMap, target_sentence: Sentence
) -> tuple[TokenSpan, bool]:
    """Project an English answer span; returns (span, gap_filled).

    The result is the minimal contiguous target span covering every aligned
    token; gap_filled reports whether the aligned indices had holes.
    """
    targets = alignment.targets_of_span(english_span)
    if not targets:
        raise SpanUnaligned(f"no target tokens aligned to english span {english_span}")
    span = TokenSpan(targets[0], targets[-1] + 1).check_bounds(len(target_sentence))
    gap_filled = len(targets) < len(span)
    return span, gap_filled


def trim_function_words(
    span: TokenSpan, sentence: Sentence, config: ProjectionConfig
) -> tuple[TokenSpan, bool]:
    """Drop listed function words from the end of the span (never emptying it)."""
    if not config.trim_enabled(sentence.language):
        return span, False
    words = config.function_words.get(sentence.language, frozenset())
    end = span.end
    while end - span.start > 1 and _nfc(sentence.tokens[end - 1].surface) in words:
        end -= 1
    if end == span.end:
        return span, False
    return TokenSpan(span.start, end), True


def sanitize_span(
    span: TokenSpan, sentence: Sentence, predicate_index: int
) -> tuple[TokenSpan, bool]:
    """Split at sentence-internal periods and the predicate token, keeping the
    longest segment (earlier segment on ties)."""
    last = len(sentence) - 1
    offending = [
        i
        for i in span.indices()
        if i == predicate_index or (sentence.tokens[i].surface == "." and i != last)
    ]
    if not offending:
        return span, False
    segments = []
    start = span.start
    for cut in offending:
        if cut > start:
            segments.append((start, cut))
        start = cut + 1
    if start < span.end:
        segments.append((start, span.end))
    if not segments:
        raise SpanDegenerate(f"span {span} contains only removable tokens")
    best = max(segments, key=lambda seg: (seg[1] - seg[0], -seg[0]))
    return TokenSpan(*best), True


def validate_constrained_question(
    question_target: str, predicate_surface: str, config: ProjectionConfig
) -> bool:
    """True iff some whitespace token of the question equals the predicate form
    (NFC-normalized); affix mode additionally accepts a configured clitic
    prefix glued in front of the form."""
    if not question_target or not predicate_surface:
        return False
    predicate = _nfc(predicate_surface)
    for raw in question_target.split():
        token = _nfc(raw)
        if token == predicate:
            return True
        if config.allow_affixed_predicate_match and token.endswith(predicate):
            prefix = token[: -len(predicate)]
            if prefix in config.clitic_prefixes:
                return True
    return False


def _canonical_heuristics(applied: set[str]) -> tuple[str, ...]:
    return tuple(h for h in HEURISTIC_ORDER if h in applied)


def _note(audit, sentence_id, stage, reason, detail=""):
    if audit is not None:
        audit.append(AuditEvent(sentence_id, stage, reason, detail))


def _project_qas(
    parse,
    alignment: AlignmentMap,
    sentence: Sentence,
    target_index: int,
    config: ProjectionConfig,
    constrained_translator,
    audit,
) -> tuple[list[ProjectedQA], list[DroppedQA]]:
    predicate_surface = sentence.tokens[target_index].surface
    out: list[ProjectedQA] = []
    dropped: list[DroppedQA] = []

    for qa in parse.qas:
        applied: set[str] = set()
        answers: list[Answer] = []
        answers_en: list[TokenSpan] = []
        for english_span in qa.answers:
            try:
                span, gap = project_answer_span(english_span, alignment, sentence)
                if gap:
                    applied.add(HEURISTIC_GAP_FILL)
                span, trimmed = trim_function_words(span, sentence, config)
                if trimmed:
                    applied.add(HEURISTIC_TRIM)
                span, split = sanitize_span(span, sentence, target_index)
                if split:
                    applied.add(HEURISTIC_SPLIT)
            except ProjectionDrop as exc:
                _note(audit, sentence.id, "qa", exc.reason, f"{qa.question} / {english_span}")
                continue
            answer = Answer.from_span(span, sentence)
            if answer not in answers:  # distinct english spans can collapse onto one target span
                answers.append(answer)
                answers_en.append(english_span)
        if not answers:
            dropped.append(DroppedQA(qa.question, "no_answers_survived"))
            _note(audit, sentence.id, "qa", "no_answers_survived", qa.question)
            continue

        question_target = None
        for _ in range(config.constrained_translation_retries):
            try:
                candidate = constrained_translator.constrained_translate_question(
                    qa.question, predicate_surface, sentence.language
                )
            except ProviderError as exc:
                logger.warning("constrained translation attempt failed: %s", exc)
                continue
            if validate_constrained_question(candidate, predicate_surface, config):
                question_target = candidate
                break
        if question_target is None:
            dropped.append(DroppedQA(qa.question, "constrained_translation_failed"))
            _note(audit, sentence.id, "qa", "constrained_translation_failed", qa.question)
            continue

        out.append(
            ProjectedQA(
                question=question_target,
                question_en=qa.question,
                answers=tuple(answers),
                answers_en=tuple(answers_en),
                source=PROVENANCE_PROJECTED,
                flags=(),
                heuristics=_canonical_heuristics(applied),
            )
        )
    return out, dropped


def project_record(
    sentence: Sentence,
    providers,
    config: ProjectionConfig | None = None,
    audit: list | None = None,
) -> list[ProjectedRecord]:
    """Run the full pipeline for one sentence.

    Returns zero or more records, one per distinct surviving target predicate
    token. When two English predicates align to the same target token their QA
    lists are merged (union rule). Provider failures at sentence level skip
    the sentence with an audit entry rather than raising.
    """
    if config is None:
        config = ProjectionConfig()
    try:
        translation = providers.translator.translate_sentence(sentence)
        detected = providers.detector.detect_predicates_english(translation.tokens)
        if not detected:
            return []
        alignment = providers.aligner.align_words(translation.tokens, sentence.surfaces)
    except ProviderError as exc:
        logger.warning("sentence %s skipped: %s", sentence.id, exc)
        _note(audit, sentence.id, "sentence", "provider_error", str(exc))
        return []

    records: dict[int, ProjectedRecord] = {}
    gate_cache: dict[int, str] = {}
    for det in detected:
        try:
            target_index = align_predicate(det.index, alignment, sentence)
        except ProjectionDrop as exc:
            _note(audit, sentence.id, "predicate", exc.reason, f"english index {det.index}")
            continue
        if target_index not in gate_cache:
            gate_cache[target_index] = gate_predicate(
                target_index, sentence, providers.nominalization_classifier
            )
        gate = gate_cache[target_index]
        if gate == DROP:
            _note(audit, sentence.id, "predicate", "predicate_gated",
                  f"english index {det.index} -> target {target_index}")
            continue
        try:
            parse = providers.parser.parse_qasrl_english(translation.tokens, det.index, det.kind)
        except ProviderError as exc:
            _note(audit, sentence.id, "predicate", "provider_error", str(exc))
            continue
        qas, dropped = _project_qas(
            parse, alignment, sentence, target_index, config, providers.constrained_translator, audit
        )
        if target_index in records:
            existing = records[target_index]
            existing.qas = existing.qas + tuple(qas)
            existing.dropped_qas = existing.dropped_qas + tuple(dropped)
            continue
        token = sentence.tokens[target_index]
        kind = VERBAL if gate == KEEP_VERBAL else NOMINAL
        records[target_index] = ProjectedRecord(
            sentence=sentence,
            predicate=PredicateInstance(
                sentence_id=sentence.id, token_index=target_index, kind=kind, lemma=token.lemma
            ),
            qas=tuple(qas),
            english=translation,
            english_predicate_index=det.index,
            alignment=alignment,
            provenance=PROVENANCE_PROJECTED,
            dropped_qas=tuple(dropped),
        )

    emitted = []
    for record in records.values():
        if record.qas:
            emitted.append(record)
        else:
            _note(audit, sentence.id, "predicate", "no_qas_survived",
                  f"target index {record.predicate.token_index}")
    return emitted


def project_corpus(
    sentences,
    providers,
    config: ProjectionConfig | None = None,
    audit: list | None = None,
) -> list[ProjectedRecord]:
    out: list[ProjectedRecord] = []
    for sentence in sentences:
        out.extend(project_record(sentence, providers, config=config, audit=audit))
    return out
