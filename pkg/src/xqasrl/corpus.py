"""CoNLL-U corpus ingestion, tokenized sentences, and predicate candidates."""

from __future__ import annotations

import logging
from dataclasses import dataclass

logger = logging.getLogger(__name__)

VERBAL = "verbal"
NOMINAL = "nominal"
PREDICATE_KINDS = (VERBAL, NOMINAL)

N_CONLLU_COLUMNS = 10


class ConlluParseError(ValueError):
    """Raised when a CoNLL-U document violates the expected layout."""


@dataclass(frozen=True)
class Token:
    index: int
    surface: str
    upos: str
    lemma: str | None = None

    def __post_init__(self):
        if not self.surface:
            raise ValueError(f"token {self.index}: empty surface form")


@dataclass(frozen=True)
class Sentence:
    id: str
    language: str
    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"sentence {self.id}: no tokens")
        for pos, tok in enumerate(self.tokens):
            if tok.index != pos:
                raise ValueError(
                    f"sentence {self.id}: token index {tok.index} at position {pos}"
                )

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.surfaces)


@dataclass(frozen=True, order=True)
class TokenSpan:
    """Half-open token-index range [start, end)."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.start >= self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def indices(self) -> range:
        return range(self.start, self.end)

    def check_bounds(self, sentence_length: int) -> "TokenSpan":
        if self.end > sentence_length:
            raise ValueError(
                f"span [{self.start}, {self.end}) exceeds sentence length {sentence_length}"
            )
        return self

    def text_in(self, sentence: Sentence) -> str:
        return " ".join(sentence.surfaces[self.start : self.end])


@dataclass(frozen=True)
class PredicateInstance:
    sentence_id: str
    token_index: int
    kind: str
    lemma: str | None = None

    def __post_init__(self):
        if self.kind not in PREDICATE_KINDS:
            raise ValueError(f"unknown predicate kind {self.kind!r}")


@dataclass(frozen=True)
class PredicatePolicy:
    """Which POS tags yield predicate candidates."""

    include_aux: bool = False


def parse_conllu(document: str, language: str) -> list[Sentence]:
    """Parse a CoNLL-U document into Sentences.

    Multiword-token range lines (ID like "3-4") and empty nodes (ID like
    "5.1") are skipped; their component rows carry the tokens. A block
    without a ``sent_id`` comment gets an id synthesized from its ordinal
    position, with a warning.
    """
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    sent_id: str | None = None

    def flush():
        nonlocal tokens, sent_id
        if not tokens:
            sent_id = None
            return
        sid = sent_id
        if sid is None:
            sid = f"s{len(sentences) + 1}"
            logger.warning("sentence without sent_id, synthesized %r", sid)
        sentences.append(Sentence(id=sid, language=language, tokens=tuple(tokens)))
        tokens = []
        sent_id = None

    # split on real newlines only: str.splitlines() would also break lines at
    # form-feed and separator control characters appearing inside token text
    for lineno, raw in enumerate(document.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("sent_id") and "=" in body:
                sent_id = body.split("=", 1)[1].strip()
            continue
        columns = line.split("\t")
        if len(columns) != N_CONLLU_COLUMNS:
            raise ConlluParseError(
                f"line {lineno}: expected {N_CONLLU_COLUMNS} tab-separated columns, "
                f"got {len(columns)}"
            )
        tok_id = columns[0]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword-token ranges and empty nodes
        try:
            position = int(tok_id)
        except ValueError as exc:
            raise ConlluParseError(f"line {lineno}: bad token id {tok_id!r}") from exc
        if position != len(tokens) + 1:
            raise ConlluParseError(
                f"line {lineno}: token id {position} breaks contiguity "
                f"(expected {len(tokens) + 1})"
            )
        form = columns[1]
        if not form:
            raise ConlluParseError(f"line {lineno}: empty FORM column")
        lemma = columns[2] if columns[2] != "_" else None
        tokens.append(Token(index=position - 1, surface=form, upos=columns[3], lemma=lemma))
    flush()
    return sentences


def sentence_to_conllu(sentence: Sentence) -> str:
    """Render a Sentence back to a CoNLL-U block (FORM/LEMMA/UPOS only)."""
    lines = [f"# sent_id = {sentence.id}"]
    for tok in sentence.tokens:
        lemma = tok.lemma if tok.lemma is not None else "_"
        lines.append(
            "\t".join(
                [str(tok.index + 1), tok.surface, lemma, tok.upos, "_", "_", "_", "_", "_", "_"]
            )
        )
    return "\n".join(lines) + "\n"


def corpus_to_conllu(sentences: list[Sentence]) -> str:
    return "\n".join(sentence_to_conllu(s) for s in sentences)


def candidate_predicates(
    sentence: Sentence, policy: PredicatePolicy = PredicatePolicy()
) -> list[PredicateInstance]:
    """Enumerate verbal and nominal predicate candidates by POS, in token order."""
    verbal_tags = {"VERB", "AUX"} if policy.include_aux else {"VERB"}
    out = []
    for tok in sentence.tokens:
        if tok.upos in verbal_tags:
            kind = VERBAL
        elif tok.upos == "NOUN":
            kind = NOMINAL
        else:
            continue
        out.append(
            PredicateInstance(
                sentence_id=sentence.id, token_index=tok.index, kind=kind, lemma=tok.lemma
            )
        )
    return out
