"""Two-stage evaluation: IOU argument matching, then question matching.

Stage 1 builds a bipartite graph between predicted and gold answer spans,
keeps edges with token IOU >= tau (inclusive), and selects a one-to-one
matching of maximum total IOU. Stage 2 judges each matched pair's questions
by exact string match (after normalization) and by embedding cosine >= theta
(inclusive).

Matching is computed in exact arithmetic (integer-scaled rational weights) so
that weight ties are real ties, resolved deterministically: among all
maximum-weight matchings, the lexicographically smallest sequence of
(gold_index, predicted_index) pairs wins.
"""

from __future__ import annotations

import json
import math
import unicodedata
from dataclasses import dataclass
from fractions import Fraction

from .corpus import TokenSpan

EXACT_POLICY_FOLD = "fold"  # NFC + trim + whitespace collapse + casefold
EXACT_POLICY_STRICT = "strict"  # NFC + trim only
EXACT_POLICIES = (EXACT_POLICY_FOLD, EXACT_POLICY_STRICT)


class EvalError(RuntimeError):
    """Evaluation cannot proceed (e.g. no embedder for semantic matching)."""


@dataclass(frozen=True)
class EvalConfig:
    tau: float = 0.5
    theta: float = 0.78
    exact_normalization: str = EXACT_POLICY_FOLD

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must be in [0, 1]")
        if self.exact_normalization not in EXACT_POLICIES:
            raise ValueError(f"unknown exact-match policy {self.exact_normalization!r}")


@dataclass(frozen=True)
class SpanNode:
    span: TokenSpan
    question: str


@dataclass(frozen=True)
class Tally:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "Tally") -> "Tally":
        return Tally(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn}


@dataclass(frozen=True)
class MatchedPair:
    gold: SpanNode
    pred: SpanNode
    iou: float
    exact: bool
    semantic: bool
    cosine: float


@dataclass(frozen=True)
class MatchReport:
    predicate_id: str
    matched_pairs: tuple[MatchedPair, ...]
    unlabeled: Tally
    exact: Tally
    semantic: Tally


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_tally(cls, tally: Tally) -> "Scores":
        p = tally.tp / (tally.tp + tally.fp) if tally.tp + tally.fp else 0.0
        r = tally.tp / (tally.tp + tally.fn) if tally.tp + tally.fn else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f1)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class EvalSummary:
    unlabeled: Scores
    exact: Scores
    semantic: Scores
    predicates: int

    def to_dict(self) -> dict:
        return {
            "predicates": self.predicates,
            "unlabeled": self.unlabeled.to_dict(),
            "exact": self.exact.to_dict(),
            "semantic": self.semantic.to_dict(),
        }


def token_iou(a: TokenSpan, b: TokenSpan) -> float:
    return float(_iou_fraction(a, b))


def _iou_fraction(a: TokenSpan, b: TokenSpan) -> Fraction:
    inter = min(a.end, b.end) - max(a.start, b.start)
    if inter <= 0:
        return Fraction(0)
    union = len(a) + len(b) - inter
    return Fraction(inter, union)


def match_arguments(predicted, gold, tau) -> list[tuple[int, int]]:
    """Maximum-IOU one-to-one matching; returns (gold_index, pred_index) pairs.

    Edges below tau are discarded (inclusive threshold). The search is a
    memoized DP over gold positions and a bitmask of used predicted nodes,
    exact over integer-scaled weights; practical for the node counts QA-SRL
    produces per predicate.
    """
    n_gold, n_pred = len(gold), len(predicted)
    if not n_gold or not n_pred:
        return []
    # read float thresholds as their decimal literal so the inclusive boundary
    # behaves in base 10: tau=0.4 admits IOU 2/5, which Fraction(0.4) would not
    tau_frac = tau if isinstance(tau, Fraction) else Fraction(str(tau))

    weights: dict[tuple[int, int], Fraction] = {}
    for g in range(n_gold):
        for p in range(n_pred):
            w = _iou_fraction(gold[g].span, predicted[p].span)
            if w >= tau_frac:
                weights[(g, p)] = w
    if not weights:
        return []

    scale = math.lcm(*{w.denominator for w in weights.values()})
    iw = {gp: w.numerator * (scale // w.denominator) for gp, w in weights.items()}

    memo: dict[tuple[int, int], int] = {}

    def best(g: int, used: int) -> int:
        if g == n_gold:
            return 0
        key = (g, used)
        if key in memo:
            return memo[key]
        out = best(g + 1, used)
        for p in range(n_pred):
            w = iw.get((g, p))
            if w is not None and not used >> p & 1:
                out = max(out, w + best(g + 1, used | (1 << p)))
        memo[key] = out
        return out

    total = best(0, 0)
    pairs: list[tuple[int, int]] = []
    used = 0
    fixed = 0
    g = 0
    while fixed < total:
        advanced = False
        for gg in range(g, n_gold):
            for p in range(n_pred):
                w = iw.get((gg, p))
                if w is None or used >> p & 1:
                    continue
                if fixed + w + best(gg + 1, used | (1 << p)) == total:
                    pairs.append((gg, p))
                    used |= 1 << p
                    fixed += w
                    g = gg + 1
                    advanced = True
                    break
            if advanced:
                break
        if not advanced:  # remaining optimum is zero-weight; stop (empty continuation)
            break
    return pairs


def normalize_question(text: str, policy: str = EXACT_POLICY_FOLD) -> str:
    out = unicodedata.normalize("NFC", text).strip()
    if policy == EXACT_POLICY_FOLD:
        out = " ".join(out.split()).casefold()
    return out


def question_exact_match(q_pred: str, q_gold: str, policy: str = EXACT_POLICY_FOLD) -> bool:
    return normalize_question(q_pred, policy) == normalize_question(q_gold, policy)


class EmbeddingCache:
    """Read-mostly embedding store keyed by NFC-normalized question text.

    Identical normalized strings short-circuit to cosine 1.0 without touching
    the embedder, which also makes gold-vs-gold evaluation embedder-free.
    """

    def __init__(self, embedder=None):
        self.embedder = embedder
        self._vectors: dict[str, tuple[float, ...]] = {}

    def _vector(self, key: str) -> tuple[float, ...]:
        if key not in self._vectors:
            if self.embedder is None:
                raise EvalError("semantic matching requires an embedder")
            self._vectors[key] = tuple(self.embedder.embed_question(key))
        return self._vectors[key]

    def cosine(self, a: str, b: str) -> float:
        ka = unicodedata.normalize("NFC", a)
        kb = unicodedata.normalize("NFC", b)
        if ka == kb:
            return 1.0
        va, vb = self._vector(ka), self._vector(kb)
        if len(va) != len(vb):
            raise EvalError(f"embedding dimensionality mismatch: {len(va)} vs {len(vb)}")
        dot = sum(x * y for x, y in zip(va, vb))
        na = math.sqrt(sum(x * x for x in va))
        nb = math.sqrt(sum(y * y for y in vb))
        if na == 0.0 or nb == 0.0:
            return 0.0
        return max(-1.0, min(1.0, dot / (na * nb)))


def question_semantic_match(q_pred: str, q_gold: str, embedder, theta: float) -> tuple[bool, float]:
    cache = embedder if isinstance(embedder, EmbeddingCache) else EmbeddingCache(embedder)
    cosine = cache.cosine(q_pred, q_gold)
    return cosine >= theta, cosine


def flatten_qas(qas) -> list[SpanNode]:
    """One bipartite node per (question, answer-span) pair."""
    nodes = []
    for qa in qas:
        for answer in qa.answers:
            nodes.append(SpanNode(span=answer.span, question=qa.question))
    return nodes


def evaluate_predicate(predicted_qas, gold_qas, config: EvalConfig, embedder=None) -> MatchReport:
    return evaluate_nodes(
        flatten_qas(predicted_qas), flatten_qas(gold_qas), config, embedder, predicate_id=""
    )


def evaluate_nodes(
    pred_nodes, gold_nodes, config: EvalConfig, embedder=None, predicate_id: str = ""
) -> MatchReport:
    cache = embedder if isinstance(embedder, EmbeddingCache) else EmbeddingCache(embedder)
    pairs = match_arguments(pred_nodes, gold_nodes, config.tau)
    matched = []
    n_exact = 0
    n_semantic = 0
    for g, p in pairs:
        gold_node, pred_node = gold_nodes[g], pred_nodes[p]
        exact = question_exact_match(pred_node.question, gold_node.question, config.exact_normalization)
        cosine = cache.cosine(pred_node.question, gold_node.question)
        semantic = cosine >= config.theta
        n_exact += exact
        n_semantic += semantic
        matched.append(
            MatchedPair(
                gold=gold_node,
                pred=pred_node,
                iou=token_iou(gold_node.span, pred_node.span),
                exact=exact,
                semantic=semantic,
                cosine=cosine,
            )
        )
    tp = len(pairs)
    n_pred, n_gold = len(pred_nodes), len(gold_nodes)
    return MatchReport(
        predicate_id=predicate_id,
        matched_pairs=tuple(matched),
        unlabeled=Tally(tp, n_pred - tp, n_gold - tp),
        exact=Tally(n_exact, n_pred - n_exact, n_gold - n_exact),
        semantic=Tally(n_semantic, n_pred - n_semantic, n_gold - n_semantic),
    )


def evaluate_records(pred_records, gold_records, config: EvalConfig, embedder=None) -> list[MatchReport]:
    """Pair predicted and gold records by record id; a missing side counts
    as an empty QA set (pure false positives / false negatives)."""
    cache = EmbeddingCache(embedder) if not isinstance(embedder, EmbeddingCache) else embedder
    pred_records = list(pred_records)
    gold_records = list(gold_records)
    pred_by_id = {r.record_id: r for r in pred_records}
    gold_by_id = {r.record_id: r for r in gold_records}
    if len(pred_by_id) != len(pred_records):
        raise EvalError("duplicate record ids in predictions")
    if len(gold_by_id) != len(gold_records):
        raise EvalError("duplicate record ids in gold")
    reports = []
    for rid in sorted(set(pred_by_id) | set(gold_by_id)):
        pred = pred_by_id.get(rid)
        gold = gold_by_id.get(rid)
        reports.append(
            evaluate_nodes(
                flatten_qas(pred.qas if pred else ()),
                flatten_qas(gold.qas if gold else ()),
                config,
                cache,
                predicate_id=rid,
            )
        )
    return reports


def aggregate(reports) -> EvalSummary:
    unlabeled = exact = semantic = Tally()
    count = 0
    for report in reports:
        unlabeled += report.unlabeled
        exact += report.exact
        semantic += report.semantic
        count += 1
    return EvalSummary(
        unlabeled=Scores.from_tally(unlabeled),
        exact=Scores.from_tally(exact),
        semantic=Scores.from_tally(semantic),
        predicates=count,
    )


def report_to_dict(report: MatchReport) -> dict:
    return {
        "predicate_id": report.predicate_id,
        "unlabeled": report.unlabeled.to_dict(),
        "exact": report.exact.to_dict(),
        "semantic": report.semantic.to_dict(),
        "matched_pairs": [
            {
                "gold": {"start": m.gold.span.start, "end": m.gold.span.end, "question": m.gold.question},
                "pred": {"start": m.pred.span.start, "end": m.pred.span.end, "question": m.pred.question},
                "iou": m.iou,
                "exact": m.exact,
                "semantic": m.semantic,
                "cosine": m.cosine,
            }
            for m in report.matched_pairs
        ],
    }


def report_from_dict(d: dict) -> MatchReport:
    def tally(obj) -> Tally:
        return Tally(int(obj["tp"]), int(obj["fp"]), int(obj["fn"]))

    pairs = tuple(
        MatchedPair(
            gold=SpanNode(TokenSpan(m["gold"]["start"], m["gold"]["end"]), m["gold"]["question"]),
            pred=SpanNode(TokenSpan(m["pred"]["start"], m["pred"]["end"]), m["pred"]["question"]),
            iou=float(m["iou"]),
            exact=bool(m["exact"]),
            semantic=bool(m["semantic"]),
            cosine=float(m["cosine"]),
        )
        for m in d.get("matched_pairs", [])
    )
    return MatchReport(
        predicate_id=d["predicate_id"],
        matched_pairs=pairs,
        unlabeled=tally(d["unlabeled"]),
        exact=tally(d["exact"]),
        semantic=tally(d["semantic"]),
    )


def write_reports(reports, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for report in reports:
            fh.write(json.dumps(report_to_dict(report), ensure_ascii=False))
            fh.write("\n")


def read_reports(path) -> list[MatchReport]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(report_from_dict(json.loads(line)))
    return out
