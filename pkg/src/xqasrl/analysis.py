"""Threshold calibration, paired bootstrap significance, sensitivity sweeps.

Calibration sweeps a threshold grid over human-labeled (score, label) samples
and reports the F1 / F_beta argmax (lowest threshold on ties) plus the
Youden's J ROC cutoff. The paired bootstrap resamples predicate ids with
replacement — the same resample applied to both systems — and recomputes
micro-F1 from summed tp/fp/fn; index streams are pre-generated sequentially
from the seed so results do not depend on worker count.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .evaluation import MatchReport, Scores, Tally

logger = logging.getLogger(__name__)

CRITERION_F1 = "f1_argmax"
CRITERION_F_BETA = "f_beta_argmax"
CRITERION_YOUDEN = "roc_youden"

METRICS = ("unlabeled", "exact", "semantic")


class CalibrationError(ValueError):
    pass


class BootstrapError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledMatchSample:
    score: float
    label: bool

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


def read_samples(path) -> list[LabeledMatchSample]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            d = json.loads(line)
            try:
                out.append(LabeledMatchSample(float(d["score"]), bool(d["label"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise CalibrationError(f"bad sample at line {line_no}: {exc}") from exc
    return out


@dataclass(frozen=True)
class Sweep:
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0) or self.step <= 0:
            raise ValueError(f"bad sweep ({self.lo}, {self.hi}, {self.step})")

    def grid(self) -> list[float]:
        n = int(round((self.hi - self.lo) / self.step))
        points = [round(self.lo + i * self.step, 12) for i in range(n + 1)]
        return [p for p in points if p <= self.hi + 1e-12]


IOU_SWEEP = Sweep(0.05, 0.95, 0.05)
SEMANTIC_SWEEP = Sweep(0.50, 0.95, 0.01)
SENSITIVITY_SWEEP = Sweep(0.70, 0.90, 0.01)


@dataclass(frozen=True)
class CalibrationPoint:
    threshold: float
    precision: float
    recall: float
    score: float  # F1 or F_beta depending on the calibration mode
    tpr: float
    fpr: float

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "precision": self.precision,
            "recall": self.recall,
            "score": self.score,
            "tpr": self.tpr,
            "fpr": self.fpr,
        }


@dataclass(frozen=True)
class Selection:
    threshold: float
    criterion: str


@dataclass(frozen=True)
class CalibrationCurve:
    points: tuple[CalibrationPoint, ...]
    selected: Selection
    roc: Selection

    def point_at(self, threshold: float) -> CalibrationPoint:
        for point in self.points:
            if abs(point.threshold - threshold) < 1e-9:
                return point
        raise KeyError(f"threshold {threshold} not on the grid")

    def to_dict(self) -> dict:
        return {
            "selected": {"threshold": self.selected.threshold, "criterion": self.selected.criterion},
            "roc": {"threshold": self.roc.threshold, "criterion": self.roc.criterion},
            "points": [p.to_dict() for p in self.points],
        }


def f_beta(precision: float, recall: float, beta: float) -> float:
    denom = beta * beta * precision + recall
    if denom == 0.0:
        return 0.0
    return (1 + beta * beta) * precision * recall / denom


def _calibrate(samples, sweep: Sweep, beta: float, criterion: str) -> CalibrationCurve:
    samples = list(samples)
    positives = [s.score for s in samples if s.label]
    negatives = [s.score for s in samples if not s.label]
    if not positives or not negatives:
        raise CalibrationError("calibration needs at least one positive and one negative sample")

    points = []
    for t in sweep.grid():
        tp = sum(score >= t for score in positives)
        fp = sum(score >= t for score in negatives)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / len(positives)
        points.append(
            CalibrationPoint(
                threshold=t,
                precision=precision,
                recall=recall,
                score=f_beta(precision, recall, beta),
                tpr=recall,
                fpr=fp / len(negatives),
            )
        )

    best = points[0]
    for point in points[1:]:
        if point.score > best.score:
            best = point
    youden = points[0]
    for point in points[1:]:
        if point.tpr - point.fpr > youden.tpr - youden.fpr:
            youden = point
    return CalibrationCurve(
        points=tuple(points),
        selected=Selection(best.threshold, criterion),
        roc=Selection(youden.threshold, CRITERION_YOUDEN),
    )


def calibrate_iou_threshold(samples, sweep: Sweep = IOU_SWEEP) -> CalibrationCurve:
    return _calibrate(samples, sweep, beta=1.0, criterion=CRITERION_F1)


def calibrate_semantic_threshold(
    samples, beta: float = 0.5, sweep: Sweep = SEMANTIC_SWEEP
) -> CalibrationCurve:
    criterion = CRITERION_F1 if beta == 1.0 else CRITERION_F_BETA
    return _calibrate(samples, sweep, beta=beta, criterion=criterion)


@dataclass(frozen=True)
class BootstrapResult:
    metric: str
    iterations: int
    seed: int
    n_predicates: int
    observed_delta: float
    p_value_one_sided: float
    p_value_two_sided: float
    ci95: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "iterations": self.iterations,
            "seed": self.seed,
            "n_predicates": self.n_predicates,
            "observed_delta": self.observed_delta,
            "p_value_one_sided": self.p_value_one_sided,
            "p_value_two_sided": self.p_value_two_sided,
            "ci95": list(self.ci95),
        }


def _tally_of(report: MatchReport, metric: str) -> Tally:
    if metric not in METRICS:
        raise BootstrapError(f"unknown metric {metric!r}")
    return getattr(report, metric)


def _micro_f1(tp, fp, fn):
    denom = 2 * tp + fp + fn
    if np.isscalar(denom):
        return 2 * tp / denom if denom else 0.0
    out = np.zeros_like(denom, dtype=np.float64)
    np.divide(2.0 * tp, denom, out=out, where=denom > 0)
    return out


def paired_bootstrap(
    reports_a,
    reports_b,
    metric: str = "semantic",
    iterations: int = 10000,
    seed: int = 0,
    jobs: int = 1,
) -> BootstrapResult:
    reports_a = list(reports_a)
    reports_b = list(reports_b)
    a_by_id = {r.predicate_id: r for r in reports_a}
    b_by_id = {r.predicate_id: r for r in reports_b}
    if len(a_by_id) != len(reports_a) or len(b_by_id) != len(reports_b):
        raise BootstrapError("duplicate predicate ids in report set")
    if set(a_by_id) != set(b_by_id):
        missing = set(a_by_id) ^ set(b_by_id)
        raise BootstrapError(f"predicate id sets differ (e.g. {sorted(missing)[:3]})")
    ids = sorted(a_by_id)
    n = len(ids)
    if n == 0:
        raise BootstrapError("empty report sets")

    def arrays(by_id):
        tallies = [_tally_of(by_id[i], metric) for i in ids]
        return (
            np.array([t.tp for t in tallies], dtype=np.int64),
            np.array([t.fp for t in tallies], dtype=np.int64),
            np.array([t.fn for t in tallies], dtype=np.int64),
        )

    tp_a, fp_a, fn_a = arrays(a_by_id)
    tp_b, fp_b, fn_b = arrays(b_by_id)
    observed = float(
        _micro_f1(tp_a.sum(), fp_a.sum(), fn_a.sum()) - _micro_f1(tp_b.sum(), fp_b.sum(), fn_b.sum())
    )

    # Pre-generate the resample index stream sequentially so the result is a
    # pure function of (inputs, seed, iterations), independent of jobs.
    rng = np.random.default_rng(seed)
    chunk_size = max(1, min(iterations, 2_000_000 // n))
    chunks = []
    remaining = iterations
    while remaining > 0:
        take = min(chunk_size, remaining)
        chunks.append(rng.integers(0, n, size=(take, n)))
        remaining -= take

    def eval_chunk(idx: np.ndarray) -> np.ndarray:
        fa = _micro_f1(tp_a[idx].sum(axis=1), fp_a[idx].sum(axis=1), fn_a[idx].sum(axis=1))
        fb = _micro_f1(tp_b[idx].sum(axis=1), fp_b[idx].sum(axis=1), fn_b[idx].sum(axis=1))
        return fa - fb

    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(eval_chunk, chunks))
    else:
        parts = [eval_chunk(c) for c in chunks]
    deltas = np.concatenate(parts) if len(parts) > 1 else parts[0]

    if observed > 0:
        p_one = float(np.mean(deltas <= 0.0))
    else:
        p_one = float(np.mean(deltas >= 0.0))
    p_two = float(np.mean(np.abs(deltas) >= abs(observed)))
    lo, hi = np.percentile(deltas, [2.5, 97.5])
    return BootstrapResult(
        metric=metric,
        iterations=iterations,
        seed=seed,
        n_predicates=n,
        observed_delta=observed,
        p_value_one_sided=p_one,
        p_value_two_sided=p_two,
        ci95=(float(lo), float(hi)),
    )


@dataclass(frozen=True)
class SensitivityTable:
    thetas: tuple[float, ...]
    systems: tuple[str, ...]
    scores: dict  # system -> tuple[Scores, ...] aligned with thetas
    gaps: dict  # (system_a, system_b) -> tuple[float, ...] F1 gaps

    def to_rows(self) -> list[dict]:
        rows = []
        for i, theta in enumerate(self.thetas):
            row = {"theta": theta}
            for system in self.systems:
                row[system] = self.scores[system][i].to_dict()
            for (a, b), gap in self.gaps.items():
                row[f"gap:{a}-{b}"] = gap[i]
            rows.append(row)
        return rows


def threshold_sensitivity(systems: dict, sweep: Sweep = SENSITIVITY_SWEEP) -> SensitivityTable:
    """Recompute the semantic metric across a theta grid from cached cosines.

    Argument matching is theta-independent, so each system's matched pairs and
    node totals are reused; only the cosine cutoff moves.
    """
    thetas = tuple(sweep.grid())
    names = tuple(sorted(systems))
    scores: dict[str, tuple[Scores, ...]] = {}
    for name in names:
        reports = list(systems[name])
        pred_total = sum(r.unlabeled.tp + r.unlabeled.fp for r in reports)
        gold_total = sum(r.unlabeled.tp + r.unlabeled.fn for r in reports)
        cosines = np.array(
            [pair.cosine for r in reports for pair in r.matched_pairs], dtype=np.float64
        )
        per_theta = []
        for theta in thetas:
            tp = int((cosines >= theta).sum()) if cosines.size else 0
            per_theta.append(Scores.from_tally(Tally(tp, pred_total - tp, gold_total - tp)))
        scores[name] = tuple(per_theta)
    gaps = {}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            gaps[(a, b)] = tuple(
                scores[a][k].f1 - scores[b][k].f1 for k in range(len(thetas))
            )
    return SensitivityTable(thetas=thetas, systems=names, scores=scores, gaps=gaps)
