"""Agreement and ranking metrics: quadratic weighted kappa, one-vs-one
macro-AUC, and the challenge ranking comparator (QWK first, AUC second).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .core import ModelScore, PredictionPanel, validate_label
from .errors import (
    DataError,
    DegenerateDistribution,
    EmptyClass,
    LengthMismatch,
    SingleClassTruth,
)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Observed counts, rows = true class, columns = predicted class."""

    counts: np.ndarray  # (K, K) int64

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 2:
            raise DataError(f"confusion matrix must be square with K >= 2, got {c.shape}")
        if np.any(c < 0):
            raise DataError("negative cell count")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(truth, predicted, k: int) -> ConfusionMatrix:
    truth = np.asarray(truth, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if truth.shape != predicted.shape or truth.ndim != 1:
        raise LengthMismatch(f"truth {truth.shape} vs predicted {predicted.shape}")
    for v in truth:
        validate_label(int(v), k)
    for v in predicted:
        validate_label(int(v), k)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (truth, predicted), 1)
    return ConfusionMatrix(counts)


def qwk(cm: ConfusionMatrix) -> float:
    """Quadratic weighted kappa: 1 - sum(w*O) / sum(w*E).

    w_ij = (i-j)^2 / (K-1)^2, E_ij = row_i * col_j / N. The raw value is
    returned unclipped. A zero denominator (all truth and prediction mass
    in one identical class) raises DegenerateDistribution; model-ranking
    callers treat that as the worst possible score.
    """
    o = cm.counts.astype(np.float64)
    n = cm.n
    if n < 1:
        raise DataError("empty confusion matrix")
    k = cm.k
    idx = np.arange(k, dtype=np.float64)
    w = (idx[:, None] - idx[None, :]) ** 2 / (k - 1) ** 2
    rows = o.sum(axis=1)
    cols = o.sum(axis=0)
    e = np.outer(rows, cols) / n
    denom = float((w * e).sum())
    if denom == 0.0:
        raise DegenerateDistribution(
            "all truth and prediction mass in a single identical class"
        )
    return 1.0 - float((w * o).sum()) / denom


def pair_auc(scores, is_positive) -> float:
    """Probability that a random positive sample outscores a random
    negative one, ties counted 0.5 (mid-rank convention).

    Computed via the rank-sum identity, which matches exhaustive pair
    counting exactly.
    """
    scores = np.asarray(scores, dtype=np.float64)
    pos = np.asarray(is_positive, dtype=bool)
    if scores.shape != pos.shape or scores.ndim != 1:
        raise LengthMismatch(f"scores {scores.shape} vs flags {pos.shape}")
    n_pos = int(pos.sum())
    n_neg = int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise EmptyClass(f"need both classes, got {n_pos} positive / {n_neg} negative")
    ranks = rankdata(scores, method="average")
    u = float(ranks[pos].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


@dataclass(frozen=True)
class MacroAucResult:
    value: float
    skipped_pairs: tuple[tuple[int, int], ...] = ()

    @property
    def has_skipped(self) -> bool:
        return bool(self.skipped_pairs)

    def __float__(self) -> float:
        return self.value


def ovo_macro_auc(probs, truth, k: int | None = None) -> MacroAucResult:
    """One-vs-one macro-AUC over class probabilities (Hand-Till style).

    For each unordered pair {i, j}: restrict to samples of those classes,
    score once with the class-i probabilities, once with the class-j
    probabilities, and average the two directions. The macro value is the
    unweighted mean over pairs; pairs missing a class are skipped and
    flagged in the result.
    """
    probs = np.asarray(probs, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] != truth.shape[0]:
        raise LengthMismatch(f"probs {probs.shape} vs truth {truth.shape}")
    if k is None:
        k = probs.shape[1]
    if probs.shape[1] != k:
        raise DataError(f"probs have {probs.shape[1]} classes, expected {k}")
    present = np.unique(truth)
    if present.size < 2:
        raise SingleClassTruth("need at least two classes in truth")

    present_set = set(int(c) for c in present)
    values = []
    skipped = []
    for i in range(k):
        for j in range(i + 1, k):
            if i not in present_set or j not in present_set:
                skipped.append((i, j))
                continue
            mask = (truth == i) | (truth == j)
            flags = truth[mask] == i
            a_ij = pair_auc(probs[mask, i], flags)
            a_ji = pair_auc(probs[mask, j], ~flags)
            values.append(0.5 * (a_ij + a_ji))
    return MacroAucResult(value=float(np.mean(values)), skipped_pairs=tuple(skipped))


def rank_models(scores) -> list[ModelScore]:
    """Challenge order: QWK descending, exact ties by AUC descending,
    remaining ties by model id. Total and deterministic."""
    return sorted(scores, key=lambda s: (-s.qwk, -s.auc, s.model_id))


def score_panel(panel: PredictionPanel) -> list[ModelScore]:
    """Per-model QWK (argmax predictions) and ovo macro-AUC on a labeled
    panel, in panel model order."""
    if panel.labels is None:
        raise DataError("panel has no labels to score against")
    out = []
    for mi, mid in enumerate(panel.models):
        p = panel.probs[mi]
        pred = np.argmax(p, axis=1)
        q = qwk(confusion_matrix(panel.labels, pred, panel.k))
        a = ovo_macro_auc(p, panel.labels, panel.k)
        out.append(ModelScore(model_id=mid, qwk=q, auc=a.value))
    return out
