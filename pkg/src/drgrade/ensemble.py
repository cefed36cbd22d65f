"""The three ensemble strategies over a prediction panel.

Plurality voting (hard argmax votes), unweighted probability averaging,
and label fusion through a trained network. Voting output is one-hot so
AUC stays well-defined (and degenerate, as the method deserves). All
strategies work per sample column and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PredictionPanel
from .errors import DataError, WidthMismatch
from .fusion import FusionNet, predict_probs

VOTE = "vote"
AVERAGE = "avg"
FUSION = "fusion"
STRATEGY_KINDS = (VOTE, AVERAGE, FUSION)


@dataclass(frozen=True)
class EnsembleStrategy:
    kind: str
    fusion_model: FusionNet | None = None

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise DataError(f"unknown strategy {self.kind!r}, expected one of {STRATEGY_KINDS}")
        if self.kind == FUSION and self.fusion_model is None:
            raise DataError("label fusion requires a fusion model")


def plurality_vote(column: np.ndarray) -> int:
    """Winning class for one sample column of shape (M, K).

    Each model casts its argmax (model-internal ties to the lowest class
    index). Vote ties break on the highest mean probability over all
    models among the tied classes, then on the lowest class index.
    """
    column = np.asarray(column, dtype=np.float64)
    m, k = column.shape
    votes = np.bincount(np.argmax(column, axis=1), minlength=k)
    top = votes.max()
    tied = np.nonzero(votes == top)[0]
    if tied.size == 1:
        return int(tied[0])
    means = column.mean(axis=0)
    return int(tied[np.argmax(means[tied])])


def average_probabilities(column: np.ndarray) -> np.ndarray:
    """Element-wise mean of the models' probability vectors."""
    column = np.asarray(column, dtype=np.float64)
    return column.mean(axis=0)


def fusion_predict(column: np.ndarray, net: FusionNet) -> np.ndarray:
    """Forward pass on the concatenated probabilities (canonical model
    order); the first-layer width fixes the expected M*K."""
    column = np.asarray(column, dtype=np.float64)
    flat = column.reshape(-1)
    if flat.shape[0] != net.dims[0]:
        raise WidthMismatch(
            f"column gives input width {flat.shape[0]}, fusion net expects {net.dims[0]}"
        )
    return predict_probs(net, flat)[0]


def ensemble_predict(panel: PredictionPanel, strategy: EnsembleStrategy):
    """Apply a strategy to every sample column.

    Returns (probs, labels): an (N, K) array of ensembled probability
    vectors and the (N,) predicted classes (argmax, lowest index on
    ties). Voting emits one-hot vectors at the winning class.
    """
    m, n, k = panel.probs.shape
    if strategy.kind == VOTE:
        probs = np.zeros((n, k))
        for i in range(n):
            probs[i, plurality_vote(panel.column(i))] = 1.0
    elif strategy.kind == AVERAGE:
        probs = panel.probs.mean(axis=0)
    else:
        net = strategy.fusion_model
        flat = panel.probs.transpose(1, 0, 2).reshape(n, m * k)
        if flat.shape[1] != net.dims[0]:
            raise WidthMismatch(
                f"panel gives input width {flat.shape[1]}, fusion net expects {net.dims[0]}"
            )
        probs = predict_probs(net, flat)
    return probs, np.argmax(probs, axis=1)
