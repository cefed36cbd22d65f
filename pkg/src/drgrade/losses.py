"""Weighted cross-entropy and the two-task loss combinator.

weighted_ce uses weighted-mean reduction (divide by the summed target
weights) so the auxiliary-task multiplier keeps its meaning regardless of
batch size. The combinator is a pure function over (value, gradient)
pairs so any trainer can reuse it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LabelOutOfRange, NonFiniteInput, ShapeMismatch, ZeroCount

# Auxiliary image-quality task weights derived from its class distribution.
DEFAULT_QUALITY_TASK_WEIGHTS = (0.779, 0.146, 0.075)

# Multiplier values swept for the auxiliary task.
LAMBDA_SWEEP = (0.0, 0.01, 0.1, 1.0)


@dataclass(frozen=True)
class ClassWeights:
    weights: np.ndarray  # (K,) positive finite

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 2:
            raise ShapeMismatch(f"class weights must be 1-D with K >= 2, got {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise NonFiniteInput(f"class weights must be positive finite, got {w!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def k(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class MultiTaskConfig:
    lam: float = 0.1
    task2_weights: ClassWeights = ClassWeights(np.array(DEFAULT_QUALITY_TASK_WEIGHTS))
    task3_weights: ClassWeights | None = None  # None: inverse-frequency at train time

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise NonFiniteInput(f"lambda must be >= 0, got {self.lam!r}")


@dataclass(frozen=True)
class LossValue:
    value: float
    gradient: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gradient, dtype=np.float64)
        if not (np.isfinite(self.value) and np.all(np.isfinite(g))):
            raise NonFiniteInput("loss or gradient not finite")
        g.setflags(write=False)
        object.__setattr__(self, "gradient", g)


def softmax(logits) -> np.ndarray:
    """Max-subtracted exponential normalization; rows for 2-D input."""
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise NonFiniteInput("non-finite logits")
    zmax = z.max(axis=-1, keepdims=True)
    e = np.exp(z - zmax)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise NonFiniteInput("non-finite logits")
    zmax = z.max(axis=-1, keepdims=True)
    shifted = z - zmax
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def weighted_ce(logits, targets, w: ClassWeights) -> LossValue:
    """Weighted-mean cross entropy over a batch of logit rows.

    value = sum_n w[y_n] * (-log p_n[y_n]) / sum_n w[y_n]; the gradient is
    taken with respect to the logits.
    """
    z = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    y = np.atleast_1d(np.asarray(targets, dtype=np.int64))
    b, k = z.shape
    if b == 0:
        raise ShapeMismatch("empty batch")
    if y.shape != (b,):
        raise ShapeMismatch(f"targets {y.shape} for batch of {b}")
    if w.k != k:
        raise ShapeMismatch(f"{w.k} class weights for {k} logit columns")
    if np.any(y < 0) or np.any(y >= k):
        raise LabelOutOfRange(f"target outside [0, {k})")
    logp = log_softmax(z)
    rows = np.arange(b)
    wy = w.weights[y]
    wsum = float(wy.sum())
    value = float(-(wy * logp[rows, y]).sum() / wsum)
    grad = softmax(z) * (wy / wsum)[:, None]
    grad[rows, y] -= wy / wsum
    if np.asarray(logits).ndim == 1:
        grad = grad[0]
    return LossValue(value=value, gradient=grad)


def multitask_loss(loss3: LossValue, loss2: LossValue, cfg: MultiTaskConfig) -> LossValue:
    """Combine the main and auxiliary losses: total = loss3 + lam * loss2.

    Gradients must live in the same shared-parameter coordinate space
    (hard parameter sharing). lam = 0 returns loss3 exactly, bit for bit.
    """
    if loss3.gradient.shape != loss2.gradient.shape:
        raise ShapeMismatch(
            f"gradient shapes differ: {loss3.gradient.shape} vs {loss2.gradient.shape}"
        )
    if cfg.lam == 0.0:
        return LossValue(value=loss3.value, gradient=loss3.gradient.copy())
    return LossValue(
        value=loss3.value + cfg.lam * loss2.value,
        gradient=loss3.gradient + cfg.lam * loss2.gradient,
    )


def inverse_frequency_weights(class_counts) -> ClassWeights:
    """w_i proportional to N / count_i, normalized so the weights sum to K."""
    c = np.asarray(class_counts, dtype=np.float64)
    if np.any(c <= 0):
        raise ZeroCount(f"class counts must be positive, got {c!r}")
    raw = c.sum() / c
    return ClassWeights(raw * (c.size / raw.sum()))
