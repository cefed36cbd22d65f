"""Synthetic classifier panels and the toy two-task experiment.

The panel generator stands in for real backbone outputs: per sample, a
shared latent event (probability = correlation) makes every model reuse
one correctness draw and one error-class draw, so marginal per-model
accuracy is exact for any correlation in [0, 1) while correlation tunes
how much the models' mistakes coincide. Emitted probability vectors are
Dirichlet draws concentrated on the predicted class, re-drawn until the
argmax lands there, so realized argmax accuracy matches the drawn
correctness pattern.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PredictionPanel
from .errors import DataError, InfeasibleAccuracy
from .fusion import TrainConfig
from .losses import (
    ClassWeights,
    LossValue,
    MultiTaskConfig,
    multitask_loss,
    softmax,
    weighted_ce,
)
from .metrics import confusion_matrix, qwk
from .splitting import largest_remainder

CONFUSION_PROFILES = ("adjacent", "uniform")

# Shape-parameter used by the label-count apportionment and sampling; the
# grading distribution default mirrors a heavily imbalanced clinic mix.
DEFAULT_CLASS_DISTRIBUTION = (0.538, 0.347, 0.115)

_MAX_EMISSION_RETRIES = 100


@dataclass(frozen=True)
class PanelSpec:
    n_models: int = 16
    n_samples: int = 611
    k: int = 3
    class_distribution: tuple[float, ...] = DEFAULT_CLASS_DISTRIBUTION
    per_model_accuracy: float | tuple[float, ...] = 0.75
    confusion_profile: str = "adjacent"
    sharpness: float = 10.0
    correlation: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_models < 1 or self.n_samples < 1 or self.k < 2:
            raise DataError("need n_models >= 1, n_samples >= 1, k >= 2")
        dist = tuple(float(p) for p in self.class_distribution)
        if len(dist) != self.k or any(p < 0 for p in dist) or abs(sum(dist) - 1) > 1e-9:
            raise DataError(f"class distribution {dist} is not a {self.k}-simplex point")
        object.__setattr__(self, "class_distribution", dist)
        acc = self.per_model_accuracy
        accs = tuple(float(a) for a in (acc if np.ndim(acc) else [acc] * self.n_models))
        if len(accs) != self.n_models:
            raise DataError(f"{len(accs)} accuracies for {self.n_models} models")
        for a in accs:
            if not (1.0 / self.k < a <= 1.0):
                raise InfeasibleAccuracy(f"accuracy {a} outside (1/K, 1]")
        object.__setattr__(self, "per_model_accuracy", accs)
        if self.confusion_profile not in CONFUSION_PROFILES:
            raise DataError(f"unknown confusion profile {self.confusion_profile!r}")
        if self.sharpness <= 1.0:
            raise DataError("sharpness must exceed 1 so the predicted class dominates")
        if not (0.0 <= self.correlation < 1.0):
            raise DataError(f"correlation {self.correlation} outside [0, 1)")


def gen_labels(spec: PanelSpec) -> np.ndarray:
    """Exact per-class counts (largest remainder), then a seeded shuffle."""
    counts = largest_remainder(
        np.asarray(spec.class_distribution) * spec.n_samples, spec.n_samples
    )
    labels = np.repeat(np.arange(spec.k, dtype=np.int64), counts)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, 0])))
    return labels[rng.permutation(spec.n_samples)]


def _error_class_table(spec: PanelSpec) -> np.ndarray:
    """Cumulative error-class distribution per true class, (K, K-1)."""
    k = spec.k
    cum = np.zeros((k, k - 1))
    for t in range(k):
        wrong = [c for c in range(k) if c != t]
        if spec.confusion_profile == "adjacent":
            w = np.array([0.5 ** (abs(t - c) - 1) for c in wrong])
        else:
            w = np.ones(len(wrong))
        cum[t] = np.cumsum(w / w.sum())
    return cum


def gen_panel(labels, spec: PanelSpec) -> PredictionPanel:
    """Simulate the M x N panel for the given true labels."""
    labels = np.asarray(labels, dtype=np.int64)
    n, m, k = labels.size, spec.n_models, spec.k
    if n != spec.n_samples:
        raise DataError(f"{n} labels for spec with {spec.n_samples} samples")
    accs = np.asarray(spec.per_model_accuracy)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, 1])))

    shared_event = rng.random(n) < spec.correlation
    shared_u = rng.random(n)
    shared_e = rng.random(n)
    indep_u = rng.random((m, n))
    indep_e = rng.random((m, n))
    u = np.where(shared_event[None, :], shared_u[None, :], indep_u)
    e = np.where(shared_event[None, :], shared_e[None, :], indep_e)

    correct = u < accs[:, None]
    cum = _error_class_table(spec)
    wrong_choice = (e[..., None] > cum[labels][None, :, :]).sum(axis=2)  # (M, N) in [0, K-2]
    wrong_classes = np.array([[c for c in range(k) if c != t] for t in range(k)])
    predicted = np.where(correct, labels[None, :], wrong_classes[labels[None, :].repeat(m, 0), wrong_choice])

    # Emit Dirichlet draws concentrated on the predicted class, grouped by
    # class for vectorized sampling; re-draw rows whose argmax strayed.
    probs = np.empty((m, n, k))
    flat_pred = predicted.reshape(-1)
    flat_probs = probs.reshape(-1, k)
    for c in range(k):
        cells = np.nonzero(flat_pred == c)[0]
        if cells.size == 0:
            continue
        alpha = np.ones(k)
        alpha[c] = spec.sharpness
        draws = rng.dirichlet(alpha, size=cells.size)
        for _ in range(_MAX_EMISSION_RETRIES):
            bad = np.nonzero(np.argmax(draws, axis=1) != c)[0]
            if bad.size == 0:
                break
            draws[bad] = rng.dirichlet(alpha, size=bad.size)
        else:
            bad = np.nonzero(np.argmax(draws, axis=1) != c)[0]
            fallback = np.full(k, 1.0 / (spec.sharpness + k - 1))
            fallback[c] = spec.sharpness / (spec.sharpness + k - 1)
            draws[bad] = fallback
        flat_probs[cells] = draws

    model_ids = tuple(f"m{i:03d}" for i in range(m))
    sample_ids = tuple(f"s{i:05d}" for i in range(n))
    return PredictionPanel(models=model_ids, samples=sample_ids, probs=probs, labels=labels)


# --- toy two-task experiment -------------------------------------------------


@dataclass(frozen=True)
class ToyMultiTaskSpec:
    """Linear shared trunk with two affine heads on synthetic features.

    Both task labels derive from the same latent features, so the
    auxiliary head can inform the trunk. noise is the relative amplitude
    of the feature corruption.
    """

    shared_dim: int = 8
    task3_classes: int = 3
    task2_classes: int = 3
    lambdas: tuple[float, ...] = (0.0, 0.01, 0.1, 1.0)
    n_samples: int = 600
    noise: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.shared_dim < 1 or self.n_samples < 10:
            raise DataError("need shared_dim >= 1 and n_samples >= 10")
        if self.task3_classes < 2 or self.task2_classes < 2:
            raise DataError("both heads need >= 2 classes")
        if not self.lambdas:
            raise DataError("empty lambda sweep")


@dataclass(frozen=True)
class ToyParams:
    trunk_w: np.ndarray
    trunk_b: np.ndarray
    head3_w: np.ndarray
    head3_b: np.ndarray
    head2_w: np.ndarray
    head2_b: np.ndarray


@dataclass(frozen=True)
class ToyEpochRecord:
    epoch: int
    lr: float
    loss3: float
    loss2: float
    loss_total: float
    val_qwk: float


@dataclass(frozen=True)
class ToyRunResult:
    lam: float
    history: tuple[ToyEpochRecord, ...]
    params: ToyParams
    val_qwk: float  # final epoch, main task


def _toy_data(spec: ToyMultiTaskSpec):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, 2])))
    d = spec.shared_dim
    z = rng.standard_normal((spec.n_samples, d))
    map3 = rng.standard_normal((d, spec.task3_classes))
    map2 = rng.standard_normal((d, spec.task2_classes))
    y3 = np.argmax(z @ map3, axis=1).astype(np.int64)
    y2 = np.argmax(z @ map2, axis=1).astype(np.int64)
    x = z + spec.noise * rng.standard_normal(z.shape)
    n_val = max(1, spec.n_samples // 5)
    return (x[n_val:], y3[n_val:], y2[n_val:]), (x[:n_val], y3[:n_val], y2[:n_val])


def _toy_init(spec: ToyMultiTaskSpec, seed: int) -> ToyParams:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 3])))
    d = spec.shared_dim

    def xavier(fan_in, fan_out):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-lim, lim, size=(fan_in, fan_out))

    return ToyParams(
        trunk_w=xavier(d, d),
        trunk_b=np.zeros(d),
        head3_w=xavier(d, spec.task3_classes),
        head3_b=np.zeros(spec.task3_classes),
        head2_w=xavier(d, spec.task2_classes),
        head2_b=np.zeros(spec.task2_classes),
    )


def _shared_loss(xb, yb, trunk_w, trunk_b, head_w, head_b, weights) -> tuple[LossValue, np.ndarray, np.ndarray]:
    """Weighted CE of one head; gradient expressed in trunk coordinates.

    Returns (loss in shared space, head weight grad, head bias grad).
    """
    f = xb @ trunk_w + trunk_b
    logits = f @ head_w + head_b
    per_logit = weighted_ce(logits, yb, weights)
    dz = per_logit.gradient
    dhead_w = f.T @ dz
    dhead_b = dz.sum(axis=0)
    df = dz @ head_w.T
    dtrunk_w = xb.T @ df
    dtrunk_b = df.sum(axis=0)
    shared = LossValue(
        value=per_logit.value,
        gradient=np.concatenate([dtrunk_w.ravel(), dtrunk_b]),
    )
    return shared, dhead_w, dhead_b


def toy_multitask_run(
    spec: ToyMultiTaskSpec,
    train_cfg: TrainConfig | None = None,
    single_task: bool = False,
) -> list[ToyRunResult]:
    """Train the shared trunk over the lambda sweep.

    With single_task=True the auxiliary head is never evaluated or
    updated and the sweep collapses to one run; a lam = 0 run follows the
    exact same parameter trajectory bit for bit (the shuffle stream does
    not depend on which losses are computed).
    """
    cfg = train_cfg or TrainConfig()
    (x_tr, y3_tr, y2_tr), (x_va, y3_va, _) = _toy_data(spec)
    w3 = ClassWeights(np.ones(spec.task3_classes))
    w2 = ClassWeights(np.ones(spec.task2_classes))
    d = spec.shared_dim

    results = []
    lambdas = (0.0,) if single_task else tuple(spec.lambdas)
    for lam in lambdas:
        mt = MultiTaskConfig(lam=lam, task2_weights=w2)
        p = _toy_init(spec, cfg.seed)
        trunk_w, trunk_b = p.trunk_w.copy(), p.trunk_b.copy()
        head3_w, head3_b = p.head3_w.copy(), p.head3_b.copy()
        head2_w, head2_b = p.head2_w.copy(), p.head2_b.copy()

        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, 4])))
        history = []
        for epoch in range(cfg.epochs):
            lr = cfg.lr_at(epoch)
            order = rng.permutation(x_tr.shape[0])
            sum3 = sum2 = sum_total = 0.0
            n_batches = 0
            for start in range(0, order.size, cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                xb = x_tr[idx]
                loss3, dh3w, dh3b = _shared_loss(
                    xb, y3_tr[idx], trunk_w, trunk_b, head3_w, head3_b, w3
                )
                if single_task:
                    total = loss3
                    loss2_value = 0.0
                else:
                    loss2, dh2w, dh2b = _shared_loss(
                        xb, y2_tr[idx], trunk_w, trunk_b, head2_w, head2_b, w2
                    )
                    total = multitask_loss(loss3, loss2, mt)
                    loss2_value = loss2.value
                    if lam != 0.0:
                        head2_w -= lr * lam * dh2w
                        head2_b -= lr * lam * dh2b
                g = total.gradient
                trunk_w -= lr * g[: d * d].reshape(d, d)
                trunk_b -= lr * g[d * d :]
                head3_w -= lr * dh3w
                head3_b -= lr * dh3b
                sum3 += loss3.value
                sum2 += loss2_value
                sum_total += total.value
                n_batches += 1

            f_va = x_va @ trunk_w + trunk_b
            pred = np.argmax(softmax(f_va @ head3_w + head3_b), axis=1)
            val_qwk = qwk(confusion_matrix(y3_va, pred, spec.task3_classes))
            history.append(
                ToyEpochRecord(
                    epoch=epoch,
                    lr=lr,
                    loss3=sum3 / n_batches,
                    loss2=sum2 / n_batches,
                    loss_total=sum_total / n_batches,
                    val_qwk=val_qwk,
                )
            )
        results.append(
            ToyRunResult(
                lam=lam,
                history=tuple(history),
                params=ToyParams(trunk_w, trunk_b, head3_w, head3_b, head2_w, head2_b),
                val_qwk=history[-1].val_qwk,
            )
        )
    return results
