"""Label-fusion network: input -> hidden rectifier layer -> softmax output.

Training is plain SGD with per-epoch exponential learning-rate decay and
weighted cross entropy; the snapshot with the best validation QWK wins
(ties go to the earlier epoch). The inner loop runs on the compiled
kernel when available (see kernels/); training is sequential by design so
results are reproducible bit for bit on a fixed backend.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import PredictionPanel
from .errors import (
    CorruptModelFile,
    DataError,
    DegenerateDistribution,
    DimensionMismatch,
    EmptySubset,
    ShapeMismatch,
    SingleClassTruth,
    WidthMismatch,
)
from .losses import ClassWeights, inverse_frequency_weights, softmax
from .metrics import confusion_matrix, ovo_macro_auc, qwk

MODEL_SCHEMA_VERSION = 1

# Scores recorded when the validation subset cannot be scored (degenerate
# truth/prediction distribution); worst possible so such an epoch never
# wins checkpoint selection.
WORST_QWK = -1.0
WORST_AUC = 0.0


def _ro(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FusionNet:
    w1: np.ndarray  # (in_dim, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden, k)
    b2: np.ndarray  # (k,)

    def __post_init__(self):
        w1, b1, w2, b2 = (np.asarray(p, dtype=np.float64) for p in (self.w1, self.b1, self.w2, self.b2))
        if w1.ndim != 2 or w2.ndim != 2 or b1.shape != (w1.shape[1],) or b2.shape != (w2.shape[1],):
            raise DimensionMismatch(
                f"inconsistent parameter shapes {w1.shape} {b1.shape} {w2.shape} {b2.shape}"
            )
        if w1.shape[1] != w2.shape[0]:
            raise DimensionMismatch(f"hidden width {w1.shape[1]} vs {w2.shape[0]}")
        for p in (w1, b1, w2, b2):
            if not np.all(np.isfinite(p)):
                raise DataError("non-finite parameter")
        object.__setattr__(self, "w1", _ro(w1))
        object.__setattr__(self, "b1", _ro(b1))
        object.__setattr__(self, "w2", _ro(w2))
        object.__setattr__(self, "b2", _ro(b2))

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.w1.shape[0], self.w1.shape[1], self.w2.shape[1])

    @property
    def n_params(self) -> int:
        return self.w1.size + self.b1.size + self.w2.size + self.b2.size


def init_net(dims: tuple[int, int, int], seed: int) -> FusionNet:
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases."""
    in_dim, hidden, k = dims
    if min(in_dim, hidden, k) < 1:
        raise DimensionMismatch(f"bad dims {dims}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed)])))
    lim1 = np.sqrt(6.0 / (in_dim + hidden))
    lim2 = np.sqrt(6.0 / (hidden + k))
    return FusionNet(
        w1=rng.uniform(-lim1, lim1, size=(in_dim, hidden)),
        b1=np.zeros(hidden),
        w2=rng.uniform(-lim2, lim2, size=(hidden, k)),
        b2=np.zeros(k),
    )


@dataclass(frozen=True)
class ForwardPass:
    """Intermediates kept for the backward pass."""

    inputs: np.ndarray  # (B, in_dim)
    pre_hidden: np.ndarray  # (B, hidden)
    hidden: np.ndarray  # (B, hidden)
    output: np.ndarray  # (B, k) probabilities


def forward(net: FusionNet, x) -> ForwardPass:
    """Affine -> rectifier -> affine -> softmax; accepts a single row or
    a batch of rows."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != net.dims[0]:
        raise WidthMismatch(f"input width {x.shape[1]}, net expects {net.dims[0]}")
    a = x @ net.w1 + net.b1
    h = np.maximum(a, 0.0)
    p = softmax(h @ net.w2 + net.b2)
    return ForwardPass(inputs=x, pre_hidden=a, hidden=h, output=p)


def predict_probs(net: FusionNet, x) -> np.ndarray:
    return forward(net, x).output


@dataclass(frozen=True)
class ParamGrads:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.w1.ravel(), self.b1, self.w2.ravel(), self.b2])


def backward(net: FusionNet, fp: ForwardPass, targets, class_weights: ClassWeights) -> ParamGrads:
    """Exact gradient of the weighted-mean cross entropy w.r.t. all
    parameters, from a matching forward pass."""
    y = np.atleast_1d(np.asarray(targets, dtype=np.int64))
    b = fp.inputs.shape[0]
    if y.shape != (b,):
        raise ShapeMismatch(f"{y.shape[0]} targets for batch of {b}")
    if class_weights.k != net.dims[2]:
        raise ShapeMismatch(f"{class_weights.k} class weights for {net.dims[2]} outputs")
    rows = np.arange(b)
    wy = class_weights.weights[y]
    wsum = wy.sum()
    dz = fp.output * (wy / wsum)[:, None]
    dz[rows, y] -= wy / wsum
    dw2 = fp.hidden.T @ dz
    db2 = dz.sum(axis=0)
    dh = dz @ net.w2.T
    dh[fp.pre_hidden <= 0.0] = 0.0
    dw1 = fp.inputs.T @ dh
    db1 = dh.sum(axis=0)
    return ParamGrads(w1=dw1, b1=db1, w2=dw2, b2=db2)


@dataclass(frozen=True)
class TrainConfig:
    initial_lr: float = 0.001
    decay: float = 0.9
    epochs: int = 20
    batch_size: int = 25
    seed: int = 0
    hidden_dim: int = 32
    class_weights: ClassWeights | None = None  # None: inverse-frequency of train labels

    def __post_init__(self):
        if self.initial_lr <= 0 or not (0 < self.decay <= 1):
            raise DataError(f"bad lr/decay {self.initial_lr}/{self.decay}")
        if self.epochs < 1 or self.batch_size < 1 or self.hidden_dim < 1:
            raise DataError("epochs, batch_size and hidden_dim must be >= 1")

    def lr_at(self, epoch: int) -> float:
        """Learning rate for 0-based epoch index: initial_lr * decay^t."""
        return self.initial_lr * self.decay**epoch


@dataclass(frozen=True)
class Checkpoint:
    epoch: int  # 0-based epoch index
    net: FusionNet
    val_qwk: float
    val_auc: float


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    val_qwk: float
    val_auc: float


@dataclass(frozen=True)
class TrainResult:
    best: Checkpoint
    history: tuple[EpochRecord, ...]


def panel_features(panel: PredictionPanel) -> np.ndarray:
    """Concatenated per-model probabilities in canonical model order,
    shape (N, M*K)."""
    m, n, k = panel.probs.shape
    return np.ascontiguousarray(panel.probs.transpose(1, 0, 2).reshape(n, m * k))


def _val_scores(net_params, x_val, y_val):
    w1, b1, w2, b2 = net_params
    a = np.maximum(x_val @ w1 + b1, 0.0)
    p = softmax(a @ w2 + b2)
    pred = np.argmax(p, axis=1)
    k = p.shape[1]
    try:
        q = qwk(confusion_matrix(y_val, pred, k))
    except DegenerateDistribution:
        q = WORST_QWK
    try:
        auc = ovo_macro_auc(p, y_val, k).value
    except SingleClassTruth:
        auc = WORST_AUC
    return q, auc


def train(panel: PredictionPanel, train_samples, val_samples, cfg: TrainConfig) -> TrainResult:
    """Train a fusion net on the panel's train subset, checkpointing on
    validation QWK.

    Samples are shuffled each epoch by a seeded PRNG; minibatches of
    cfg.batch_size (last one may be smaller); lr decays per epoch. The
    returned checkpoint is the earliest epoch achieving the maximum
    validation QWK.
    """
    if panel.labels is None:
        raise DataError("training needs a labeled panel")
    index = {s: i for i, s in enumerate(panel.samples)}
    try:
        tr = np.array(sorted(index[s] for s in train_samples), dtype=np.int64)
        va = np.array(sorted(index[s] for s in val_samples), dtype=np.int64)
    except KeyError as e:
        raise DataError(f"sample {e.args[0]!r} not in panel") from None
    if tr.size == 0 or va.size == 0:
        raise EmptySubset(f"train={tr.size} val={va.size} samples")

    x = panel_features(panel)
    y = panel.labels.astype(np.int64)
    x_tr, y_tr = x[tr], y[tr]
    x_va, y_va = x[va], y[va]

    k = panel.k
    weights = cfg.class_weights
    if weights is None:
        counts = np.bincount(y_tr, minlength=k)
        if np.any(counts == 0):
            weights = ClassWeights(np.ones(k))
        else:
            weights = inverse_frequency_weights(counts)
    if weights.k != k:
        raise ShapeMismatch(f"{weights.k} class weights for {k} classes")

    net0 = init_net((x.shape[1], cfg.hidden_dim, k), cfg.seed)
    w1 = net0.w1.copy()
    b1 = net0.b1.copy()
    w2 = net0.w2.copy()
    b2 = net0.b2.copy()
    cw = np.ascontiguousarray(weights.weights)

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, 1])))
    history = []
    best: Checkpoint | None = None
    for epoch in range(cfg.epochs):
        lr = cfg.lr_at(epoch)
        order = rng.permutation(tr.size).astype(np.int64)
        nll_sum, weight_sum = kernels.sgd_epoch(
            w1, b1, w2, b2, x_tr, y_tr, cw, order, cfg.batch_size, lr
        )
        val_qwk, val_auc = _val_scores((w1, b1, w2, b2), x_va, y_va)
        history.append(
            EpochRecord(
                epoch=epoch,
                lr=lr,
                train_loss=nll_sum / weight_sum,
                val_qwk=val_qwk,
                val_auc=val_auc,
            )
        )
        if best is None or val_qwk > best.val_qwk:
            best = Checkpoint(
                epoch=epoch,
                net=FusionNet(w1.copy(), b1.copy(), w2.copy(), b2.copy()),
                val_qwk=val_qwk,
                val_auc=val_auc,
            )
    return TrainResult(best=best, history=tuple(history))


def serialize(net: FusionNet, metadata: dict | None = None) -> str:
    """JSON document with row-major weights at full round-trip precision."""
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "dims": list(net.dims),
        "hidden_activation": "relu",
        "output_activation": "softmax",
        "w1": net.w1.tolist(),
        "b1": net.b1.tolist(),
        "w2": net.w2.tolist(),
        "b2": net.b2.tolist(),
        "metadata": metadata or {},
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def deserialize(text: str) -> FusionNet:
    try:
        doc = json.loads(text)
        version = doc["schema_version"]
        dims = tuple(doc["dims"])
        net = FusionNet(
            w1=np.array(doc["w1"], dtype=np.float64),
            b1=np.array(doc["b1"], dtype=np.float64),
            w2=np.array(doc["w2"], dtype=np.float64),
            b2=np.array(doc["b2"], dtype=np.float64),
        )
    except DimensionMismatch:
        raise
    except Exception as e:
        raise CorruptModelFile(f"unreadable model file: {e}") from None
    if version != MODEL_SCHEMA_VERSION:
        raise CorruptModelFile(f"unsupported schema version {version!r}")
    if net.dims != dims:
        raise DimensionMismatch(f"declared dims {dims} but arrays give {net.dims}")
    return net


def load_model(path) -> FusionNet:
    with open(path, "r", encoding="utf-8") as f:
        return deserialize(f.read())


def save_model(path, net: FusionNet, metadata: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize(net, metadata))
        f.write("\n")
