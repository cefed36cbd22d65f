"""Domain types for multi-model prediction data.

A grade label is a plain integer in [0, K). A probability vector is a
read-only float64 numpy array on the K-simplex. The central object is the
PredictionPanel: a complete M models x N samples grid of probability
vectors with optional per-sample true labels. All types are immutable
after construction and every operation here is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConflictingLabel,
    DataError,
    DuplicateRecord,
    LabelOutOfRange,
    MissingCell,
    NegativeEntry,
    NonFiniteEntry,
    SumOutOfRange,
)

# Acceptance window for |sum - 1|; vectors inside RENORM_TOL get silently
# accepted, inside RENORM_MAX get renormalized, beyond that are rejected.
RENORM_TOL = 1e-6
RENORM_MAX = 1e-3

DEFAULT_CLASS_NAMES = ("Normal", "NPDR", "PDR")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def validate_label(index: int, k: int) -> int:
    if k < 2:
        raise LabelOutOfRange(f"need at least 2 classes, got K={k}")
    idx = int(index)
    if not 0 <= idx < k:
        raise LabelOutOfRange(f"label {idx} outside [0, {k})")
    return idx


def validate_prob_vector(raw, renormalize: bool = True) -> np.ndarray:
    """Validate one probability vector against the simplex contract.

    Entries must be finite and non-negative. A sum within RENORM_TOL of 1
    is accepted as-is; a deviation up to RENORM_MAX is repaired by dividing
    by the sum (exporters emit rounded decimals); anything worse is a hard
    error. Pass renormalize=False to also reject the repairable band.
    Returns a read-only float64 array.
    """
    v = np.asarray(raw, dtype=np.float64)
    if v.ndim != 1 or v.size < 2:
        raise DataError(f"probability vector must be 1-D with K >= 2, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteEntry(f"non-finite entry in {v!r}")
    if np.any(v < 0):
        raise NegativeEntry(f"negative entry in {v!r}")
    s = float(v.sum())
    dev = abs(s - 1.0)
    if dev <= RENORM_TOL:
        return _readonly(v.copy())
    if dev <= RENORM_MAX and renormalize:
        return _readonly(v / s)
    raise SumOutOfRange(f"probabilities sum to {s!r}, deviation {dev:.3e} exceeds tolerance")


@dataclass(frozen=True)
class PredictionRecord:
    """One model's probability vector for one sample."""

    sample_id: str
    model_id: str
    probs: np.ndarray
    true_label: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "probs", validate_prob_vector(self.probs))
        if self.true_label is not None:
            object.__setattr__(
                self, "true_label", validate_label(self.true_label, len(self.probs))
            )


@dataclass(frozen=True)
class ModelScore:
    """Validation or test scores attached to one model."""

    model_id: str
    qwk: float
    auc: float

    def __post_init__(self):
        if not (math.isfinite(self.qwk) and math.isfinite(self.auc)):
            raise DataError(f"non-finite score for {self.model_id!r}")


@dataclass(frozen=True)
class PredictionPanel:
    """Complete M x N grid of probability vectors.

    Model and sample order is canonical (lexicographic by id) so results
    downstream are byte-reproducible regardless of ingestion order. labels
    is either None (unlabeled panel, e.g. challenge test data) or one
    label per sample.
    """

    models: tuple[str, ...]
    samples: tuple[str, ...]
    probs: np.ndarray  # (M, N, K) float64, read-only
    labels: np.ndarray | None = None  # (N,) int64, read-only

    def __post_init__(self):
        m, n = len(self.models), len(self.samples)
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape[:2] != (m, n) or p.ndim != 3 or p.shape[2] < 2:
            raise DataError(f"probs shape {p.shape} does not match {m} models x {n} samples")
        if list(self.models) != sorted(self.models) or list(self.samples) != sorted(self.samples):
            raise DataError("panel ids must be in lexicographic order")
        if len(set(self.models)) != m or len(set(self.samples)) != n:
            raise DataError("duplicate model or sample id")
        if not np.all(np.isfinite(p)):
            raise NonFiniteEntry("non-finite probability in panel")
        if np.any(p < 0):
            raise NegativeEntry("negative probability in panel")
        dev = np.abs(p.sum(axis=2) - 1.0)
        if np.any(dev > RENORM_TOL):
            mi, ni = np.unravel_index(int(np.argmax(dev)), dev.shape)
            raise SumOutOfRange(
                f"cell (model {self.models[mi]!r}, sample {self.samples[ni]!r}) "
                f"sums off by {dev[mi, ni]:.3e}"
            )
        object.__setattr__(self, "probs", _readonly(p.copy()))
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (n,):
                raise DataError(f"labels shape {lab.shape}, expected ({n},)")
            for v in lab:
                validate_label(int(v), self.k)
            object.__setattr__(self, "labels", _readonly(lab.copy()))

    @property
    def n_models(self) -> int:
        return len(self.models)

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def k(self) -> int:
        return self.probs.shape[2]

    def column(self, sample_index: int) -> np.ndarray:
        """All models' probability vectors for one sample, shape (M, K)."""
        return self.probs[:, sample_index, :]

    def restrict(self, sample_ids) -> "PredictionPanel":
        """Sub-panel over the given sample ids (canonical order kept)."""
        wanted = set(sample_ids)
        missing = wanted - set(self.samples)
        if missing:
            raise DataError(f"unknown sample ids: {sorted(missing)[:5]}")
        idx = [i for i, s in enumerate(self.samples) if s in wanted]
        return PredictionPanel(
            models=self.models,
            samples=tuple(self.samples[i] for i in idx),
            probs=self.probs[:, idx, :],
            labels=None if self.labels is None else self.labels[idx],
        )


def assemble_panel(records) -> PredictionPanel:
    """Build a PredictionPanel from loose records.

    The panel covers the Cartesian product of observed model and sample
    ids; a missing (model, sample) cell is an error, as is the same cell
    appearing twice. True labels are attached only when every sample has
    one and records agree; a panel with no stated labels gets labels=None.
    Order-insensitive: any permutation of records yields the same panel.
    """
    records = list(records)
    if not records:
        raise DataError("no records to assemble")
    k = len(records[0].probs)
    models = sorted({r.model_id for r in records})
    samples = sorted({r.sample_id for r in records})
    m_index = {mid: i for i, mid in enumerate(models)}
    s_index = {sid: i for i, sid in enumerate(samples)}

    probs = np.full((len(models), len(samples), k), np.nan)
    labels: dict[str, int] = {}
    seen: set[tuple[str, str]] = set()
    for r in records:
        if len(r.probs) != k:
            raise DataError(
                f"record ({r.sample_id!r}, {r.model_id!r}) has {len(r.probs)} classes, expected {k}"
            )
        key = (r.sample_id, r.model_id)
        if key in seen:
            raise DuplicateRecord(f"duplicate record for sample={key[0]!r} model={key[1]!r}")
        seen.add(key)
        probs[m_index[r.model_id], s_index[r.sample_id]] = r.probs
        if r.true_label is not None:
            prev = labels.get(r.sample_id)
            if prev is not None and prev != r.true_label:
                raise ConflictingLabel(
                    f"sample {r.sample_id!r} labeled both {prev} and {r.true_label}"
                )
            labels[r.sample_id] = r.true_label

    if len(seen) != len(models) * len(samples):
        for mid in models:
            for sid in samples:
                if (sid, mid) not in seen:
                    raise MissingCell(f"model {mid!r} has no prediction for sample {sid!r}")

    full = [labels.get(s) for s in samples]
    lab = np.array(full, dtype=np.int64) if all(v is not None for v in full) else None
    return PredictionPanel(tuple(models), tuple(samples), probs, lab)
