"""CSV file contracts.

Every file is UTF-8 with '\n' line endings. Lines starting with '#' are
provenance comments (seed, config hash) and are skipped on read; naive
CSV readers that drop comments stay compatible. Floats in data files use
the shortest round-trip representation; reports format to 4 decimals.

  predictions: sample_id,model_id,true_label,p_0..p_{K-1}
  labels:      sample_id,label
  splits:      sample_id,resplit,subset        (subset in train/val/test)
  metrics:     model_id,qwk,auc
  pool:        model_id,resplit,qwk,auc
  history:     epoch,lr,train_loss,val_qwk,val_auc
"""

from __future__ import annotations

import csv
import io
import os

import numpy as np

from .core import (
    RENORM_MAX,
    RENORM_TOL,
    ModelScore,
    PredictionPanel,
    PredictionRecord,
    assemble_panel,
)
from .errors import DataError
from .fusion import EpochRecord
from .selection import CandidateEntry, CandidatePool, selection_counts
from .splitting import SUBSET_NAMES


def fmt(x: float) -> str:
    """Shortest representation that round-trips the double exactly."""
    return repr(float(x))


def atomic_write(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    os.replace(tmp, path)


def _render(comments, header, rows) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_rows(path, expected_header) -> list[list[str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        lines = [ln for ln in f if not ln.startswith("#") and ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")
    reader = csv.reader(lines)
    header = next(reader)
    if header[: len(expected_header)] != list(expected_header):
        raise DataError(f"{path}: header {header!r}, expected {list(expected_header)!r}")
    return [row for row in reader], header


# --- predictions -------------------------------------------------------------


def prediction_header(k: int) -> list[str]:
    return ["sample_id", "model_id", "true_label"] + [f"p_{i}" for i in range(k)]


def write_predictions(path, panel: PredictionPanel, comments=()) -> None:
    rows = []
    for ni, sid in enumerate(panel.samples):
        label = "" if panel.labels is None else str(int(panel.labels[ni]))
        for mi, mid in enumerate(panel.models):
            rows.append([sid, mid, label] + [fmt(p) for p in panel.probs[mi, ni]])
    atomic_write(path, _render(comments, prediction_header(panel.k), rows))


def read_predictions(path) -> tuple[PredictionPanel, list[str]]:
    """Parse and validate a predictions file.

    Returns the assembled panel plus renormalization warnings: one entry
    per row whose probabilities summed within the repairable band but
    outside the exact tolerance.
    """
    rows, header = _read_rows(path, ("sample_id", "model_id", "true_label"))
    k = len(header) - 3
    if k < 2 or header[3:] != [f"p_{i}" for i in range(k)]:
        raise DataError(f"{path}: bad probability columns {header[3:]!r}")
    records = []
    warnings = []
    for row in rows:
        if len(row) != 3 + k:
            raise DataError(f"{path}: row has {len(row)} fields, expected {3 + k}: {row!r}")
        sid, mid, label = row[0], row[1], row[2]
        try:
            probs = np.array([float(v) for v in row[3:]])
        except ValueError as e:
            raise DataError(f"{path}: {e} in row {row!r}") from None
        dev = abs(float(probs.sum()) - 1.0)
        if RENORM_TOL < dev <= RENORM_MAX:
            warnings.append(f"renormalized sample={sid} model={mid} deviation={dev:.2e}")
        records.append(
            PredictionRecord(
                sample_id=sid,
                model_id=mid,
                probs=probs,
                true_label=None if label == "" else int(label),
            )
        )
    return assemble_panel(records), warnings


# --- labels -------------------------------------------------------------------


def write_labels(path, sample_ids, labels, comments=()) -> None:
    rows = [[sid, str(int(v))] for sid, v in zip(sample_ids, labels)]
    atomic_write(path, _render(comments, ["sample_id", "label"], rows))


def read_labels(path) -> tuple[list[str], np.ndarray]:
    rows, _ = _read_rows(path, ("sample_id", "label"))
    ids = [r[0] for r in rows]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate sample ids")
    try:
        labels = np.array([int(r[1]) for r in rows], dtype=np.int64)
    except ValueError as e:
        raise DataError(f"{path}: {e}") from None
    return ids, labels


# --- splits -------------------------------------------------------------------


def write_splits(path, sample_ids, assignments, comments=()) -> None:
    rows = []
    for a in assignments:
        for sid, tag in zip(sample_ids, a.tags):
            rows.append([sid, a.resplit_name, SUBSET_NAMES[tag]])
    atomic_write(path, _render(comments, ["sample_id", "resplit", "subset"], rows))


def read_splits(path) -> dict[str, dict[str, str]]:
    """resplit name -> {sample_id: subset name}."""
    rows, _ = _read_rows(path, ("sample_id", "resplit", "subset"))
    out: dict[str, dict[str, str]] = {}
    for sid, resplit, subset in rows:
        if subset not in SUBSET_NAMES:
            raise DataError(f"{path}: unknown subset {subset!r}")
        bucket = out.setdefault(resplit, {})
        if sid in bucket:
            raise DataError(f"{path}: duplicate row for sample {sid!r} resplit {resplit!r}")
        bucket[sid] = subset
    return out


def subset_sample_ids(split_map: dict[str, str], subset: str) -> list[str]:
    return sorted(sid for sid, s in split_map.items() if s == subset)


# --- metrics ------------------------------------------------------------------


def write_metrics(path, scores, comments=()) -> None:
    rows = [[s.model_id, fmt(s.qwk), fmt(s.auc)] for s in scores]
    atomic_write(path, _render(comments, ["model_id", "qwk", "auc"], rows))


def read_metrics(path) -> list[ModelScore]:
    rows, _ = _read_rows(path, ("model_id", "qwk", "auc"))
    return [ModelScore(model_id=r[0], qwk=float(r[1]), auc=float(r[2])) for r in rows]


# --- training history ---------------------------------------------------------


def write_history(path, history, comments=()) -> None:
    rows = [
        [str(h.epoch), fmt(h.lr), fmt(h.train_loss), fmt(h.val_qwk), fmt(h.val_auc)]
        for h in history
    ]
    atomic_write(path, _render(comments, ["epoch", "lr", "train_loss", "val_qwk", "val_auc"], rows))


def read_history(path) -> list[EpochRecord]:
    rows, _ = _read_rows(path, ("epoch", "lr", "train_loss", "val_qwk", "val_auc"))
    return [
        EpochRecord(
            epoch=int(r[0]),
            lr=float(r[1]),
            train_loss=float(r[2]),
            val_qwk=float(r[3]),
            val_auc=float(r[4]),
        )
        for r in rows
    ]


# --- candidate pool and selection report ---------------------------------------


def read_pool(path) -> CandidatePool:
    rows, _ = _read_rows(path, ("model_id", "resplit", "qwk", "auc"))
    return CandidatePool(
        entries=tuple(
            CandidateEntry(model_id=r[0], resplit=r[1], qwk=float(r[2]), auc=float(r[3]))
            for r in rows
        )
    )


def write_pool(path, pool: CandidatePool, comments=()) -> None:
    rows = [[e.model_id, e.resplit, fmt(e.qwk), fmt(e.auc)] for e in pool.entries]
    atomic_write(path, _render(comments, ["model_id", "resplit", "qwk", "auc"], rows))


def write_selection_report(path, pool: CandidatePool, selected, comments=()) -> None:
    """Full ranked pool with a selected flag; the architecture x resplit
    counts of the selected set ride along as comment lines."""
    counts = selection_counts(selected)
    count_comments = [
        f"selected architecture={arch} resplit={resplit} count={c}"
        for (arch, resplit), c in sorted(counts.items())
    ]
    chosen = {(e.model_id, e.resplit) for e in selected}
    from .selection import _rank_key  # stable ranking shared with select_top

    ranked = sorted(pool.entries, key=_rank_key)
    rows = [
        [
            str(i + 1),
            e.model_id,
            e.resplit,
            e.architecture,
            fmt(e.qwk),
            fmt(e.auc),
            "1" if (e.model_id, e.resplit) in chosen else "0",
        ]
        for i, e in enumerate(ranked)
    ]
    header = ["rank", "model_id", "resplit", "architecture", "qwk", "auc", "selected"]
    atomic_write(path, _render(list(comments) + count_comments, header, rows))
