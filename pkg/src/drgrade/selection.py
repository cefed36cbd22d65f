"""Top-n model selection across resplits from validation scores."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DataError, PoolTooSmall


def architecture_of(model_id: str) -> str:
    """Family prefix of a model id: the part before the first '-'."""
    return model_id.split("-", 1)[0]


@dataclass(frozen=True)
class CandidateEntry:
    model_id: str
    resplit: str
    qwk: float
    auc: float

    def __post_init__(self):
        if not (np.isfinite(self.qwk) and np.isfinite(self.auc)):
            raise DataError(f"non-finite score for {self.model_id!r}/{self.resplit!r}")

    @property
    def architecture(self) -> str:
        return architecture_of(self.model_id)


@dataclass(frozen=True)
class CandidatePool:
    entries: tuple[CandidateEntry, ...]

    def __post_init__(self):
        keys = [(e.model_id, e.resplit) for e in self.entries]
        if len(set(keys)) != len(keys):
            raise DataError("duplicate (model_id, resplit) in pool")

    def __len__(self) -> int:
        return len(self.entries)


def _rank_key(e: CandidateEntry):
    return (-e.qwk, -e.auc, e.model_id, e.resplit)


def select_top(pool: CandidatePool, n: int) -> list[CandidateEntry]:
    """The n best entries under the challenge order (QWK desc, AUC desc,
    then ids), best first."""
    if n > len(pool):
        raise PoolTooSmall(f"asked for {n} of {len(pool)} candidates")
    return sorted(pool.entries, key=_rank_key)[:n]


def selection_counts(selected) -> dict[tuple[str, str], int]:
    """(architecture, resplit) -> number of selected models."""
    return dict(Counter((e.architecture, e.resplit) for e in selected))
