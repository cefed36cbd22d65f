"""Stratified train/val/test splitting with a fixed test subset.

The test subset is drawn once per spec (master seed); each resplit then
re-partitions only the remaining samples into train/val, so the test tag
set is identical across resplits. All integerization uses largest-
remainder apportionment, which keeps every (class, subset) cell within
one sample of its exact proportional count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, EmptyClass, IncompleteAssignment, InfeasibleFractions

TRAIN, VAL, TEST = 0, 1, 2
SUBSET_NAMES = ("train", "val", "test")

# PRNG recorded in output metadata so runs are auditable.
PRNG_NAME = "numpy-pcg64"


def _letters(n: int) -> tuple[str, ...]:
    base = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    return tuple(base[i] if i < 26 else f"R{i}" for i in range(n))


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple[float, float, float] = (0.84, 0.08, 0.08)
    master_seed: int = 0
    resplit_seeds: tuple[int, ...] = (1, 2, 3)
    resplit_names: tuple[str, ...] | None = None

    def __post_init__(self):
        f = tuple(float(x) for x in self.fractions)
        if len(f) != 3 or any(x <= 0 for x in f):
            raise DataError(f"need three positive fractions, got {f}")
        if abs(sum(f) - 1.0) > 1e-9:
            raise DataError(f"fractions sum to {sum(f)!r}, not 1")
        object.__setattr__(self, "fractions", f)
        seeds = tuple(int(s) for s in self.resplit_seeds)
        if not seeds:
            raise DataError("need at least one resplit")
        object.__setattr__(self, "resplit_seeds", seeds)
        names = self.resplit_names or _letters(len(seeds))
        if len(names) != len(seeds) or len(set(names)) != len(names):
            raise DataError("resplit names must be unique, one per seed")
        object.__setattr__(self, "resplit_names", tuple(names))


@dataclass(frozen=True)
class SplitAssignment:
    """Per-sample subset tags for one resplit (TRAIN/VAL/TEST codes)."""

    resplit_name: str
    tags: np.ndarray  # (N,) int8

    def __post_init__(self):
        t = np.asarray(self.tags, dtype=np.int8)
        if t.ndim != 1 or not np.all((t >= TRAIN) & (t <= TEST)):
            raise DataError("tags must be TRAIN/VAL/TEST codes")
        t.setflags(write=False)
        object.__setattr__(self, "tags", t)

    def indices(self, subset: int) -> np.ndarray:
        return np.nonzero(self.tags == subset)[0]


def _snap(q: np.ndarray) -> np.ndarray:
    """Collapse float noise around mathematically integer quotas."""
    r = np.round(q)
    return np.where(np.abs(q - r) < 1e-9 * np.maximum(1.0, np.abs(q)), r, q)


def largest_remainder(quotas, total: int) -> np.ndarray:
    """Integer counts summing to `total`, each within one of its quota.

    Requires |total - sum(quotas)| < 1. Leftover seats go to the largest
    fractional remainders; remainder ties break on the lowest index.
    """
    q = _snap(np.asarray(quotas, dtype=np.float64))
    if abs(total - q.sum()) >= 1.0 + 1e-9:
        raise DataError(f"house size {total} incompatible with quotas summing to {q.sum()!r}")
    floors = np.floor(q).astype(np.int64)
    seats = int(total - floors.sum())
    if seats < 0 or seats > len(q):
        raise DataError(f"apportionment needs {seats} extra seats for {len(q)} entries")
    counts = floors.copy()
    if seats:
        order = np.lexsort((np.arange(len(q)), -(q - floors)))
        counts[order[:seats]] += 1
    return counts


def apportion_cells(class_sizes, fractions) -> np.ndarray:
    """Per (class, subset) counts, every cell at floor or ceil of its
    exact quota fraction * class_size.

    Subset totals are apportioned over the whole dataset first; the test
    column is then apportioned per class (it must stay fixed across
    resplits), and each class's remaining samples are completed with a
    train/val choice that keeps both cells within one of their quotas.
    The val total matches the subset total whenever the per-cell bounds
    allow it; leftover flexible classes take val seats by largest val
    remainder, ties to the lowest class index. Returns (K, 3) counts in
    TRAIN/VAL/TEST column order.
    """
    sizes = np.asarray(class_sizes, dtype=np.int64)
    n = int(sizes.sum())
    totals = largest_remainder(np.asarray(fractions, dtype=np.float64) * n, n)

    f_train, f_val, f_test = fractions
    test = largest_remainder(f_test * sizes, int(totals[TEST]))

    q_train = _snap(f_train * sizes)
    q_val = _snap(f_val * sizes)
    fa = np.floor(q_train).astype(np.int64)
    fb = np.floor(q_val).astype(np.int64)
    frac_a = q_train - fa
    frac_b = q_val - fb

    rest = sizes - test
    r = rest - fa - fb  # each class has 0, 1 or 2 spare units
    if np.any((r < 0) | (r > 2)):
        raise DataError("apportionment invariant violated")
    val = fb.copy()
    val[r == 2] += 1  # both cells go up; quotas guarantee frac_b > 0 there

    flex = np.nonzero(r == 1)[0]
    # A flexible class with an integer train quota must put its spare
    # unit into val (and vice versa) to keep both cells within one.
    forced_up = flex[(frac_a[flex] == 0.0) & (frac_b[flex] > 0.0)]
    val[forced_up] += 1
    free = flex[(frac_a[flex] > 0.0) & (frac_b[flex] > 0.0)]
    seats = min(max(int(totals[VAL]) - int(val.sum()), 0), free.size)
    if seats:
        order = np.lexsort((free, -frac_b[free]))
        val[free[order[:seats]]] += 1

    train = rest - val
    return np.stack([train, val, test], axis=1)


def _class_indices(labels: np.ndarray, k: int) -> list[np.ndarray]:
    per_class = [np.nonzero(labels == c)[0] for c in range(k)]
    for c, idx in enumerate(per_class):
        if idx.size == 0:
            raise EmptyClass(f"class {c} has no samples")
    return per_class


def stratified_split(labels, spec: SplitSpec) -> list[SplitAssignment]:
    """Split samples into train/val/test per resplit.

    Per-class counts come from apportion_cells (so every cell stays
    within one sample of its exact proportional count); test members are
    drawn per class with the master seed and stay fixed, and each resplit
    seed only reshuffles the remaining samples between train and val.
    Identical inputs give identical assignments on any platform (PCG64
    streams).
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.size
    if n == 0:
        raise DataError("no samples")
    k = int(labels.max()) + 1
    per_class = _class_indices(labels, k)
    class_sizes = np.array([idx.size for idx in per_class], dtype=np.int64)

    cells = apportion_cells(class_sizes, spec.fractions)
    if np.any(cells.sum(axis=0) == 0):
        raise InfeasibleFractions(
            f"subset totals {tuple(int(t) for t in cells.sum(axis=0))} include an empty subset"
        )

    # Fixed test subset, drawn per class with the master seed.
    master = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.master_seed])))
    test_sets: list[np.ndarray] = []
    rest_sets: list[np.ndarray] = []
    for c in range(k):
        perm = per_class[c][master.permutation(per_class[c].size)]
        t = int(cells[c, TEST])
        test_sets.append(perm[:t])
        rest_sets.append(perm[t:])

    assignments = []
    for name, seed in zip(spec.resplit_names, spec.resplit_seeds):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([spec.master_seed, seed]))
        )
        tags = np.empty(n, dtype=np.int8)
        tags.fill(TRAIN)
        for c in range(k):
            tags[test_sets[c]] = TEST
            rest = rest_sets[c]
            perm = rest[rng.permutation(rest.size)]
            tags[perm[: int(cells[c, VAL])]] = VAL
        assignments.append(SplitAssignment(resplit_name=name, tags=tags))
    return assignments


@dataclass(frozen=True)
class StratificationReport:
    """Per (class, subset) deviation from the exact proportional count."""

    deviations: np.ndarray  # (K, 3) float64
    passed: bool
    counts: np.ndarray = field(repr=False, default=None)  # (K, 3) int64


def verify_stratification(labels, assignment: SplitAssignment, spec: SplitSpec) -> StratificationReport:
    """Check |actual count - fraction * class size| < 1 for every cell."""
    labels = np.asarray(labels, dtype=np.int64)
    tags = assignment.tags
    if tags.shape != labels.shape:
        raise IncompleteAssignment(
            f"assignment covers {tags.shape[0]} samples, labels have {labels.shape[0]}"
        )
    k = int(labels.max()) + 1
    counts = np.zeros((k, 3), dtype=np.int64)
    np.add.at(counts, (labels, tags.astype(np.int64)), 1)
    class_sizes = counts.sum(axis=1, keepdims=True).astype(np.float64)
    exact = class_sizes * np.asarray(spec.fractions)
    dev = np.abs(counts - exact)
    return StratificationReport(deviations=dev, passed=bool(np.all(dev < 1.0)), counts=counts)
