import pytest

from drgrade.errors import DataError, PoolTooSmall
from drgrade.selection import (
    CandidateEntry,
    CandidatePool,
    architecture_of,
    select_top,
    selection_counts,
)


def _pool_25():
    """25 candidates across three resplits, five families."""
    entries = []
    families = ("resnet34", "resnet152", "densenet121", "vgg19bn", "efficientnetb0")
    i = 0
    for resplit in ("A", "B", "C"):
        for fam in families:
            for v in range(2 if resplit == "B" and fam != "resnet34" else 1):
                entries.append(
                    CandidateEntry(
                        model_id=f"{fam}-{v}",
                        resplit=resplit,
                        qwk=0.70 + 0.01 * (i % 13) + 0.001 * (i % 7),
                        auc=0.90 + 0.001 * (i % 11),
                    )
                )
                i += 1
    # pad to exactly 25
    while len(entries) < 25:
        entries.append(CandidateEntry(f"extra-{len(entries)}", "C", 0.65, 0.88))
    return CandidatePool(entries=tuple(entries[:25]))


class TestSelectTop:
    def test_25_to_16_deterministic(self):
        pool = _pool_25()
        assert len(pool) == 25
        first = select_top(pool, 16)
        second = select_top(pool, 16)
        assert first == second
        assert len(first) == 16

    def test_identity_when_n_equals_pool(self):
        pool = _pool_25()
        assert len(select_top(pool, 25)) == 25

    def test_pool_too_small(self):
        with pytest.raises(PoolTooSmall):
            select_top(_pool_25(), 26)

    def test_auc_breaks_qwk_tie(self):
        pool = CandidatePool(
            entries=(
                CandidateEntry("a", "A", 0.9, 0.80),
                CandidateEntry("b", "A", 0.9, 0.95),
            )
        )
        assert select_top(pool, 1)[0].model_id == "b"

    def test_selected_set_is_the_n_greatest(self):
        pool = _pool_25()
        selected = select_top(pool, 16)
        cut = min((e.qwk, e.auc) for e in selected)
        rest = [e for e in pool.entries if e not in selected]
        assert all((e.qwk, e.auc) <= cut for e in rest)

    def test_adding_worse_candidate_changes_nothing(self):
        pool = _pool_25()
        selected = select_top(pool, 16)
        worse = CandidateEntry("zzz-worst", "A", 0.0, 0.0)
        bigger = CandidatePool(entries=pool.entries + (worse,))
        assert select_top(bigger, 16) == selected


class TestPoolValidation:
    def test_duplicate_entry_rejected(self):
        e = CandidateEntry("m", "A", 0.5, 0.5)
        with pytest.raises(DataError):
            CandidatePool(entries=(e, e))

    def test_same_model_different_resplit_ok(self):
        CandidatePool(
            entries=(CandidateEntry("m", "A", 0.5, 0.5), CandidateEntry("m", "B", 0.5, 0.5))
        )


class TestArchitectureCounts:
    def test_architecture_prefix(self):
        assert architecture_of("resnet34-0") == "resnet34"
        assert architecture_of("plain") == "plain"

    def test_counts_by_architecture_and_resplit(self):
        selected = [
            CandidateEntry("resnet34-0", "A", 0.9, 0.9),
            CandidateEntry("resnet34-1", "A", 0.89, 0.9),
            CandidateEntry("vgg19bn-0", "B", 0.88, 0.9),
        ]
        counts = selection_counts(selected)
        assert counts == {("resnet34", "A"): 2, ("vgg19bn", "B"): 1}
