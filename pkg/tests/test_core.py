import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drgrade.core import (
    PredictionPanel,
    PredictionRecord,
    assemble_panel,
    validate_label,
    validate_prob_vector,
)
from drgrade.errors import (
    ConflictingLabel,
    DataError,
    DuplicateRecord,
    LabelOutOfRange,
    MissingCell,
    NegativeEntry,
    NonFiniteEntry,
    SumOutOfRange,
)


class TestValidateProbVector:
    def test_exact_simplex_point_unchanged(self):
        v = validate_prob_vector([0.5, 0.25, 0.25])
        np.testing.assert_array_equal(v, [0.5, 0.25, 0.25])

    def test_small_drift_renormalized(self):
        v = validate_prob_vector([0.5005, 0.25, 0.25])
        assert v.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(v, np.array([0.5005, 0.25, 0.25]) / 1.0005, rtol=1e-15)

    def test_negative_entry_rejected(self):
        with pytest.raises(NegativeEntry):
            validate_prob_vector([0.6, -0.1, 0.5])

    def test_large_drift_rejected(self):
        with pytest.raises(SumOutOfRange):
            validate_prob_vector([0.6, 0.3, 0.2])

    def test_nan_rejected(self):
        with pytest.raises(NonFiniteEntry):
            validate_prob_vector([np.nan, 0.5, 0.5])

    def test_renormalize_false_rejects_drift_band(self):
        with pytest.raises(SumOutOfRange):
            validate_prob_vector([0.5005, 0.25, 0.25], renormalize=False)

    def test_result_read_only(self):
        v = validate_prob_vector([0.5, 0.5])
        with pytest.raises(ValueError):
            v[0] = 0.0

    @given(
        st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=2, max_size=6),
        st.floats(min_value=-9e-4, max_value=9e-4),
    )
    @settings(max_examples=200, deadline=None)
    def test_validation_is_idempotent(self, raw, drift):
        v = np.array(raw) / np.sum(raw) * (1.0 + drift)
        once = validate_prob_vector(v)
        twice = validate_prob_vector(once)
        np.testing.assert_array_equal(once, twice)


class TestValidateLabel:
    def test_in_range(self):
        assert validate_label(2, 3) == 2

    @pytest.mark.parametrize("bad", [-1, 3, 10])
    def test_out_of_range(self, bad):
        with pytest.raises(LabelOutOfRange):
            validate_label(bad, 3)

    def test_k_must_be_at_least_two(self):
        with pytest.raises(LabelOutOfRange):
            validate_label(0, 1)


def _records(n_models=2, n_samples=3, labeled=True):
    recs = []
    for m in range(n_models):
        for s in range(n_samples):
            probs = np.full(3, 0.2)
            probs[(m + s) % 3] = 0.6
            recs.append(
                PredictionRecord(
                    sample_id=f"s{s}",
                    model_id=f"m{m}",
                    probs=probs,
                    true_label=s % 3 if labeled else None,
                )
            )
    return recs


class TestAssemblePanel:
    def test_complete_grid(self):
        panel = assemble_panel(_records())
        assert panel.models == ("m0", "m1")
        assert panel.samples == ("s0", "s1", "s2")
        assert panel.probs.shape == (2, 3, 3)
        np.testing.assert_array_equal(panel.labels, [0, 1, 2])

    def test_missing_cell(self):
        with pytest.raises(MissingCell):
            assemble_panel(_records()[:-1])

    def test_duplicate_record(self):
        recs = _records()
        dup = PredictionRecord("s0", "m0", np.array([0.1, 0.1, 0.8]), 0)
        with pytest.raises(DuplicateRecord):
            assemble_panel(recs + [dup])

    def test_conflicting_label(self):
        recs = _records()[:1] + [
            PredictionRecord("s0", "m1", np.array([0.1, 0.1, 0.8]), true_label=2)
        ]
        with pytest.raises(ConflictingLabel):
            assemble_panel(recs)

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            assemble_panel([])

    def test_unlabeled_panel(self):
        panel = assemble_panel(_records(labeled=False))
        assert panel.labels is None

    def test_partial_labels_dropped(self):
        recs = _records(labeled=False)
        recs[0] = PredictionRecord(
            recs[0].sample_id, recs[0].model_id, recs[0].probs, true_label=0
        )
        assert assemble_panel(recs).labels is None

    @given(st.randoms())
    @settings(max_examples=30, deadline=None)
    def test_order_insensitive(self, rnd):
        recs = _records(n_models=3, n_samples=4)
        shuffled = list(recs)
        rnd.shuffle(shuffled)
        a = assemble_panel(recs)
        b = assemble_panel(shuffled)
        assert a.models == b.models and a.samples == b.samples
        np.testing.assert_array_equal(a.probs, b.probs)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_every_cell_on_simplex(self):
        panel = assemble_panel(_records(n_models=3, n_samples=4))
        sums = panel.probs.sum(axis=2)
        assert np.all(np.abs(sums - 1.0) <= 1e-6)
        assert np.all(panel.probs >= 0)


class TestPredictionPanel:
    def test_restrict_keeps_order_and_labels(self):
        panel = assemble_panel(_records(n_models=2, n_samples=4))
        sub = panel.restrict(["s3", "s1"])
        assert sub.samples == ("s1", "s3")
        np.testing.assert_array_equal(sub.probs, panel.probs[:, [1, 3], :])
        np.testing.assert_array_equal(sub.labels, panel.labels[[1, 3]])

    def test_restrict_unknown_id(self):
        panel = assemble_panel(_records())
        with pytest.raises(DataError):
            panel.restrict(["nope"])

    def test_requires_canonical_order(self):
        probs = np.full((1, 2, 3), 1 / 3)
        with pytest.raises(DataError):
            PredictionPanel(models=("m0",), samples=("s1", "s0"), probs=probs)

    def test_probs_read_only(self):
        panel = assemble_panel(_records())
        with pytest.raises(ValueError):
            panel.probs[0, 0, 0] = 1.0
