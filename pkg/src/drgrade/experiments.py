"""Seeded end-to-end experiments on simulated panels.

The gain experiment mirrors the evaluation discipline used on real data:
per seed, a panel is generated, split once, ensembles are scored on the
held-out test subset, and the fusion net trains on the train subset with
validation checkpointing. Per-seed records come back raw so callers can
take medians or inspect the spread.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .ensemble import AVERAGE, FUSION, VOTE, EnsembleStrategy, ensemble_predict
from .fusion import TrainConfig, train
from .metrics import confusion_matrix, qwk, score_panel
from .simulator import PanelSpec, gen_labels, gen_panel
from .splitting import SUBSET_NAMES, TEST, TRAIN, VAL, SplitSpec, stratified_split


@dataclass(frozen=True)
class GainRecord:
    seed: int
    best_single_qwk: float
    vote_qwk: float
    average_qwk: float
    fusion_qwk: float | None  # None when fusion training was skipped


def _test_qwk(probs, labels, k) -> float:
    return qwk(confusion_matrix(labels, np.argmax(probs, axis=1), k))


def run_gain_experiment(
    seeds,
    panel_spec: PanelSpec | None = None,
    split_spec: SplitSpec | None = None,
    train_cfg: TrainConfig | None = None,
    with_fusion: bool = True,
) -> list[GainRecord]:
    """Score single models and ensembles on held-out test subsets.

    Per seed: simulate a panel, split (resplit A), compute each model's
    test QWK (best single = maximum), the vote and averaging ensemble
    test QWK, and optionally the test QWK of a fusion net trained on the
    train subset with val checkpointing.
    """
    base = panel_spec or PanelSpec()
    split = split_spec or SplitSpec(resplit_seeds=(1,), resplit_names=("A",))
    cfg = train_cfg or TrainConfig()

    records = []
    for seed in seeds:
        spec = replace(base, seed=int(seed))
        labels = gen_labels(spec)
        panel = gen_panel(labels, spec)
        assignment = stratified_split(labels, split)[0]
        ids = {
            name: [panel.samples[i] for i in assignment.indices(code)]
            for name, code in zip(SUBSET_NAMES, (TRAIN, VAL, TEST))
        }
        test_panel = panel.restrict(ids["test"])

        singles = [s.qwk for s in score_panel(test_panel)]
        vote_probs, _ = ensemble_predict(test_panel, EnsembleStrategy(VOTE))
        avg_probs, _ = ensemble_predict(test_panel, EnsembleStrategy(AVERAGE))
        k = panel.k
        fusion_qwk = None
        if with_fusion:
            result = train(panel, ids["train"], ids["val"], cfg)
            fusion_probs, _ = ensemble_predict(
                test_panel, EnsembleStrategy(FUSION, fusion_model=result.best.net)
            )
            fusion_qwk = _test_qwk(fusion_probs, test_panel.labels, k)
        records.append(
            GainRecord(
                seed=int(seed),
                best_single_qwk=max(singles),
                vote_qwk=_test_qwk(vote_probs, test_panel.labels, k),
                average_qwk=_test_qwk(avg_probs, test_panel.labels, k),
                fusion_qwk=fusion_qwk,
            )
        )
    return records


def median_gain(records) -> float:
    """Median averaging-ensemble QWK minus median best-single QWK."""
    avg = float(np.median([r.average_qwk for r in records]))
    single = float(np.median([r.best_single_qwk for r in records]))
    return avg - single


def correlation_gain_curve(seeds, correlations=(0.0, 0.5, 0.9), panel_spec=None, split_spec=None):
    """Median ensemble gain at each correlation level (no fusion)."""
    base = panel_spec or PanelSpec()
    out = {}
    for corr in correlations:
        records = run_gain_experiment(
            seeds,
            panel_spec=replace(base, correlation=float(corr)),
            split_spec=split_spec,
            with_fusion=False,
        )
        out[float(corr)] = median_gain(records)
    return out
