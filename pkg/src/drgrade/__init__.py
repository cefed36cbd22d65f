"""drgrade: ensemble toolkit for diabetic retinopathy grading.

Panels of per-model class probabilities, stratified splitting with a
fixed test subset, QWK / ovo macro-AUC evaluation with the challenge
ranking rule, three ensemble strategies including a trainable
label-fusion network, and a synthetic panel simulator for end-to-end
experiments without real data.
"""

__version__ = "0.1.0"

from .core import (
    ModelScore,
    PredictionPanel,
    PredictionRecord,
    assemble_panel,
    validate_prob_vector,
)
from .ensemble import EnsembleStrategy, average_probabilities, ensemble_predict, plurality_vote
from .fusion import FusionNet, TrainConfig, init_net, train
from .kernels import BACKEND
from .losses import ClassWeights, MultiTaskConfig, inverse_frequency_weights, multitask_loss, softmax, weighted_ce
from .metrics import confusion_matrix, ovo_macro_auc, pair_auc, qwk, rank_models, score_panel
from .simulator import PanelSpec, ToyMultiTaskSpec, gen_labels, gen_panel, toy_multitask_run
from .splitting import SplitSpec, stratified_split, verify_stratification

__all__ = [
    "BACKEND",
    "ClassWeights",
    "EnsembleStrategy",
    "FusionNet",
    "ModelScore",
    "MultiTaskConfig",
    "PanelSpec",
    "PredictionPanel",
    "PredictionRecord",
    "SplitSpec",
    "ToyMultiTaskSpec",
    "TrainConfig",
    "assemble_panel",
    "average_probabilities",
    "confusion_matrix",
    "ensemble_predict",
    "gen_labels",
    "gen_panel",
    "init_net",
    "inverse_frequency_weights",
    "multitask_loss",
    "ovo_macro_auc",
    "pair_auc",
    "plurality_vote",
    "qwk",
    "rank_models",
    "score_panel",
    "softmax",
    "stratified_split",
    "toy_multitask_run",
    "train",
    "validate_prob_vector",
    "verify_stratification",
    "weighted_ce",
]
