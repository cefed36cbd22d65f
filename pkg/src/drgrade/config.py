"""Run configuration: INI-style sections, strict keys, CLI overrides.

Every key has the module default; unknown sections or keys fail fast
naming the offender. CLI flags mirror the dotted keys
(e.g. --panel.seed 7). The effective configuration hashes to a stable
digest recorded in output provenance comments.
"""

from __future__ import annotations

import configparser
import hashlib

import numpy as np

from .errors import ConfigError, DataError
from .fusion import TrainConfig
from .losses import ClassWeights, MultiTaskConfig
from .simulator import PanelSpec
from .splitting import SplitSpec

_DEFAULTS: dict[str, dict[str, str]] = {
    "split": {
        "fractions": "0.84,0.08,0.08",
        "master_seed": "0",
        "resplit_seeds": "1,2,3",
        "resplit_names": "",
    },
    "train": {
        "initial_lr": "0.001",
        "decay": "0.9",
        "epochs": "20",
        "batch_size": "25",
        "seed": "0",
        "hidden_dim": "32",
        "class_weights": "",
    },
    "multitask": {
        "lambda": "0.1",
        "task2_weights": "0.779,0.146,0.075",
    },
    "panel": {
        "n_models": "16",
        "n_samples": "611",
        "n_classes": "3",
        "class_distribution": "0.538,0.347,0.115",
        "accuracy": "0.75",
        "confusion_profile": "adjacent",
        "sharpness": "10.0",
        "correlation": "0.0",
        "seed": "0",
    },
    "ensemble": {
        "strategy": "avg",
    },
}


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(v) for v in raw.split(","))


def _ints(raw: str) -> tuple[int, ...]:
    return tuple(int(v) for v in raw.split(","))


class RunConfig:
    def __init__(self, values: dict[str, dict[str, str]]):
        self._values = values

    @classmethod
    def load(cls, path=None, overrides=()) -> "RunConfig":
        """Defaults, then the optional INI file, then dotted overrides."""
        values = {s: dict(kv) for s, kv in _DEFAULTS.items()}
        if path is not None:
            parser = configparser.ConfigParser(interpolation=None)
            try:
                with open(path, "r", encoding="utf-8") as f:
                    parser.read_file(f)
            except OSError as e:
                raise ConfigError(f"cannot read config {path}: {e}") from None
            except configparser.Error as e:
                raise ConfigError(f"malformed config {path}: {e}") from None
            for section in parser.sections():
                if section not in values:
                    raise ConfigError(f"unknown config section [{section}]")
                for key, val in parser.items(section):
                    if key not in values[section]:
                        raise ConfigError(f"unknown config key {section}.{key}")
                    values[section][key] = val.strip()
        for dotted, val in overrides:
            if "." not in dotted:
                raise ConfigError(f"override {dotted!r} is not section.key")
            section, key = dotted.split(".", 1)
            if section not in values or key not in values[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            values[section][key] = val
        return cls(values)

    def _get(self, section: str, key: str) -> str:
        return self._values[section][key]

    def digest(self) -> str:
        lines = [
            f"{s}.{k}={self._values[s][k]}"
            for s in sorted(self._values)
            for k in sorted(self._values[s])
        ]
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]

    def _build(self, what, builder):
        try:
            return builder()
        except (ValueError, DataError) as e:
            raise ConfigError(f"bad [{what}] configuration: {e}") from None

    def split_spec(self) -> SplitSpec:
        def build():
            names = self._get("split", "resplit_names")
            return SplitSpec(
                fractions=_floats(self._get("split", "fractions")),
                master_seed=int(self._get("split", "master_seed")),
                resplit_seeds=_ints(self._get("split", "resplit_seeds")),
                resplit_names=tuple(names.split(",")) if names else None,
            )

        return self._build("split", build)

    def train_config(self) -> TrainConfig:
        def build():
            raw_w = self._get("train", "class_weights")
            return TrainConfig(
                initial_lr=float(self._get("train", "initial_lr")),
                decay=float(self._get("train", "decay")),
                epochs=int(self._get("train", "epochs")),
                batch_size=int(self._get("train", "batch_size")),
                seed=int(self._get("train", "seed")),
                hidden_dim=int(self._get("train", "hidden_dim")),
                class_weights=ClassWeights(np.array(_floats(raw_w))) if raw_w else None,
            )

        return self._build("train", build)

    def multitask_config(self) -> MultiTaskConfig:
        def build():
            return MultiTaskConfig(
                lam=float(self._get("multitask", "lambda")),
                task2_weights=ClassWeights(np.array(_floats(self._get("multitask", "task2_weights")))),
            )

        return self._build("multitask", build)

    def panel_spec(self) -> PanelSpec:
        def build():
            acc_raw = self._get("panel", "accuracy")
            accs = _floats(acc_raw)
            return PanelSpec(
                n_models=int(self._get("panel", "n_models")),
                n_samples=int(self._get("panel", "n_samples")),
                k=int(self._get("panel", "n_classes")),
                class_distribution=_floats(self._get("panel", "class_distribution")),
                per_model_accuracy=accs[0] if len(accs) == 1 else accs,
                confusion_profile=self._get("panel", "confusion_profile"),
                sharpness=float(self._get("panel", "sharpness")),
                correlation=float(self._get("panel", "correlation")),
                seed=int(self._get("panel", "seed")),
            )

        return self._build("panel", build)

    def strategy_kind(self) -> str:
        kind = self._get("ensemble", "strategy")
        if kind not in ("vote", "avg", "fusion"):
            raise ConfigError(f"bad [ensemble] configuration: unknown strategy {kind!r}")
        return kind
