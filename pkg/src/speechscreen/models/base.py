"""Shared model types: families, task kinds, the fitted-model container."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import PipelineError


class ModelError(PipelineError):
    pass


class EmptyDesign(ModelError):
    pass


class SingleClassTraining(ModelError):
    pass


class NoValidationSplit(ModelError):
    pass


class InvalidConfig(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class ModelFamily(Enum):
    logistic = "logistic"
    ridge = "ridge"
    forest = "forest"
    mlp = "mlp"


class TaskType(Enum):
    classify3 = "classify3"
    regress = "regress"


@dataclass(frozen=True)
class TrainedModel:
    """A fitted model with its input scaler and provenance.

    params is family-specific fitted state exposing predict(Z) on
    standardized inputs; predictions go through predict() below so the
    scaler is always applied.
    """

    family: ModelFamily
    task_type: TaskType
    scaler: "Scaler"
    params: object
    seed: int
    n_features: int
    n_classes: int
    train_meta: dict
    config_digest: str = ""


def predict(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Class probabilities (classify3, rows summing to 1) or real values."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"model expects {model.n_features} features, got {X.shape[1]}"
        )
    from .scaler import apply_scaler

    Z = apply_scaler(model.scaler, X)
    return model.params.predict(Z)


def predict_labels(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Hard class indices; argmax breaks probability ties toward class 0."""
    if model.task_type is not TaskType.classify3:
        raise ModelError("predict_labels requires a classification model")
    return np.argmax(predict(model, X), axis=1)
