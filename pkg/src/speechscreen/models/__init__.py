from .base import (
    DimensionMismatch,
    EmptyDesign,
    InvalidConfig,
    ModelError,
    ModelFamily,
    NoValidationSplit,
    SingleClassTraining,
    TaskType,
    TrainedModel,
    predict,
    predict_labels,
)
from .bundle import BadBundle, load_model, save_model
from .forest import ForestConfig, train_forest_classifier, train_forest_regressor
from .logistic import LogisticConfig, train_logistic
from .mlp import MlpConfig, train_mlp
from .ridge import train_ridge
from .scaler import Scaler, apply_scaler, fit_scaler

__all__ = [
    "BadBundle",
    "DimensionMismatch",
    "EmptyDesign",
    "ForestConfig",
    "InvalidConfig",
    "LogisticConfig",
    "MlpConfig",
    "ModelError",
    "ModelFamily",
    "NoValidationSplit",
    "Scaler",
    "SingleClassTraining",
    "TaskType",
    "TrainedModel",
    "apply_scaler",
    "fit_scaler",
    "load_model",
    "predict",
    "predict_labels",
    "save_model",
    "train_forest_classifier",
    "train_forest_regressor",
    "train_logistic",
    "train_mlp",
    "train_ridge",
]
