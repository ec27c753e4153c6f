"""Column standardization fitted on training rows only."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import DimensionMismatch, EmptyDesign


@dataclass(frozen=True)
class Scaler:
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "means", np.asarray(self.means, dtype=np.float64))
        object.__setattr__(self, "stds", np.asarray(self.stds, dtype=np.float64))
        if self.means.ndim != 1 or self.means.shape != self.stds.shape:
            raise EmptyDesign("scaler means/stds must be matching 1-d arrays")
        if np.any(self.stds <= 0):
            raise EmptyDesign("scaler stds must be positive")


def fit_scaler(X: np.ndarray) -> Scaler:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise EmptyDesign(f"cannot standardize shape {X.shape}")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    # constant columns map to 0, not nan
    stds = np.where(stds == 0.0, 1.0, stds)
    return Scaler(means=means, stds=stds)


def apply_scaler(scaler: Scaler, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != scaler.means.shape[0]:
        raise DimensionMismatch(
            f"scaler fitted on {scaler.means.shape[0]} columns, got {X.shape}"
        )
    return (X - scaler.means) / scaler.stds
