"""Ridge regression via the augmented normal equations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import EmptyDesign, InvalidConfig, ModelFamily, TaskType, TrainedModel
from .scaler import apply_scaler, fit_scaler


@dataclass(frozen=True)
class RidgeParams:
    weights: np.ndarray  # (d,)
    bias: float

    def predict(self, Z: np.ndarray) -> np.ndarray:
        return Z @ self.weights + self.bias


def solve_ridge(Z: np.ndarray, y: np.ndarray, l2: float):
    """Solve (A^T A + l2*D) w = A^T y with A = [Z | 1], D zeroing the
    intercept entry.  Returns (weights, bias)."""
    n, d = Z.shape
    A = np.hstack([Z, np.ones((n, 1))])
    D = np.eye(d + 1)
    D[d, d] = 0.0  # intercept unpenalized
    lhs = A.T @ A + l2 * D
    rhs = A.T @ y
    w = np.linalg.solve(lhs, rhs)
    return w[:d], float(w[d])


def train_ridge(
    X: np.ndarray,
    y: np.ndarray,
    l2: float = 1.0,
    seed: int = 0,
) -> TrainedModel:
    if l2 < 0:
        raise InvalidConfig("ridge penalty must be >= 0")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDesign(f"cannot fit on shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise EmptyDesign("target count must match row count")
    scaler = fit_scaler(X)
    Z = apply_scaler(scaler, X)
    weights, bias = solve_ridge(Z, y, l2)
    resid = Z @ weights + bias - y
    return TrainedModel(
        family=ModelFamily.ridge,
        task_type=TaskType.regress,
        scaler=scaler,
        params=RidgeParams(weights=weights, bias=bias),
        seed=seed,
        n_features=X.shape[1],
        n_classes=0,
        train_meta={"l2": float(l2), "train_rmse": float(np.sqrt(np.mean(resid**2)))},
    )
