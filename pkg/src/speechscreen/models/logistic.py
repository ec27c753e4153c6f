"""Multinomial logistic regression, full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import (
    EmptyDesign,
    InvalidConfig,
    ModelFamily,
    SingleClassTraining,
    TaskType,
    TrainedModel,
)
from .scaler import apply_scaler, fit_scaler


@dataclass(frozen=True)
class LogisticConfig:
    l2: float = 1.0
    step: float = 0.1
    max_iter: int = 500
    grad_tol: float = 1e-6

    def __post_init__(self):
        if self.l2 < 0 or self.step <= 0 or self.max_iter < 1 or self.grad_tol <= 0:
            raise InvalidConfig(f"bad logistic config {self}")


@dataclass(frozen=True)
class LogisticParams:
    weights: np.ndarray  # (d, C)
    bias: np.ndarray  # (C,)

    def predict(self, Z: np.ndarray) -> np.ndarray:
        return softmax(Z @ self.weights + self.bias)


def softmax(A: np.ndarray) -> np.ndarray:
    A = A - A.max(axis=1, keepdims=True)
    E = np.exp(A)
    return E / E.sum(axis=1, keepdims=True)


def loss_and_grad(weights, bias, Z, Y, l2):
    """Mean NLL + (l2/2)*||W||^2 (bias unpenalized) and its gradients.

    Y is one-hot (n, C).  Mean over rows, so the step size does not
    depend on the training-set size.
    """
    n = Z.shape[0]
    P = softmax(Z @ weights + bias)
    nll = -np.mean(np.log(np.sum(P * Y, axis=1) + 1e-300))
    loss = nll + 0.5 * l2 * np.sum(weights * weights)
    G = (P - Y) / n
    d_w = Z.T @ G + l2 * weights
    d_b = G.sum(axis=0)
    return loss, d_w, d_b


def train_logistic(
    X: np.ndarray,
    y: np.ndarray,
    config: LogisticConfig = LogisticConfig(),
    n_classes: int = 3,
    seed: int = 0,
) -> TrainedModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDesign(f"cannot fit on shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise EmptyDesign("label count must match row count")
    if np.unique(y).size < 2:
        raise SingleClassTraining("training labels are all one class")
    scaler = fit_scaler(X)
    Z = apply_scaler(scaler, X)
    Y = np.eye(n_classes)[y]

    W = np.zeros((Z.shape[1], n_classes))
    b = np.zeros(n_classes)
    iters = 0
    for _ in range(config.max_iter):
        loss, d_w, d_b = loss_and_grad(W, b, Z, Y, config.l2)
        gnorm = np.sqrt(np.sum(d_w * d_w) + np.sum(d_b * d_b))
        if gnorm < config.grad_tol:
            break
        W = W - config.step * d_w
        b = b - config.step * d_b
        iters += 1

    return TrainedModel(
        family=ModelFamily.logistic,
        task_type=TaskType.classify3,
        scaler=scaler,
        params=LogisticParams(weights=W, bias=b),
        seed=seed,
        n_features=X.shape[1],
        n_classes=n_classes,
        train_meta={"iterations": iters, "final_loss": float(loss)},
    )
