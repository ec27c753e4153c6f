"""Single-hidden-layer network trained with Adam and seed restarts.

Ten independently initialized runs of 65 epochs each; after every epoch
the validation metric is computed and the best epoch's weights are kept,
then the best run overall wins.  Ties keep the earlier epoch and the
lower seed index, so the whole procedure is a pure function of
(data, split, config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..evaluation import macro_f1, rmse
from ..manifest import Diagnosis
from .base import (
    EmptyDesign,
    InvalidConfig,
    ModelFamily,
    NoValidationSplit,
    SingleClassTraining,
    TaskType,
    TrainedModel,
)
from .scaler import apply_scaler, fit_scaler


@dataclass(frozen=True)
class MlpConfig:
    hidden_units: int = 128
    step: float = 1e-3
    batch_size: int = 32
    epochs: int = 65
    n_seeds: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.hidden_units < 1:
            raise InvalidConfig("hidden_units must be >= 1")
        if self.batch_size < 1 or self.epochs < 1 or self.n_seeds < 1:
            raise InvalidConfig(f"bad mlp config {self}")
        if self.step <= 0 or not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise InvalidConfig(f"bad mlp config {self}")


@dataclass(frozen=True)
class MlpParams:
    w1: np.ndarray  # (d, h)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (h, out)
    b2: np.ndarray  # (out,)
    classify: bool

    def predict(self, Z: np.ndarray) -> np.ndarray:
        H = np.maximum(Z @ self.w1 + self.b1, 0.0)
        O = H @ self.w2 + self.b2
        if self.classify:
            O = O - O.max(axis=1, keepdims=True)
            E = np.exp(O)
            return E / E.sum(axis=1, keepdims=True)
        return O[:, 0]


def mlp_loss_and_grad(params: MlpParams, Z: np.ndarray, target: np.ndarray):
    """Mean loss over the batch (cross-entropy or squared error) and the
    gradient for each weight tensor, in (w1, b1, w2, b2) order."""
    n = Z.shape[0]
    A = Z @ params.w1 + params.b1
    H = np.maximum(A, 0.0)
    O = H @ params.w2 + params.b2
    if params.classify:
        O = O - O.max(axis=1, keepdims=True)
        E = np.exp(O)
        P = E / E.sum(axis=1, keepdims=True)
        Y = np.eye(P.shape[1])[target.astype(np.int64)]
        loss = -np.mean(np.log(np.sum(P * Y, axis=1) + 1e-300))
        d_o = (P - Y) / n
    else:
        resid = O[:, 0] - target
        loss = float(np.mean(resid**2))
        d_o = (2.0 * resid / n)[:, None]
    d_w2 = H.T @ d_o
    d_b2 = d_o.sum(axis=0)
    d_h = d_o @ params.w2.T
    d_h[A <= 0] = 0.0
    d_w1 = Z.T @ d_h
    d_b1 = d_h.sum(axis=0)
    return float(loss), (d_w1, d_b1, d_w2, d_b2)


class _Adam:
    def __init__(self, shapes, config):
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0
        self.c = config

    def update(self, tensors, grads):
        self.t += 1
        c = self.c
        out = []
        for i, (w, g) in enumerate(zip(tensors, grads)):
            self.m[i] = c.beta1 * self.m[i] + (1 - c.beta1) * g
            self.v[i] = c.beta2 * self.v[i] + (1 - c.beta2) * g * g
            m_hat = self.m[i] / (1 - c.beta1**self.t)
            v_hat = self.v[i] / (1 - c.beta2**self.t)
            out.append(w - c.step * m_hat / (np.sqrt(v_hat) + c.eps))
        return out


def _val_score(params, Z_val, y_val):
    if params.classify:
        pred = np.argmax(params.predict(Z_val), axis=1)
        return macro_f1(
            [Diagnosis(int(v)) for v in y_val], [Diagnosis(int(v)) for v in pred]
        )
    return rmse(y_val, params.predict(Z_val))


def train_mlp(
    X: np.ndarray,
    y: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    task_type: TaskType,
    config: MlpConfig = MlpConfig(),
    n_classes: int = 3,
    seed: int = 0,
) -> TrainedModel:
    classify = task_type is TaskType.classify3
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64 if classify else np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDesign(f"cannot fit on shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise EmptyDesign("target count must match row count")
    if X_val is None or np.asarray(X_val).size == 0:
        raise NoValidationSplit("checkpoint selection needs a validation split")
    if classify and np.unique(y).size < 2:
        raise SingleClassTraining("training labels are all one class")
    X_val = np.asarray(X_val, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.int64 if classify else np.float64)

    scaler = fit_scaler(X)
    Z = apply_scaler(scaler, X)
    Z_val = apply_scaler(scaler, X_val)
    n, d = Z.shape
    h = config.hidden_units
    out_dim = n_classes if classify else 1
    better = (lambda a, b: a > b) if classify else (lambda a, b: a < b)

    best = None  # (score, seed_idx, epoch, params)
    children = np.random.SeedSequence(seed).spawn(config.n_seeds)
    for seed_idx, child in enumerate(children):
        rng = np.random.default_rng(child)
        w1 = rng.normal(0.0, np.sqrt(2.0 / d), size=(d, h))
        b1 = np.zeros(h)
        w2 = rng.normal(0.0, np.sqrt(1.0 / h), size=(h, out_dim))
        b2 = np.zeros(out_dim)
        adam = _Adam([w.shape for w in (w1, b1, w2, b2)], config)
        for epoch in range(config.epochs):
            perm = rng.permutation(n)
            for start in range(0, n, config.batch_size):
                batch = perm[start : start + config.batch_size]
                params = MlpParams(w1, b1, w2, b2, classify)
                _, grads = mlp_loss_and_grad(params, Z[batch], y[batch])
                w1, b1, w2, b2 = adam.update((w1, b1, w2, b2), grads)
            params = MlpParams(w1, b1, w2, b2, classify)
            score = _val_score(params, Z_val, y_val)
            if best is None or better(score, best[0]):
                best = (score, seed_idx, epoch, params)

    score, seed_idx, epoch, params = best
    return TrainedModel(
        family=ModelFamily.mlp,
        task_type=task_type,
        scaler=scaler,
        params=params,
        seed=seed,
        n_features=d,
        n_classes=n_classes if classify else 0,
        train_meta={
            "best_seed_index": seed_idx,
            "best_epoch": epoch,
            "val_metric": float(score),
        },
    )
