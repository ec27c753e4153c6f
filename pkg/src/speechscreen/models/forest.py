"""Bagged CART forests, classification and regression.

Trees are grown on bootstrap resamples with per-node feature
subsampling.  Split search is exhaustive over candidate features with
midpoint thresholds between adjacent distinct sorted values; rows with
x <= threshold go left.  Classification trees vote hard labels and the
forest reports vote fractions; regression trees average leaf means.

All randomness flows from a single SeedSequence, one child per tree, so
a fit is reproducible from (data, config, seed) alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

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
class ForestConfig:
    n_trees: int = 100
    min_leaf: int = 1
    max_depth: Optional[int] = None  # None = grow until pure
    max_features: Optional[int] = None  # None = sqrt(d) classify, ceil(d/3) regress

    def __post_init__(self):
        if self.n_trees < 1 or self.min_leaf < 1:
            raise InvalidConfig(f"bad forest config {self}")
        if self.max_depth is not None and self.max_depth < 0:
            raise InvalidConfig("max_depth must be None or >= 0")
        if self.max_features is not None and self.max_features < 1:
            raise InvalidConfig("max_features must be None or >= 1")


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray  # int32, -1 marks a leaf
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    leaf: np.ndarray  # (n_nodes, C) class counts or (n_nodes,) means


class _Builder:
    def __init__(self, Z, y, rng, m_feats, min_leaf, max_depth, n_classes):
        self.Z = Z
        self.y = y
        self.rng = rng
        self.m = m_feats
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.n_classes = n_classes  # 0 = regression
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.leaf = []

    def _leaf_payload(self, idx):
        if self.n_classes:
            return np.bincount(self.y[idx], minlength=self.n_classes).astype(np.float64)
        return float(np.mean(self.y[idx]))

    def _emit_leaf(self, idx):
        node = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf.append(self._leaf_payload(idx))
        return node

    def _best_split(self, idx):
        """Returns (feature, threshold, left_idx, right_idx) or None."""
        k = idx.size
        feats = self.rng.permutation(self.Z.shape[1])[: self.m]
        Xs = self.Z[np.ix_(idx, feats)]
        order = np.argsort(Xs, axis=0, kind="stable")
        sv = np.take_along_axis(Xs, order, axis=0)  # (k, m) sorted per column

        left_n = np.arange(1, k, dtype=np.float64)[:, None]
        right_n = k - left_n
        if self.n_classes:
            ys = self.y[idx][order]  # (k, m)
            onehot = np.eye(self.n_classes)[ys]  # (k, m, C)
            prefix = np.cumsum(onehot, axis=0)
            lc = prefix[:-1]  # cut i keeps the first i+1 rows left
            rc = prefix[-1][None, :, :] - lc
            g_l = 1.0 - np.sum((lc / left_n[:, :, None]) ** 2, axis=2)
            g_r = 1.0 - np.sum((rc / right_n[:, :, None]) ** 2, axis=2)
            score = (left_n * g_l + right_n * g_r) / k
        else:
            ys = self.y[idx][order]
            s = np.cumsum(ys, axis=0)
            s2 = np.cumsum(ys * ys, axis=0)
            sse_l = s2[:-1] - s[:-1] ** 2 / left_n
            sse_r = (s2[-1] - s2[:-1]) - (s[-1] - s[:-1]) ** 2 / right_n
            score = sse_l + sse_r

        invalid = sv[1:] <= sv[:-1]  # no gap between adjacent values
        if self.min_leaf > 1:
            sizes_bad = (left_n < self.min_leaf) | (right_n < self.min_leaf)
            invalid = invalid | sizes_bad
        score = np.where(invalid, np.inf, score)
        flat = int(np.argmin(score))  # first minimum in (cut, feature) order
        cut, j = divmod(flat, score.shape[1])
        if not np.isfinite(score[cut, j]):
            return None
        f = int(feats[j])
        thr = 0.5 * (sv[cut, j] + sv[cut + 1, j])
        go_left = self.Z[idx, f] <= thr
        return f, float(thr), idx[go_left], idx[~go_left]

    def build(self, idx, depth=0):
        k = idx.size
        pure = (
            np.unique(self.y[idx]).size == 1
            if self.n_classes
            else np.ptp(self.y[idx]) == 0.0
        )
        capped = self.max_depth is not None and depth >= self.max_depth
        if k < max(2, 2 * self.min_leaf) or pure or capped:
            return self._emit_leaf(idx)
        split = self._best_split(idx)
        if split is None:
            return self._emit_leaf(idx)
        f, thr, l_idx, r_idx = split
        node = len(self.feature)
        self.feature.append(f)
        self.threshold.append(thr)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf.append(
            np.zeros(self.n_classes, dtype=np.float64) if self.n_classes else 0.0
        )
        self.left[node] = self.build(l_idx, depth + 1)
        self.right[node] = self.build(r_idx, depth + 1)
        return node

    def tree(self):
        leaf = np.asarray(self.leaf, dtype=np.float64)
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            leaf=leaf,
        )


def _tree_apply(tree: Tree, Z: np.ndarray) -> np.ndarray:
    """Leaf index for every row, walking all rows one level at a time."""
    cur = np.zeros(Z.shape[0], dtype=np.int64)
    rows = np.arange(Z.shape[0])
    while True:
        internal = tree.feature[cur] >= 0
        if not internal.any():
            return cur
        f = np.maximum(tree.feature[cur], 0)
        go_left = Z[rows, f] <= tree.threshold[cur]
        nxt = np.where(go_left, tree.left[cur], tree.right[cur])
        cur = np.where(internal, nxt, cur)


@dataclass(frozen=True)
class ForestParams:
    trees: tuple
    n_classes: int  # 0 = regression

    def predict(self, Z: np.ndarray) -> np.ndarray:
        if self.n_classes:
            votes = np.zeros((Z.shape[0], self.n_classes))
            for tree in self.trees:
                at = _tree_apply(tree, Z)
                labels = np.argmax(tree.leaf[at], axis=1)  # tie -> lower class
                votes[np.arange(Z.shape[0]), labels] += 1.0
            return votes / len(self.trees)
        acc = np.zeros(Z.shape[0])
        for tree in self.trees:
            acc += tree.leaf[_tree_apply(tree, Z)]
        return acc / len(self.trees)


def _fit_forest(X, y, config, n_classes, seed):
    Z_scaler = fit_scaler(X)
    Z = apply_scaler(Z_scaler, X)
    n, d = Z.shape
    if config.max_features is not None:
        m = min(config.max_features, d)
    elif n_classes:
        m = max(1, int(math.floor(math.sqrt(d))))
    else:
        m = max(1, int(math.ceil(d / 3)))
    children = np.random.SeedSequence(seed).spawn(config.n_trees)
    trees = []
    for child in children:
        rng = np.random.default_rng(child)
        boot = rng.integers(0, n, size=n)
        builder = _Builder(
            Z[boot], y[boot], rng, m, config.min_leaf, config.max_depth, n_classes
        )
        builder.build(np.arange(n))
        trees.append(builder.tree())
    return Z_scaler, ForestParams(trees=tuple(trees), n_classes=n_classes)


def train_forest_classifier(
    X: np.ndarray,
    y: np.ndarray,
    config: ForestConfig = ForestConfig(),
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
    scaler, params = _fit_forest(X, y, config, n_classes, seed)
    return TrainedModel(
        family=ModelFamily.forest,
        task_type=TaskType.classify3,
        scaler=scaler,
        params=params,
        seed=seed,
        n_features=X.shape[1],
        n_classes=n_classes,
        train_meta={"n_trees": config.n_trees},
    )


def train_forest_regressor(
    X: np.ndarray,
    y: np.ndarray,
    config: ForestConfig = ForestConfig(),
    seed: int = 0,
) -> TrainedModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDesign(f"cannot fit on shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise EmptyDesign("target count must match row count")
    scaler, params = _fit_forest(X, y, config, 0, seed)
    return TrainedModel(
        family=ModelFamily.forest,
        task_type=TaskType.regress,
        scaler=scaler,
        params=params,
        seed=seed,
        n_features=X.shape[1],
        n_classes=0,
        train_meta={"n_trees": config.n_trees},
    )
