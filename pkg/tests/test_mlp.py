"""MLP training: gradient correctness, checkpoint selection, determinism."""

import numpy as np
import pytest

from speechscreen.models import (
    InvalidConfig,
    MlpConfig,
    NoValidationSplit,
    SingleClassTraining,
    TaskType,
    predict,
    predict_labels,
    train_mlp,
)
from speechscreen.models.mlp import MlpParams, mlp_loss_and_grad

SMALL = MlpConfig(hidden_units=16, epochs=20, n_seeds=2)


def random_params(rng, d, h, out, classify):
    return MlpParams(
        w1=rng.normal(scale=0.5, size=(d, h)),
        b1=rng.normal(scale=0.2, size=h),
        w2=rng.normal(scale=0.5, size=(h, out)),
        b2=rng.normal(scale=0.2, size=out),
        classify=classify,
    )


def numeric_grad(params, Z, target, eps=1e-6):
    grads = []
    for name in ("w1", "b1", "w2", "b2"):
        base = getattr(params, name)
        g = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            for sign, store in ((+1, "p"), (-1, "m")):
                arr = base.copy()
                arr[idx] += sign * eps
                probe = MlpParams(
                    **{
                        n: (arr if n == name else getattr(params, n))
                        for n in ("w1", "b1", "w2", "b2")
                    },
                    classify=params.classify,
                )
                loss = mlp_loss_and_grad(probe, Z, target)[0]
                if store == "p":
                    lp = loss
                else:
                    g[idx] = (lp - loss) / (2 * eps)
        grads.append(g)
    return grads


@pytest.mark.parametrize("classify", [True, False])
def test_gradient_matches_finite_differences(classify):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        d, h, out, n = 3, 4, 3 if classify else 1, 6
        params = random_params(rng, d, h, out, classify)
        # keep pre-activations away from the ReLU kink so the finite
        # difference stays two-sided differentiable
        Z = rng.normal(size=(n, d))
        A = Z @ params.w1 + params.b1
        if np.abs(A).min() < 1e-4:
            continue
        target = rng.integers(0, 3, n) if classify else rng.normal(size=n)
        _, analytic = mlp_loss_and_grad(params, Z, target)
        numeric = numeric_grad(params, Z, target)
        for a, g in zip(analytic, numeric):
            scale = max(1.0, float(np.abs(g).max()))
            worst = max(worst, float(np.abs(a - g).max()) / scale)
    assert worst <= 1e-4


def separable(n_per=20, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (n_per, 2)), rng.normal(6, 1, (n_per, 2))])
    y = np.repeat([0, 1], n_per)
    return X, y


def test_learns_separable_classes():
    X, y = separable(seed=0)
    Xv, yv = separable(n_per=10, seed=1)
    model = train_mlp(X, y, Xv, yv, TaskType.classify3, MlpConfig(hidden_units=16, epochs=65, n_seeds=1), n_classes=2)
    assert (predict_labels(model, Xv) == yv).mean() >= 0.95


def test_classify_probabilities():
    X, y = separable()
    model = train_mlp(X, y, X, y, TaskType.classify3, SMALL, n_classes=2)
    P = predict(model, X[:7])
    assert P.shape == (7, 2)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)


def test_regression_beats_constant_baseline():
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, (60, 3))
    y = 4.0 * X[:, 0]
    Xv = rng.uniform(-1, 1, (20, 3))
    yv = 4.0 * Xv[:, 0]
    model = train_mlp(
        X, y, Xv, yv, TaskType.regress, MlpConfig(hidden_units=16, epochs=200, n_seeds=1)
    )
    err = np.sqrt(np.mean((predict(model, Xv) - yv) ** 2))
    assert err < 0.8 * np.std(yv)  # clearly better than predicting the mean


def test_deterministic():
    X, y = separable()
    a = train_mlp(X, y, X, y, TaskType.classify3, SMALL, n_classes=2, seed=4)
    b = train_mlp(X, y, X, y, TaskType.classify3, SMALL, n_classes=2, seed=4)
    np.testing.assert_array_equal(a.params.w1, b.params.w1)
    np.testing.assert_array_equal(a.params.w2, b.params.w2)
    assert a.train_meta == b.train_meta


def test_seed_changes_initialization():
    X, y = separable()
    a = train_mlp(X, y, X, y, TaskType.classify3, SMALL, n_classes=2, seed=1)
    b = train_mlp(X, y, X, y, TaskType.classify3, SMALL, n_classes=2, seed=2)
    assert not np.array_equal(a.params.w1, b.params.w1)


def test_checkpoint_metadata_in_range():
    X, y = separable()
    model = train_mlp(X, y, X, y, TaskType.classify3, SMALL, n_classes=2)
    meta = model.train_meta
    assert 0 <= meta["best_seed_index"] < SMALL.n_seeds
    assert 0 <= meta["best_epoch"] < SMALL.epochs
    assert np.isfinite(meta["val_metric"])


def test_strictly_better_keeps_first():
    # on a trivially separable set the metric saturates at 1.0 quickly;
    # later equal scores must not displace the first best epoch
    X, y = separable(seed=3)
    model = train_mlp(
        X, y, X, y, TaskType.classify3,
        MlpConfig(hidden_units=32, epochs=30, n_seeds=3), n_classes=2, seed=0,
    )
    assert model.train_meta["val_metric"] == pytest.approx(1.0)
    assert model.train_meta["best_seed_index"] == 0
    assert model.train_meta["best_epoch"] <= 10


def test_no_validation_split():
    X, y = separable()
    with pytest.raises(NoValidationSplit):
        train_mlp(X, y, None, None, TaskType.classify3, SMALL, n_classes=2)
    with pytest.raises(NoValidationSplit):
        train_mlp(X, y, np.zeros((0, 2)), np.zeros(0), TaskType.classify3, SMALL, n_classes=2)


def test_single_class_rejected():
    X = np.random.default_rng(0).normal(size=(10, 2))
    with pytest.raises(SingleClassTraining):
        train_mlp(X, np.zeros(10), X, np.zeros(10), TaskType.classify3, SMALL)


def test_invalid_config():
    with pytest.raises(InvalidConfig):
        MlpConfig(hidden_units=0)
    with pytest.raises(InvalidConfig):
        MlpConfig(epochs=0)
    with pytest.raises(InvalidConfig):
        MlpConfig(beta1=1.0)


def test_defaults_match_protocol():
    cfg = MlpConfig()
    assert cfg.hidden_units == 128
    assert cfg.epochs == 65
    assert cfg.n_seeds == 10
    assert cfg.batch_size == 32
    assert cfg.step == 1e-3
