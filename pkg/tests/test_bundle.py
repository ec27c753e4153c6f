"""Model bundle round-trips must be byte-exact in both directions."""

import dataclasses

import numpy as np
import pytest

from speechscreen.models import (
    BadBundle,
    ForestConfig,
    MlpConfig,
    TaskType,
    load_model,
    predict,
    save_model,
    train_forest_classifier,
    train_forest_regressor,
    train_logistic,
    train_mlp,
    train_ridge,
)


def fitted_models():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(0, 1, (12, 3)), rng.normal(4, 1, (12, 3))])
    yc = np.repeat([0, 1], 12)
    yr = X @ np.array([1.0, 2.0, -1.0]) + 5.0
    mlp_cfg = MlpConfig(hidden_units=4, epochs=2, n_seeds=1)
    return {
        "logistic": train_logistic(X, yc, n_classes=2, seed=1),
        "ridge": train_ridge(X, yr, seed=2),
        "forest_c": train_forest_classifier(X, yc, ForestConfig(n_trees=3), n_classes=2, seed=3),
        "forest_r": train_forest_regressor(X, yr, ForestConfig(n_trees=3), seed=4),
        "mlp": train_mlp(X, yc, X, yc, TaskType.classify3, mlp_cfg, n_classes=2, seed=5),
    }


MODELS = fitted_models()
PROBE = np.random.default_rng(1).normal(2, 2, (6, 3))


@pytest.mark.parametrize("name", sorted(MODELS))
def test_save_load_save_is_byte_identical(name):
    data = save_model(MODELS[name])
    assert data[:4] == b"MDL1"
    assert save_model(load_model(data)) == data


@pytest.mark.parametrize("name", sorted(MODELS))
def test_loaded_model_predicts_identically(name):
    model = MODELS[name]
    back = load_model(save_model(model))
    np.testing.assert_array_equal(predict(back, PROBE), predict(model, PROBE))
    assert back.family is model.family
    assert back.task_type is model.task_type
    assert back.seed == model.seed
    assert back.n_features == model.n_features
    assert back.train_meta == model.train_meta


def test_save_is_deterministic():
    assert save_model(MODELS["forest_c"]) == save_model(MODELS["forest_c"])


def test_config_digest_round_trips():
    model = dataclasses.replace(MODELS["ridge"], config_digest="abc123")
    assert load_model(save_model(model)).config_digest == "abc123"


def test_forest_tree_boundaries_survive():
    model = MODELS["forest_c"]
    back = load_model(save_model(model))
    assert len(back.params.trees) == len(model.params.trees)
    for ta, tb in zip(model.params.trees, back.params.trees):
        np.testing.assert_array_equal(ta.feature, tb.feature)
        np.testing.assert_array_equal(ta.leaf, tb.leaf)


def test_bad_magic():
    with pytest.raises(BadBundle):
        load_model(b"ZIP9" + b"\x00" * 32)
    with pytest.raises(BadBundle):
        load_model(b"")


def test_truncated_header():
    data = save_model(MODELS["ridge"])
    with pytest.raises(BadBundle):
        load_model(data[:10])


def test_truncated_payload():
    data = save_model(MODELS["ridge"])
    with pytest.raises(BadBundle):
        load_model(data[:-4])


def test_trailing_bytes_rejected():
    data = save_model(MODELS["ridge"])
    with pytest.raises(BadBundle):
        load_model(data + b"\x00")


def test_garbage_header_json():
    data = save_model(MODELS["ridge"])
    corrupt = data[:8] + b"\xff" * (len(data) - 8)
    with pytest.raises(BadBundle):
        load_model(corrupt)
