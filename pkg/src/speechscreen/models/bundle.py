"""Byte-stable model serialization.

Layout: magic "MDL1", u32 little-endian header length, canonical JSON
header (sorted keys, no whitespace), then the raw bytes of each array in
the order the header lists them.  The same model always serializes to
the same bytes, so bundles can be compared or hashed directly.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .base import ModelError, ModelFamily, TaskType, TrainedModel
from .forest import ForestParams, Tree
from .logistic import LogisticParams
from .mlp import MlpParams
from .ridge import RidgeParams
from .scaler import Scaler

MAGIC = b"MDL1"


class BadBundle(ModelError):
    pass


def _family_arrays(model: TrainedModel) -> list[tuple[str, np.ndarray]]:
    p = model.params
    out = [
        ("scaler_means", np.asarray(model.scaler.means, dtype="<f8")),
        ("scaler_stds", np.asarray(model.scaler.stds, dtype="<f8")),
    ]
    if model.family is ModelFamily.logistic:
        out += [
            ("weights", np.asarray(p.weights, dtype="<f8")),
            ("bias", np.asarray(p.bias, dtype="<f8")),
        ]
    elif model.family is ModelFamily.ridge:
        out += [
            ("weights", np.asarray(p.weights, dtype="<f8")),
            ("bias", np.asarray([p.bias], dtype="<f8")),
        ]
    elif model.family is ModelFamily.mlp:
        out += [
            ("w1", np.asarray(p.w1, dtype="<f8")),
            ("b1", np.asarray(p.b1, dtype="<f8")),
            ("w2", np.asarray(p.w2, dtype="<f8")),
            ("b2", np.asarray(p.b2, dtype="<f8")),
        ]
    elif model.family is ModelFamily.forest:
        offsets = [0]
        for tree in p.trees:
            offsets.append(offsets[-1] + tree.feature.shape[0])
        cat = lambda name: np.concatenate([getattr(t, name) for t in p.trees])
        out += [
            ("feature", cat("feature").astype("<i4")),
            ("threshold", cat("threshold").astype("<f8")),
            ("left", cat("left").astype("<i4")),
            ("right", cat("right").astype("<i4")),
            ("leaf", cat("leaf").astype("<f8")),
            ("tree_offsets", np.asarray(offsets, dtype="<i8")),
        ]
    else:
        raise BadBundle(f"unknown family {model.family}")
    return out


def save_model(model: TrainedModel) -> bytes:
    arrays = _family_arrays(model)
    header = {
        "format": 1,
        "family": model.family.value,
        "task_type": model.task_type.value,
        "seed": int(model.seed),
        "n_features": int(model.n_features),
        "n_classes": int(model.n_classes),
        "config_digest": model.config_digest,
        "train_meta": model.train_meta,
        "arrays": [
            {"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape)}
            for name, arr in arrays
        ],
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("ascii")
    blob = b"".join(np.ascontiguousarray(arr).tobytes() for _, arr in arrays)
    return MAGIC + struct.pack("<I", len(head)) + head + blob


def load_model(data: bytes) -> TrainedModel:
    if len(data) < 8 or data[:4] != MAGIC:
        raise BadBundle("not a model bundle")
    (head_len,) = struct.unpack("<I", data[4:8])
    if len(data) < 8 + head_len:
        raise BadBundle("truncated header")
    try:
        header = json.loads(data[8 : 8 + head_len].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadBundle(f"unreadable header: {exc}") from exc

    arrays: dict[str, np.ndarray] = {}
    pos = 8 + head_len
    for entry in header["arrays"]:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        nbytes = dtype.itemsize * int(np.prod(shape, dtype=np.int64)) if shape else dtype.itemsize
        if len(data) < pos + nbytes:
            raise BadBundle(f"truncated payload at array {entry['name']!r}")
        arrays[entry["name"]] = np.frombuffer(
            data[pos : pos + nbytes], dtype=dtype
        ).reshape(shape)
        pos += nbytes
    if pos != len(data):
        raise BadBundle(f"{len(data) - pos} trailing bytes")

    family = ModelFamily(header["family"])
    task_type = TaskType(header["task_type"])
    n_classes = int(header["n_classes"])
    scaler = Scaler(means=arrays["scaler_means"], stds=arrays["scaler_stds"])
    if family is ModelFamily.logistic:
        params = LogisticParams(weights=arrays["weights"], bias=arrays["bias"])
    elif family is ModelFamily.ridge:
        params = RidgeParams(
            weights=arrays["weights"], bias=float(arrays["bias"][0])
        )
    elif family is ModelFamily.mlp:
        params = MlpParams(
            w1=arrays["w1"],
            b1=arrays["b1"],
            w2=arrays["w2"],
            b2=arrays["b2"],
            classify=task_type is TaskType.classify3,
        )
    elif family is ModelFamily.forest:
        offsets = arrays["tree_offsets"]
        trees = []
        for i in range(offsets.shape[0] - 1):
            lo, hi = int(offsets[i]), int(offsets[i + 1])
            trees.append(
                Tree(
                    feature=arrays["feature"][lo:hi],
                    threshold=arrays["threshold"][lo:hi],
                    left=arrays["left"][lo:hi],
                    right=arrays["right"][lo:hi],
                    leaf=arrays["leaf"][lo:hi],
                )
            )
        params = ForestParams(trees=tuple(trees), n_classes=n_classes)
    else:
        raise BadBundle(f"unknown family {header['family']!r}")

    return TrainedModel(
        family=family,
        task_type=task_type,
        scaler=scaler,
        params=params,
        seed=int(header["seed"]),
        n_features=int(header["n_features"]),
        n_classes=n_classes,
        train_meta=dict(header["train_meta"]),
        config_digest=str(header.get("config_digest", "")),
    )
