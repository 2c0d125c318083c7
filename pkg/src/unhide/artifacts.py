"""Versioned JSON artifacts.

Every file is one JSON object whose ``header`` carries the format version,
artifact kind, producing command, config hash and seed; ``payload`` holds the
data. Floats are written with ``repr`` precision, so arrays round-trip
bit-exactly. Keys are sorted to make reruns byte-identical.
"""

import hashlib
import json
from pathlib import Path

import numpy as np

from .exceptions import ArtifactError
from .mf import PMF
from .nn import MLPClassifier

FORMAT_VERSION = 1
MAGIC = "unhide-artifact"


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_artifact(path, kind, payload, command="", config=None, seed=None):
    header = {
        "format": MAGIC,
        "version": FORMAT_VERSION,
        "kind": kind,
        "command": command,
        "config_hash": config_hash(config or {}),
        "seed": seed,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps({"header": header, "payload": payload}, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n")
    return path


def read_artifact(path, kind=None):
    """Return ``(header, payload)``; raise :class:`ArtifactError` on any mismatch."""
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"missing artifact {path}")
    try:
        doc = json.loads(path.read_text())
        header = doc["header"]
        payload = doc["payload"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ArtifactError(f"{path} is not a valid artifact: {exc}") from None
    if header.get("format") != MAGIC:
        raise ArtifactError(f"{path} is not an artifact file")
    if header.get("version") != FORMAT_VERSION:
        raise ArtifactError(f"{path} has format version {header.get('version')}, expected {FORMAT_VERSION}")
    if kind is not None and header.get("kind") != kind:
        raise ArtifactError(f"{path} holds a {header.get('kind')!r} artifact, expected {kind!r}")
    return header, payload


def pmf_payload(model):
    P, Q = model.user_factors_, model.item_factors_
    return {
        "n_users": P.shape[0],
        "n_items": Q.shape[0],
        "n_factors": P.shape[1],
        "params": model.get_params(),
        "user_factors": P.ravel().tolist(),
        "item_factors": Q.ravel().tolist(),
        "loss_trace": [float(v) for v in model.loss_trace_],
        "train_rmse": [float(v) for v in model.train_rmse_],
    }


def pmf_from_payload(payload):
    model = PMF(**payload["params"])
    K = payload["n_factors"]
    model.user_factors_ = np.array(payload["user_factors"], dtype=float).reshape(payload["n_users"], K)
    model.item_factors_ = np.array(payload["item_factors"], dtype=float).reshape(payload["n_items"], K)
    model.loss_trace_ = list(payload["loss_trace"])
    model.train_rmse_ = list(payload["train_rmse"])
    return model


def save_pmf(path, model, **header):
    return write_artifact(path, "factor_model", pmf_payload(model), **header)


def load_pmf(path):
    return pmf_from_payload(read_artifact(path, "factor_model")[1])


def save_mlp(path, model, extra=None, **header):
    payload = model.to_payload()
    if hasattr(model, "history_"):
        h = model.history_
        payload["history"] = {
            "loss": h.loss, "train_accuracy": h.train_accuracy,
            "val_accuracy": h.val_accuracy, "best_epoch": h.best_epoch,
        }
    payload.update(extra or {})
    return write_artifact(path, "classifier", payload, **header)


def load_mlp(path):
    _, payload = read_artifact(path, "classifier")
    return MLPClassifier.from_payload(payload), payload
