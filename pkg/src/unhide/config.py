"""Run configuration: a nested YAML file merged over defaults, with per-stage seeds."""

import copy
import hashlib
from pathlib import Path

import yaml

DEFAULTS = {
    "seed": 0,
    "feature": "gender",
    "out": "runs/default",
    "data": {
        "format": "ml100k",
        "ratings": "data/ml-100k/u.data",
        "users": "data/ml-100k/u.user",
        "items": "data/ml-100k/u.item",
        "rating_scale": None,
        "gender_majority": "M",
        "age_cut": 40,
        "age_majority": "young",
        "ratios": [0.7, 0.1, 0.2],
    },
    "mf": {"n_factors": 100, "learning_rate": 0.01, "reg": 0.05, "n_epochs": 50, "init_scale": 0.1},
    "mln": {
        "outputs": ["gender", "age"],
        "hidden_layer_sizes": [10],
        "dropout": 0.3,
        "learning_rate": 0.001,
        "n_epochs": 200,
        "batch_size": None,
    },
    "localize": {"step": 0.1, "iterations": 20, "init": "zeros", "normalize_gradient": True,
                 "algorithm_sign": False},
    "select": {"method": "deep", "n": 20, "threshold": None},
    "experiments": {
        "methods": ["deep", "logistic", "entropy", "variance", "pca", "random"],
        "exp1_n": list(range(1, 21)),
        "exp2_n": [5, 10, 20, 30, 40, 50, 60, 70],
        "exp3_n": 50,
        "classifiers": ["logistic", "svm", "forest", "mlp"],
        "seeds": [0, 1, 2, 3, 4],
    },
    "items": {"n": 20, "top": 10, "min_ratings": 75},
}

FEATURES = ("gender", "age")
METHODS = ("deep", "logistic", "entropy", "variance", "pca", "random")


class ConfigError(ValueError):
    pass


def merge(base, override):
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path=None, overrides=None, check_paths=True):
    """Defaults, then the YAML file at ``path``, then ``overrides``; validated."""
    raw = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        raw = yaml.safe_load(path.read_text()) or {}
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a mapping")
        unknown = set(raw) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    cfg = merge(merge(DEFAULTS, raw), overrides)
    validate(cfg, check_paths)
    return cfg


def validate(cfg, check_paths=True):
    if cfg["feature"] not in FEATURES:
        raise ConfigError(f"feature must be one of {FEATURES}")
    if cfg["feature"] not in cfg["mln"]["outputs"]:
        raise ConfigError(f"feature {cfg['feature']!r} is not among the classifier outputs")
    if cfg["select"]["method"] not in METHODS:
        raise ConfigError(f"select.method must be one of {METHODS}")
    bad = set(cfg["experiments"]["methods"]) - set(METHODS)
    if bad:
        raise ConfigError(f"unknown experiment methods {sorted(bad)}")
    mf = cfg["mf"]
    if mf["n_factors"] < 1 or mf["learning_rate"] <= 0 or mf["reg"] < 0 or mf["n_epochs"] < 1:
        raise ConfigError("invalid mf settings")
    if cfg["localize"]["step"] <= 0 or cfg["localize"]["iterations"] < 1:
        raise ConfigError("invalid localize settings")
    if not cfg["experiments"]["seeds"]:
        raise ConfigError("experiments.seeds must not be empty")
    if check_paths:
        for key in ("ratings", "users"):
            if not Path(cfg["data"][key]).exists():
                raise ConfigError(f"data.{key} path {cfg['data'][key]} does not exist")


def stage_seed(seed, stage):
    """Deterministic 32-bit seed for a pipeline stage: sha256 of ``"<seed>/<stage>"``."""
    digest = hashlib.sha256(f"{seed}/{stage}".encode()).digest()
    return int.from_bytes(digest[:4], "big")
