"""End-to-end stages behind the command line. Each stage reads the artifacts
of earlier stages from the output directory and writes its own.
"""

import csv
import logging
from pathlib import Path

import numpy as np

from . import artifacts
from .baselines import rank_features
from .config import stage_seed
from .data import parse_demographics, parse_items, parse_ratings, split
from .experiments import (
    ResultTable,
    paired_comparison,
    run_experiment_1,
    run_experiment_2,
    run_experiment_3,
)
from .mf import rmse, train_pmf
from .nn import MLPClassifier
from .unhide import FeatureRanking, LocalizeConfig, localize, relevancy, select_top_n, top_items

logger = logging.getLogger(__name__)


def out_dir(cfg):
    path = Path(cfg["out"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _header(cfg, command, stage):
    return {"command": command, "config": cfg, "seed": stage_seed(cfg["seed"], stage)}


def load_data(cfg):
    d = cfg["data"]
    scale = tuple(d["rating_scale"]) if d["rating_scale"] else None
    dataset = parse_ratings(d["ratings"], d["format"], scale)
    demo = parse_demographics(d["users"], dataset, d["format"], d["gender_majority"], d["age_cut"],
                              d["age_majority"], strict=d["format"] == "ml100k")
    titles = {}
    if d.get("items") and Path(d["items"]).exists():
        titles = parse_items(d["items"], dataset)
    return dataset, demo, titles


def _labels_matrix(demo, outputs):
    cols = [{"gender": demo.gender, "age": demo.age}[f] for f in outputs]
    Y = np.column_stack(cols).astype(np.int64)
    users = np.flatnonzero((Y >= 0).all(axis=1))
    return users, Y[users]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def ingest(cfg):
    dataset, demo, titles = load_data(cfg)
    payload = {
        "n_users": dataset.n_users,
        "n_items": dataset.n_items,
        "n_ratings": len(dataset),
        "rating_scale": list(dataset.rating_scale),
        "titles": len(titles),
        "majority_share": {f: demo.majority_share(f) for f in ("gender", "age")},
        "labeled_users": {f: int(len(demo.labels(f)[0])) for f in ("gender", "age")},
    }
    return artifacts.write_artifact(out_dir(cfg) / "ingest.json", "ingest", payload,
                                    **_header(cfg, "ingest", "ingest"))


def train_mf(cfg):
    dataset, _, _ = load_data(cfg)
    part = split(len(dataset), cfg["data"]["ratios"], "by-rating", stage_seed(cfg["seed"], "mf-split"))
    model = train_pmf(dataset, part.train, random_state=stage_seed(cfg["seed"], "mf"), **cfg["mf"])
    logger.info("train rmse %.4f, validation rmse %.4f, test rmse %.4f", model.train_rmse_[-1],
                rmse(model, dataset.as_array(part.validation)), rmse(model, dataset.as_array(part.test)))
    return artifacts.save_pmf(out_dir(cfg) / "factors.json", model, **_header(cfg, "train-mf", "mf"))


def train_mln(cfg):
    out = out_dir(cfg)
    pmf = artifacts.load_pmf(out / "factors.json")
    _, demo, _ = load_data(cfg)
    m = cfg["mln"]
    users, Y = _labels_matrix(demo, m["outputs"])
    X = pmf.user_factors_[users]
    part = split(len(users), cfg["data"]["ratios"], "by-user", stage_seed(cfg["seed"], "mln-split"))
    model = MLPClassifier(
        hidden_layer_sizes=tuple(m["hidden_layer_sizes"]), dropout=m["dropout"],
        learning_rate=m["learning_rate"], n_epochs=m["n_epochs"], batch_size=m["batch_size"],
        random_state=stage_seed(cfg["seed"], "mln"),
    ).fit(X[part.train], Y[part.train], X[part.validation], Y[part.validation])
    acc = {}
    for name, idx in (("train", part.train), ("validation", part.validation), ("test", part.test)):
        pred = np.atleast_2d(model.predict(X[idx]).reshape(len(idx), -1))
        acc[name] = {f: float(np.mean(pred[:, k] == Y[idx, k])) for k, f in enumerate(m["outputs"])}
    prior = {f: float(np.mean(Y[part.test, k])) for k, f in enumerate(m["outputs"])}
    extra = {"outputs": list(m["outputs"]), "accuracy": acc, "test_prior": prior}
    return artifacts.save_mlp(out / "mln.json", model, extra, **_header(cfg, "train-mln", "mln"))


def _output_index(cfg, payload):
    return payload["outputs"].index(cfg["feature"])


def unhide(cfg):
    out = out_dir(cfg)
    model, payload = artifacts.load_mlp(out / "mln.json")
    k = _output_index(cfg, payload)
    results = {}
    for name, target in (("majority", 1.0), ("minority", 0.0)):
        res = localize(model, k, LocalizeConfig(target=target, **cfg["localize"]))
        results[name] = {
            "raw": res.raw.tolist(), "normalized": res.normalized.tolist(),
            "loss_trace": [float(v) for v in res.loss_trace], "output": res.output, "target": target,
        }
    results["relevancy"] = relevancy(results["majority"]["normalized"], results["minority"]["normalized"]).tolist()
    results["feature"] = cfg["feature"]
    results["output_index"] = k
    return artifacts.write_artifact(out / f"archetypes_{cfg['feature']}.json", "archetypes", results,
                                    **_header(cfg, "unhide", "unhide"))


def load_archetypes(cfg):
    return artifacts.read_artifact(out_dir(cfg) / f"archetypes_{cfg['feature']}.json", "archetypes")[1]


def select(cfg):
    s = cfg["select"]
    if s["method"] == "deep":
        ranking = FeatureRanking("deep", load_archetypes(cfg)["relevancy"])
    else:
        pmf = artifacts.load_pmf(out_dir(cfg) / "factors.json")
        _, demo, _ = load_data(cfg)
        users, y = demo.labels(cfg["feature"])
        ranking = rank_features(pmf.user_factors_[users], y, s["method"], seed=stage_seed(cfg["seed"], "select"))
    if s["threshold"] is not None:
        selected = ranking.above(s["threshold"])
    else:
        selected = ranking.top(s["n"])
    payload = {
        "method": s["method"], "feature": cfg["feature"], "n": s["n"], "threshold": s["threshold"],
        "scores": ranking.scores.tolist(), "ranking": ranking.ranking.tolist(),
        "selected": [int(j) for j in selected],
    }
    return artifacts.write_artifact(out_dir(cfg) / f"selection_{cfg['feature']}_{s['method']}.json",
                                    "selection", payload, **_header(cfg, "select", "select"))


def evaluate(cfg):
    out = out_dir(cfg)
    pmf = artifacts.load_pmf(out / "factors.json")
    model, mpay = artifacts.load_mlp(out / "mln.json")
    arch = load_archetypes(cfg)
    _, demo, _ = load_data(cfg)
    e = cfg["experiments"]
    feature = cfg["feature"]
    seed = stage_seed(cfg["seed"], "evaluate")

    # experiment 1: the pipeline classifier and its archetypes, rankings from its training users
    users, Y = _labels_matrix(demo, mpay["outputs"])
    k = _output_index(cfg, mpay)
    part = split(len(users), cfg["data"]["ratios"], "by-user", stage_seed(cfg["seed"], "mln-split"))
    Xtr, ytr = pmf.user_factors_[users[part.train]], Y[part.train, k]
    rankings = {"deep": FeatureRanking("deep", arch["relevancy"])}
    for method in e["methods"]:
        if method != "deep":
            rankings[method] = rank_features(Xtr, ytr, method, seed=seed)
    rankings = {m: rankings[m] for m in e["methods"]}
    t1 = run_experiment_1(model, arch["majority"]["raw"], arch["minority"]["raw"], rankings, e["exp1_n"], k)
    t1.to_csv(out / f"experiment1_{feature}.csv")

    users, y = demo.labels(feature)
    X = pmf.user_factors_[users]
    deep_params = _deep_params(cfg)
    t2 = run_experiment_2(X, y, e["methods"], e["exp2_n"], e["seeds"], deep_params=deep_params)
    t2.to_csv(out / f"experiment2_{feature}.csv")
    t3 = run_experiment_3(X, y, e["methods"], e["exp3_n"], e["classifiers"], e["seeds"], deep_params=deep_params)
    t3.to_csv(out / f"experiment3_{feature}.csv")
    return t1, t2, t3


def _deep_params(cfg):
    m, loc = cfg["mln"], cfg["localize"]
    return {
        "hidden_layer_sizes": tuple(m["hidden_layer_sizes"]), "dropout": m["dropout"],
        "learning_rate": m["learning_rate"], "n_epochs": m["n_epochs"], "batch_size": m["batch_size"],
        "step": loc["step"], "iterations": loc["iterations"],
        "normalize_gradient": loc["normalize_gradient"],
    }


def explain_items(cfg):
    out = out_dir(cfg)
    pmf = artifacts.load_pmf(out / "factors.json")
    arch = load_archetypes(cfg)
    dataset, _, titles = load_data(cfg)
    it = cfg["items"]
    lists = {}
    for group in ("majority", "minority"):
        affinity = np.asarray(arch[group]["normalized"])
        chosen = select_top_n(affinity, it["n"])
        lists[group] = top_items(pmf, dataset, affinity, chosen, it["top"], it["min_ratings"], titles)
        _write_csv(out / f"items_{group}.csv", ("rank", "item_id", "title", "weight", "num_ratings"),
                   [(r["rank"], r["item_id"], r["title"], r["weight"], r["num_ratings"]) for r in lists[group]])
    return lists


def report(cfg):
    out = out_dir(cfg)
    feature = cfg["feature"]
    _, mpay = artifacts.load_mlp(out / "mln.json")
    h = mpay["history"]
    _write_csv(out / "fig09.csv", ("epoch", "train_loss", "train_accuracy", "val_accuracy"),
               [(i, h["loss"][i], h["train_accuracy"][i], h["val_accuracy"][i] if h["val_accuracy"] else "")
                for i in range(len(h["loss"]))])
    arch = load_archetypes(cfg)
    M, m = arch["majority"], arch["minority"]
    _write_csv(out / "fig10.csv", ("factor", "raw_M", "raw_m", "norm_M", "norm_m", "relevancy"),
               [(j, M["raw"][j], m["raw"][j], M["normalized"][j], m["normalized"][j], arch["relevancy"][j])
                for j in range(len(arch["relevancy"]))])
    summary = {"classifier_accuracy": mpay.get("accuracy"), "test_prior": mpay.get("test_prior")}
    for fig, exp in (("fig12", 1), ("fig13", 2), ("fig14", 3)):
        path = out / f"experiment{exp}_{feature}.csv"
        if not path.exists():
            raise artifacts.ArtifactError(f"missing artifact {path}; run evaluate first")
        table = ResultTable.from_csv(path)
        table.to_csv(out / f"{fig}.csv")
        if exp > 1:
            by = ("method", "n") if exp == 2 else ("method", "classifier")
            summary[fig] = {
                "mean_accuracy": {"/".join(map(str, k)): v for k, v in table.mean(by=by).items()},
                "deep_vs": paired_comparison(table),
            }
    return artifacts.write_artifact(out / "summary.json", "summary", summary, **_header(cfg, "report", "report"))
