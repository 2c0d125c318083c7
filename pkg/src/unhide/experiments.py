"""Selection benchmarks: archetype masking, and classifier accuracy on
selected factor subsets over paired by-user splits.
"""

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .baselines import rank_features
from .classifiers import LinearSVM, LogisticRegressionGD, RandomForest
from .data import split
from .nn import MLPClassifier
from .unhide import DeepSelector

logger = logging.getLogger(__name__)

ALL_METHODS = ("deep", "logistic", "entropy", "variance", "pca", "random")
RESULT_COLUMNS = ("method", "n", "classifier", "seed", "split", "accuracy")
ARCHETYPE_COLUMNS = ("method", "n", "target", "output")


def accuracy(predictions, labels):
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {labels.shape}")
    if predictions.size == 0:
        raise ValueError("accuracy of an empty set is undefined")
    return float(np.mean(predictions == labels))


def balanced_accuracy(predictions, labels):
    """Mean per-class recall: the expected accuracy on a class-balanced resample."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    return float(np.mean([np.mean(predictions[labels == c] == c) for c in np.unique(labels)]))


@dataclass
class ResultTable:
    columns: tuple = RESULT_COLUMNS
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def add(self, **row):
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def select(self, **where):
        return [r for r in self.rows if all(r[k] == v for k, v in where.items())]

    def mean(self, value="accuracy", by=("method", "n")):
        """Mean of ``value`` grouped by the ``by`` columns, keyed by tuples."""
        groups = {}
        for r in self.rows:
            groups.setdefault(tuple(r[k] for k in by), []).append(r[value])
        return {k: float(np.mean(v)) for k, v in groups.items()}

    def to_csv(self, path=None):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in self.columns])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            columns = tuple(reader.fieldnames)
            table = cls(columns=columns)
            for row in reader:
                table.rows.append({k: _parse_cell(v) for k, v in row.items()})
        return table


def _parse_cell(v):
    for kind in (int, float):
        try:
            return kind(v)
        except ValueError:
            pass
    return v


def make_classifier(name, seed=0, **params):
    """Fresh classifier by short name: ``mlp``, ``logistic``, ``svm`` or ``forest``."""
    factories = {
        "mlp": lambda: MLPClassifier(random_state=seed, **params),
        "logistic": lambda: LogisticRegressionGD(**params),
        "svm": lambda: LinearSVM(random_state=seed, **params),
        "forest": lambda: RandomForest(random_state=seed, **params),
    }
    if name not in factories:
        raise ValueError(f"unknown classifier {name!r}")
    return factories[name]()


def fit_rankings(X, y, methods=ALL_METHODS, seed=0, X_val=None, y_val=None, deep_params=None):
    """Rank factors with every method using only the given (training) rows."""
    out = {}
    for method in methods:
        if method == "deep":
            sel = DeepSelector(random_state=seed, **(deep_params or {}))
            out[method] = sel.fit(X, y, X_val, y_val).ranking_
        else:
            out[method] = rank_features(X, y, method, seed=seed)
    return out


def run_experiment_1(model, majority, minority, rankings, n_values=range(1, 21), output_index=0):
    """Feed zero-masked archetypes through the classifier that produced them.

    For every method and ``N`` both raw archetypes keep only the top-``N``
    factors of that method's ranking; rows record the classifier output for
    each target (1 = majority, 0 = minority).
    """
    table = ResultTable(columns=ARCHETYPE_COLUMNS)
    archetypes = ((1, np.asarray(getattr(majority, "raw", majority))),
                  (0, np.asarray(getattr(minority, "raw", minority))))
    for method, ranking in rankings.items():
        for n in n_values:
            keep = ranking.top(n) if n > 0 else np.array([], dtype=np.int64)
            for target, p in archetypes:
                masked = np.zeros_like(p)
                masked[keep] = p[keep]
                out = float(model.forward(masked)[output_index])
                table.add(method=method, n=int(n), target=target, output=out)
    return table


@dataclass(frozen=True)
class ExperimentGrid:
    methods: tuple = ALL_METHODS
    n_values: tuple = (5, 10, 20, 30, 40, 50, 60, 70)
    classifiers: tuple = ("mlp",)
    seeds: tuple = (0, 1, 2, 3, 4)
    masking: str = "column-subset"
    ratios: tuple = (0.7, 0.1, 0.2)

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.masking not in ("column-subset", "zero-mask"):
            raise ValueError(f"unknown masking mode {self.masking!r}")


def _columns(X, keep, masking):
    # a selection is a set; keeping index order makes N=K identical across methods
    keep = np.sort(keep)
    if masking == "column-subset":
        return X[:, keep]
    Z = np.zeros_like(X)
    Z[:, keep] = X[:, keep]
    return Z


def run_grid(X, y, grid, rankings=None, deep_params=None, classifier_params=None):
    """Accuracy of every (method, N, classifier) cell for every seed.

    Each seed fixes one by-user split shared by all methods and classifiers.
    Unless ``rankings`` is given, each method ranks factors from that seed's
    training rows only (the deep selector also uses the validation rows for
    its snapshot). Test accuracy is recorded; the balanced accuracy is kept
    as an extra row field.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(np.int64)
    K = X.shape[1]
    if any(not 1 <= n <= K for n in grid.n_values):
        raise ValueError(f"N values must lie in [1, {K}]")
    classifier_params = classifier_params or {}
    table = ResultTable()
    for seed in grid.seeds:
        part = split(len(X), grid.ratios, "by-user", seed)
        tr, va, te = part.train, part.validation, part.test
        if len(np.unique(y[tr])) < 2 or len(te) == 0:
            table.errors.append({"seed": seed, "error": "degenerate split"})
            continue
        ranks = rankings or fit_rankings(X[tr], y[tr], grid.methods, seed, X[va], y[va], deep_params)
        for method in grid.methods:
            for n in grid.n_values:
                keep = ranks[method].top(n)
                Xs = _columns(X, keep, grid.masking)
                for name in grid.classifiers:
                    clf = make_classifier(name, seed, **classifier_params.get(name, {}))
                    if name == "mlp":
                        clf.fit(Xs[tr], y[tr], Xs[va], y[va])
                    else:
                        clf.fit(Xs[tr], y[tr])
                    pred = clf.predict(Xs[te])
                    table.add(method=method, n=int(n), classifier=name, seed=int(seed), split="test",
                              accuracy=accuracy(pred, y[te]),
                              balanced_accuracy=balanced_accuracy(pred, y[te]))
                    logger.debug("%s", table.rows[-1])
    return table


def run_experiment_2(X, y, methods=ALL_METHODS, n_values=(5, 10, 20, 30, 40, 50, 60, 70),
                     seeds=(0, 1, 2, 3, 4), rankings=None, **kwargs):
    """Fresh MLP per (method, N, seed) on the selected columns."""
    grid = ExperimentGrid(methods=tuple(methods), n_values=tuple(n_values), classifiers=("mlp",),
                          seeds=tuple(seeds))
    return run_grid(X, y, grid, rankings, **kwargs)


def run_experiment_3(X, y, methods=ALL_METHODS, n=50, classifiers=("logistic", "svm", "forest", "mlp"),
                     seeds=(0, 1, 2, 3, 4), rankings=None, **kwargs):
    """Several classifiers per (method, seed) at a fixed number of factors."""
    grid = ExperimentGrid(methods=tuple(methods), n_values=(n,), classifiers=tuple(classifiers),
                          seeds=tuple(seeds))
    return run_grid(X, y, grid, rankings, **kwargs)


def paired_comparison(table, reference="deep", cell=("n", "classifier", "seed")):
    """Per-method ``{"wins", "losses", "ties"}`` of ``reference`` over matched cells."""
    ref = {tuple(r[k] for k in cell): r["accuracy"] for r in table.select(method=reference)}
    counts = {}
    for r in table.rows:
        if r["method"] == reference:
            continue
        key = tuple(r[k] for k in cell)
        if key not in ref:
            continue
        c = counts.setdefault(r["method"], {"wins": 0, "losses": 0, "ties": 0})
        diff = ref[key] - r["accuracy"]
        c["wins" if diff > 0 else "losses" if diff < 0 else "ties"] += 1
    return counts

