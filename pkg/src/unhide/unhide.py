"""Archetypal factor vectors by gradient localization, and what to do with them.

A trained classifier ``h`` maps a user-factor vector to the probability of
belonging to the majority group. Localization searches the input space for a
vector ``p`` with ``h(p)`` close to a target ``t`` by descending
``F_t(p) = (t - h(p))^2 / 2``. The normalized archetypes of both groups give
per-factor affinities; their absolute difference ranks factors by how well
they separate the groups.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted

from .data import split
from .nn import MLPClassifier

RMS_EPS = 1e-5


@dataclass(frozen=True)
class LocalizeConfig:
    """Settings for :func:`localize`.

    ``init`` is ``"zeros"`` or ``"uniform"`` (uniform in ``[-init_scale,
    init_scale]`` from ``seed``). ``algorithm_sign`` flips the step so that the
    raw loss gradient is *added* to the input, which ascends ``F_t``; it is
    kept only to compare against that convention.
    """

    target: float = 1.0
    step: float = 0.1
    iterations: int = 20
    init: str = "zeros"
    init_scale: float = 0.1
    seed: int = 0
    normalize_gradient: bool = True
    stop_loss: float = None
    algorithm_sign: bool = False

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.target not in (0, 1):
            raise ValueError("target must be 0 or 1")
        if self.init not in ("zeros", "uniform"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class ArchetypeResult:
    raw: np.ndarray
    normalized: np.ndarray
    loss_trace: list
    output: float
    target: float

    @property
    def initial_loss(self):
        return self.loss_trace[0]

    @property
    def final_loss(self):
        return self.loss_trace[-1]


def localize(model, output_index=0, config=None):
    """Optimize a classifier input towards ``config.target`` for one output.

    Each iteration moves ``p`` along ``d = (t - h(p)) * grad h(p)``, the
    negative gradient of ``F_t``; with ``normalize_gradient`` the direction is
    first divided by ``sqrt(mean(d^2)) + 1e-5``. ``loss_trace[k]`` is ``F_t``
    before iteration ``k``; the last entry is the loss at the returned vector.
    Dropout is never active here.
    """
    cfg = config or LocalizeConfig()
    K = model.n_features_in_
    if cfg.init == "zeros":
        p = np.zeros(K)
    else:
        p = np.random.default_rng(cfg.seed).uniform(-cfg.init_scale, cfg.init_scale, K)
    t = float(cfg.target)
    trace = []
    for _ in range(cfg.iterations):
        h = float(model.forward(p)[output_index])
        loss = 0.5 * (t - h) ** 2
        trace.append(loss)
        if cfg.stop_loss is not None and loss <= cfg.stop_loss:
            break
        d = (t - h) * model.input_gradient(p, output_index)
        if cfg.normalize_gradient:
            d = d / (np.sqrt(np.mean(d * d)) + RMS_EPS)
        if cfg.algorithm_sign:
            d = -d
        p = p + cfg.step * d
        if not np.isfinite(p).all():
            raise FloatingPointError("localization produced a non-finite input")
    else:
        h = float(model.forward(p)[output_index])
        trace.append(0.5 * (t - h) ** 2)
    return ArchetypeResult(raw=p, normalized=min_max_normalize(p), loss_trace=trace, output=h, target=t)


def min_max_normalize(p):
    """Rescale to [0, 1] by min and max; a constant vector maps to all 0.5."""
    p = np.asarray(p, dtype=float)
    lo, hi = p.min(), p.max()
    if hi == lo:
        return np.full_like(p, 0.5)
    return (p - lo) / (hi - lo)


def relevancy(majority, minority):
    """Componentwise ``|majority - minority|`` of two normalized archetypes."""
    a = np.asarray(majority, dtype=float)
    b = np.asarray(minority, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return np.abs(a - b)


def rank_indices(scores):
    """Indices by descending score, ties to the lower index."""
    scores = np.asarray(scores, dtype=float)
    return np.argsort(-scores, kind="stable")


def select_top_n(scores, n):
    scores = np.asarray(scores, dtype=float)
    if not 1 <= n <= len(scores):
        raise ValueError(f"N must be in [1, {len(scores)}], got {n}")
    return rank_indices(scores)[:n]


def select_threshold(scores, threshold):
    """Ascending indices whose score is strictly above ``threshold``."""
    return np.flatnonzero(np.asarray(scores, dtype=float) > threshold)


@dataclass(frozen=True)
class FeatureRanking:
    method: str
    scores: np.ndarray
    ranking: np.ndarray = field(default=None)

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        object.__setattr__(self, "scores", scores)
        if self.ranking is None:
            object.__setattr__(self, "ranking", rank_indices(scores))
        else:
            ranking = np.asarray(self.ranking, dtype=np.int64)
            if sorted(ranking.tolist()) != list(range(len(scores))):
                raise ValueError("ranking must be a permutation of the factor indices")
            object.__setattr__(self, "ranking", ranking)

    def top(self, n):
        if not 1 <= n <= len(self.scores):
            raise ValueError(f"N must be in [1, {len(self.scores)}], got {n}")
        return self.ranking[:n]

    def above(self, threshold):
        return select_threshold(self.scores, threshold)


def item_weight(archetype, item_factors, selected):
    """Partial dot product of a normalized archetype and item factors over ``selected``."""
    archetype = np.asarray(archetype, dtype=float)
    item_factors = np.asarray(item_factors, dtype=float)
    selected = np.asarray(selected, dtype=np.int64)
    K = archetype.shape[-1]
    if selected.size and (selected.min() < 0 or selected.max() >= K):
        raise IndexError("selected factor index out of range")
    if selected.size == 0:
        return np.zeros(item_factors.shape[:-1]) if item_factors.ndim > 1 else 0.0
    return item_factors[..., selected] @ archetype[selected]


def top_items(pmf, dataset, archetype, selected, top=10, min_ratings=75, titles=None):
    """Items with at least ``min_ratings`` ratings ranked by :func:`item_weight`.

    Returns a list of dicts with ``rank, item, item_id, title, weight,
    num_ratings``. Ties go to the lower item index.
    """
    counts = dataset.item_counts()
    weights = item_weight(archetype, pmf.item_factors_, selected)
    eligible = np.flatnonzero(counts >= min_ratings)
    order = eligible[np.argsort(-weights[eligible], kind="stable")][:top]
    titles = titles or {}
    out = []
    for rank, i in enumerate(order, start=1):
        item_id = dataset.item_ids[i]
        out.append({
            "rank": rank,
            "item": int(i),
            "item_id": item_id,
            "title": titles.get(item_id, ""),
            "weight": float(weights[i]),
            "num_ratings": int(counts[i]),
        })
    return out


def group_archetypes(model, output_index=0, **config):
    """Localize both targets; returns ``(majority, minority)`` results."""
    major = localize(model, output_index, LocalizeConfig(target=1.0, **config))
    minor = localize(model, output_index, LocalizeConfig(target=0.0, **config))
    return major, minor


class DeepSelector(SelectorMixin, BaseEstimator):
    """Feature selector driven by archetypes of a neural demographic classifier.

    ``fit`` trains an :class:`~unhide.nn.MLPClassifier` (unless ``estimator``
    is an already fitted one), localizes the majority and minority
    archetypes, and scores factors by ``score`` (``"relevancy"``,
    ``"majority"`` or ``"minority"`` affinity). Keep either the top
    ``n_features_to_select`` or, when ``threshold`` is set, every factor
    scoring strictly above it.
    """

    def __init__(self, n_features_to_select=None, threshold=None, score="relevancy",
                 estimator=None, output_index=0, hidden_layer_sizes=(10,), dropout=0.3,
                 n_epochs=200, batch_size=None, learning_rate=0.001, validation_fraction=0.125,
                 step=0.1, iterations=20, normalize_gradient=True, random_state=0):
        self.n_features_to_select = n_features_to_select
        self.threshold = threshold
        self.score = score
        self.estimator = estimator
        self.output_index = output_index
        self.hidden_layer_sizes = hidden_layer_sizes
        self.dropout = dropout
        self.n_epochs = n_epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.validation_fraction = validation_fraction
        self.step = step
        self.iterations = iterations
        self.normalize_gradient = normalize_gradient
        self.random_state = random_state

    def fit(self, X, y=None, X_val=None, y_val=None):
        if self.estimator is not None:
            check_is_fitted(self.estimator, "layers_")
            self.estimator_ = self.estimator
        else:
            X = np.asarray(X, dtype=float)
            y = np.asarray(y)
            if X_val is None and self.validation_fraction:
                # carve a validation part out of X for the best-epoch snapshot
                frac = float(self.validation_fraction)
                part = split(len(X), (1 - frac, frac / 2, frac / 2), seed=self.random_state)
                hold = np.concatenate([part.validation, part.test])
                X, y, X_val, y_val = X[part.train], y[part.train], X[hold], y[hold]
            self.estimator_ = MLPClassifier(
                hidden_layer_sizes=self.hidden_layer_sizes, dropout=self.dropout,
                n_epochs=self.n_epochs, batch_size=self.batch_size,
                learning_rate=self.learning_rate, random_state=self.random_state,
            ).fit(X, y, X_val, y_val)
        self.n_features_in_ = self.estimator_.n_features_in_
        self.majority_, self.minority_ = group_archetypes(
            self.estimator_, self.output_index, step=self.step, iterations=self.iterations,
            normalize_gradient=self.normalize_gradient,
        )
        self.relevancy_ = relevancy(self.majority_.normalized, self.minority_.normalized)
        scores = {
            "relevancy": self.relevancy_,
            "majority": self.majority_.normalized,
            "minority": self.minority_.normalized,
        }[self.score]
        self.ranking_ = FeatureRanking("deep", scores)
        return self

    @property
    def scores_(self):
        return self.ranking_.scores

    def _get_support_mask(self):
        check_is_fitted(self, "ranking_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        if self.threshold is not None:
            mask[self.ranking_.above(self.threshold)] = True
        else:
            n = self.n_features_to_select or self.n_features_in_ // 2
            mask[self.ranking_.top(n)] = True
        return mask
