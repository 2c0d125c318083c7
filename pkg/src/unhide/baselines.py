"""Reference feature rankings: logistic coefficients, information gain,
variance, PCA loadings and a seeded random order.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted

from .classifiers import LogisticRegressionGD, standardize, standardize_stats
from .unhide import FeatureRanking

METHODS = ("logistic", "entropy", "variance", "pca", "random")


def _supervised_labels(y):
    y = np.asarray(y)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary 0/1")
    if len(np.unique(y)) < 2:
        raise ValueError("labels contain a single class")
    return y.astype(np.int64)


def variance_scores(X):
    return np.var(X, axis=0, ddof=1) if len(X) > 1 else np.zeros(X.shape[1])


def equal_width_bins(col, bins):
    lo, hi = col.min(), col.max()
    if hi == lo:
        return np.zeros(len(col), dtype=np.int64)
    return np.minimum(((col - lo) / (hi - lo) * bins).astype(np.int64), bins - 1)


def entropy_bits(labels):
    counts = np.bincount(labels)
    p = counts[counts > 0] / len(labels)
    return float(-np.sum(p * np.log2(p)))


def information_gain(col, y, bins=10):
    """``I(bin(col); y)`` in bits with ``bins`` equal-width bins over the observed range."""
    b = equal_width_bins(np.asarray(col, dtype=float), bins)
    h_cond = 0.0
    for v in np.unique(b):
        sel = b == v
        h_cond += sel.mean() * entropy_bits(y[sel])
    return entropy_bits(y) - h_cond


def entropy_scores(X, y, bins=10):
    if bins < 2:
        raise ValueError("bins must be >= 2")
    y = _supervised_labels(y)
    return np.array([information_gain(X[:, j], y, bins) for j in range(X.shape[1])])


def logistic_scores(X, y, alpha=1e-2):
    y = _supervised_labels(y)
    model = LogisticRegressionGD(alpha=alpha).fit(X, y)
    return np.abs(model.coef_)


def pca_scores(X, coverage=0.9, scale=False):
    """Explained-variance-weighted absolute loadings over the leading components.

    Uses the smallest number of components of the centered data (also scaled
    to unit variance when ``scale`` is set) whose explained-variance ratios
    sum to at least ``coverage``. Zero-variance columns score 0.
    """
    if not 0 < coverage <= 1:
        raise ValueError("coverage must be in (0, 1]")
    mean, std = standardize_stats(X)
    keep = std > 0
    scores = np.zeros(X.shape[1])
    if not keep.any():
        return scores
    Z = (standardize(X, mean, std) if scale else X - mean)[:, keep]
    cov = np.atleast_2d(np.cov(Z, rowvar=False))
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    ratio = evals / evals.sum()
    m = int(np.searchsorted(np.cumsum(ratio), coverage - 1e-12) + 1)
    m = min(m, len(ratio))
    scores[keep] = np.abs(evecs[:, :m]) @ ratio[:m]
    return scores


def random_ranking(n_features, seed=0):
    return np.random.default_rng(seed).permutation(n_features)


def rank_features(X, y=None, method="variance", bins=10, coverage=0.9, alpha=1e-2, seed=0,
                  pca_scale=False):
    """Score and rank the columns of ``X`` with one of :data:`METHODS`.

    ``y`` is required by ``logistic`` and ``entropy`` and ignored otherwise.
    For ``random`` the ranking is a seeded permutation and the score of a
    column is ``K - position``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or not np.isfinite(X).all():
        raise ValueError("X must be a finite 2-D array")
    if method == "variance":
        return FeatureRanking(method, variance_scores(X))
    if method == "entropy":
        return FeatureRanking(method, entropy_scores(X, y, bins))
    if method == "logistic":
        return FeatureRanking(method, logistic_scores(X, y, alpha))
    if method == "pca":
        return FeatureRanking(method, pca_scores(X, coverage, pca_scale))
    if method == "random":
        K = X.shape[1]
        perm = random_ranking(K, seed)
        scores = np.empty(K)
        scores[perm] = K - np.arange(K)
        return FeatureRanking(method, scores, perm)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


class BaselineSelector(SelectorMixin, BaseEstimator):
    """Keep the ``n_features_to_select`` best columns under a baseline ranking."""

    def __init__(self, method="variance", n_features_to_select=None, bins=10, coverage=0.9,
                 alpha=1e-2, random_state=0):
        self.method = method
        self.n_features_to_select = n_features_to_select
        self.bins = bins
        self.coverage = coverage
        self.alpha = alpha
        self.random_state = random_state

    def fit(self, X, y=None):
        self.ranking_ = rank_features(X, y, self.method, self.bins, self.coverage, self.alpha,
                                      self.random_state)
        self.n_features_in_ = len(self.ranking_.scores)
        return self

    @property
    def scores_(self):
        return self.ranking_.scores

    def _get_support_mask(self):
        check_is_fitted(self, "ranking_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.ranking_.top(self.n_features_to_select or self.n_features_in_ // 2)] = True
        return mask
