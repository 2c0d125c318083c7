import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unhide.classifiers import (
    DecisionTree,
    LinearSVM,
    LogisticRegressionGD,
    RandomForest,
    best_split,
    gini,
)
from unhide.experiments import _columns


def separable(rng, n=40):
    X = rng.normal(size=(n, 2))
    y = (X[:, 0] - X[:, 1] > 0).astype(int)
    X += np.where(y[:, None] == 1, 0.3, -0.3) * np.array([1, -1])
    return X, y


@pytest.mark.parametrize("cls", [LogisticRegressionGD, LinearSVM])
def test_linear_models_fit_a_separable_toy(cls, rng):
    X, y = separable(rng)
    model = cls(alpha=1e-4).fit(X, y)
    assert model.score(X, y) == 1.0


def test_stump_on_a_threshold_split():
    X = np.array([[0.1], [0.4], [0.35], [0.8], [0.9], [0.7]])
    y = np.array([0, 0, 0, 1, 1, 1])
    tree = DecisionTree(max_depth=1).fit(X, y)
    assert tree.score(X, y) == 1.0
    assert tree.feature_[0] == 0 and 0.4 < tree.threshold_[0] < 0.7


def test_degenerate_forest_predicts_majority(rng):
    X = rng.normal(size=(30, 3))
    y = np.array([1] * 20 + [0] * 10)
    forest = RandomForest(n_estimators=1, max_depth=0, bootstrap=False).fit(X, y)
    assert forest.predict(rng.normal(size=(15, 3))).tolist() == [1] * 15


def test_gini_values():
    assert gini([5, 5]) == 0.5 and gini([3, 0]) == 0.0 and gini([0, 0]) == 0.0


def exhaustive_split(X, y):
    best = np.inf
    n = len(y)
    for f in range(X.shape[1]):
        vals = sorted(set(X[:, f]))
        for lo, hi in zip(vals, vals[1:]):
            t = (lo + hi) / 2
            left, right = y[X[:, f] <= t], y[X[:, f] > t]
            imp = (len(left) * gini(np.bincount(left, minlength=2))
                   + len(right) * gini(np.bincount(right, minlength=2))) / n
            best = min(best, imp)
    return best


@settings(max_examples=300, deadline=None)
@given(n=st.integers(2, 20), d=st.integers(1, 4), seed=st.integers(0, 10_000))
def test_best_split_matches_exhaustive_oracle(n, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, (n, d)).astype(float)
    y = rng.integers(0, 2, n)
    found = best_split(X, y, np.arange(d))
    want = exhaustive_split(X, y)
    if not np.isfinite(want):
        assert found is None
        return
    f, t, imp = found
    assert imp == pytest.approx(want, abs=1e-12)
    left, right = y[X[:, f] <= t], y[X[:, f] > t]
    check = (len(left) * gini(np.bincount(left, minlength=2))
             + len(right) * gini(np.bincount(right, minlength=2))) / n
    assert check == pytest.approx(imp, abs=1e-12)


@pytest.mark.parametrize("make", [
    lambda: LogisticRegressionGD(),
    lambda: LinearSVM(random_state=4),
    lambda: RandomForest(n_estimators=10, random_state=4),
])
def test_classifiers_are_deterministic(make, rng):
    X = rng.normal(size=(120, 6))
    y = (X[:, 0] + rng.normal(size=120) > 0).astype(int)
    a, b = make().fit(X, y), make().fit(X, y)
    assert np.array_equal(a.predict(X), b.predict(X))
    if hasattr(a, "decision_function"):
        assert np.array_equal(a.decision_function(X), b.decision_function(X))


def test_zero_mask_and_column_subset_agree_for_logistic(rng):
    X = rng.normal(size=(150, 8))
    y = (X[:, 1] - X[:, 5] + rng.normal(size=150) > 0).astype(int)
    keep = np.array([5, 1, 6])
    sub = LogisticRegressionGD().fit(_columns(X, keep, "column-subset"), y)
    zero = LogisticRegressionGD().fit(_columns(X, keep, "zero-mask"), y)
    np.testing.assert_allclose(zero.coef_[np.sort(keep)], sub.coef_, rtol=0, atol=1e-12)
    assert np.all(np.delete(zero.coef_, keep) == 0.0)
    assert np.array_equal(zero.predict(_columns(X, keep, "zero-mask")),
                          sub.predict(_columns(X, keep, "column-subset")))


@pytest.mark.parametrize("cls", [LogisticRegressionGD, LinearSVM, RandomForest])
def test_single_class_is_rejected(cls):
    with pytest.raises(ValueError):
        cls().fit(np.zeros((5, 2)), np.ones(5))


def test_forest_beats_chance_on_a_nonlinear_problem(rng):
    X = rng.uniform(-1, 1, size=(400, 4))
    y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(int)
    forest = RandomForest(n_estimators=30, max_features=None, random_state=0).fit(X[:300], y[:300])
    assert forest.score(X[300:], y[300:]) > 0.9
