"""Plain numpy classifiers for the selection benchmarks: logistic regression,
linear SVM and a Gini random forest. All are deterministic given
``random_state``.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .nn import sigmoid


def _check_binary(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError(f"X of shape {X.shape} does not match {len(y)} labels")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary 0/1")
    if len(np.unique(y)) < 2:
        raise ValueError("training labels contain a single class")
    return X, y.astype(np.int64)


def standardize_stats(X):
    """Column means and scales; zero-variance columns get scale 0 (they are dropped)."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    return mean, std


def standardize(X, mean, std):
    safe = np.where(std > 0, std, 1.0)
    return np.where(std > 0, (X - mean) / safe, 0.0)


class LogisticRegressionGD(ClassifierMixin, BaseEstimator):
    """L2-regularized logistic regression fit by full-batch gradient descent.

    Inputs are standardized with training statistics; a zero-variance
    column contributes nothing and keeps a zero coefficient. ``coef_`` is in
    standardized units.
    """

    def __init__(self, alpha=1e-2, learning_rate=0.5, max_iter=2000, tol=1e-8, standardize=True):
        self.alpha = alpha
        self.learning_rate = learning_rate
        self.max_iter = max_iter
        self.tol = tol
        self.standardize = standardize

    def fit(self, X, y):
        X, y = _check_binary(X, y)
        if self.standardize:
            self.mean_, self.scale_ = standardize_stats(X)
            Z = standardize(X, self.mean_, self.scale_)
        else:
            Z = X
        n, d = Z.shape
        w = np.zeros(d)
        b = 0.0
        for it in range(int(self.max_iter)):
            r = sigmoid(Z @ w + b) - y
            gw = Z.T @ r / n + self.alpha * w
            gb = r.mean()
            w -= self.learning_rate * gw
            b -= self.learning_rate * gb
            if max(np.abs(gw).max(initial=0.0), abs(gb)) < self.tol:
                break
        self.coef_ = w
        self.intercept_ = b
        self.n_iter_ = it + 1
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = d
        return self

    def _transform(self, X):
        X = np.asarray(X, dtype=float)
        return standardize(X, self.mean_, self.scale_) if self.standardize else X

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        return self._transform(X) @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return (sigmoid(self.decision_function(X)) >= 0.5).astype(np.int64)


class LinearSVM(ClassifierMixin, BaseEstimator):
    """Linear SVM: hinge loss plus L2, Pegasos-style stochastic subgradient steps.

    The step at update ``t`` is ``1 / (alpha * t)``. The bias is learned as
    the weight of a constant input and is regularized with the rest. Inputs
    are standardized as in :class:`LogisticRegressionGD`.
    """

    def __init__(self, alpha=1e-2, n_epochs=50, random_state=0, standardize=True):
        self.alpha = alpha
        self.n_epochs = n_epochs
        self.random_state = random_state
        self.standardize = standardize

    def fit(self, X, y):
        X, y = _check_binary(X, y)
        if self.standardize:
            self.mean_, self.scale_ = standardize_stats(X)
            Z = standardize(X, self.mean_, self.scale_)
        else:
            Z = X
        Z = np.column_stack([Z, np.ones(len(Z))])
        s = 2.0 * y - 1.0
        rng = np.random.default_rng(self.random_state)
        w = np.zeros(Z.shape[1])
        t = 0
        for _ in range(int(self.n_epochs)):
            for k in rng.permutation(len(Z)):
                t += 1
                eta = 1.0 / (self.alpha * t)
                margin = s[k] * (Z[k] @ w)
                w *= 1.0 - eta * self.alpha
                if margin < 1.0:
                    w += eta * s[k] * Z[k]
        self.coef_ = w[:-1]
        self.intercept_ = w[-1]
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = np.asarray(X, dtype=float)
        Z = standardize(X, self.mean_, self.scale_) if self.standardize else X
        return Z @ self.coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_function(X) >= 0).astype(np.int64)


def gini(counts):
    """Gini impurity ``1 - sum_c p_c^2`` of a class-count vector."""
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    return 0.0 if n == 0 else 1.0 - float(np.sum((counts / n) ** 2))


def best_split(X, y, features):
    """Best Gini split over ``features``.

    Returns ``(feature, threshold, weighted_impurity)`` minimizing
    ``(n_L gini_L + n_R gini_R) / n`` over thresholds halfway between distinct
    consecutive values, or ``None`` when no feature can split. Ties keep the
    earlier feature in ``features`` and the smaller threshold.
    """
    features = np.asarray(features, dtype=np.int64)
    n = len(y)
    if n < 2 or len(features) == 0:
        return None
    cols = X[:, features]
    order = np.argsort(cols, axis=0, kind="stable")
    xs = np.take_along_axis(cols, order, axis=0)
    ones = np.cumsum(y[order], axis=0)[:-1].astype(float)
    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    p_l = ones / n_left
    p_r = (y.sum() - ones) / n_right
    # n_L * gini_L = n_L * 2 p (1 - p) for two classes
    imp = (n_left * 2 * p_l * (1 - p_l) + n_right * 2 * p_r * (1 - p_r)) / n
    imp = np.where(xs[1:] > xs[:-1], imp, np.inf)
    per_feature = imp.min(axis=0)
    f = int(np.argmin(per_feature))
    if not np.isfinite(per_feature[f]):
        return None
    k = int(np.argmin(imp[:, f]))
    lo, hi = xs[k, f], xs[k + 1, f]
    thr = (lo + hi) / 2
    if thr >= hi:  # adjacent floats
        thr = lo
    return int(features[f]), float(thr), float(per_feature[f])


class DecisionTree(ClassifierMixin, BaseEstimator):
    """Binary CART classifier with Gini impurity.

    ``max_features`` features are drawn without replacement at each node
    (``None`` for all, ``"sqrt"`` for ``round(sqrt(d))``). ``max_depth=0``
    yields a single leaf predicting the training majority.
    """

    def __init__(self, max_depth=10, max_features=None, min_samples_split=2, random_state=0):
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_split = min_samples_split
        self.random_state = random_state

    def _n_candidates(self, d):
        if self.max_features is None:
            return d
        if self.max_features == "sqrt":
            return max(1, int(round(np.sqrt(d))))
        return max(1, min(d, int(self.max_features)))

    def fit(self, X, y, rng=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y).astype(np.int64)
        rng = np.random.default_rng(self.random_state) if rng is None else rng
        d = X.shape[1]
        m = self._n_candidates(d)
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(idx):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(float(y[idx].mean()) if len(idx) else 0.0)
            return len(feature) - 1

        root = new_node(np.arange(len(y)))
        stack = [(root, np.arange(len(y)), 0)]
        while stack:
            node, idx, depth = stack.pop()
            ys = y[idx]
            if depth >= self.max_depth or len(idx) < self.min_samples_split or ys.min() == ys.max():
                continue
            feats = np.arange(d) if m == d else rng.choice(d, size=m, replace=False)
            found = best_split(X[idx], ys, feats)
            if found is None:
                continue
            f, thr, imp = found
            if imp >= gini(np.bincount(ys, minlength=2)):
                continue
            go_left = X[idx, f] <= thr
            feature[node], threshold[node] = f, thr
            left[node] = new_node(idx[go_left])
            right[node] = new_node(idx[~go_left])
            stack.append((right[node], idx[~go_left], depth + 1))
            stack.append((left[node], idx[go_left], depth + 1))

        self.feature_ = np.array(feature, dtype=np.int64)
        self.threshold_ = np.array(threshold)
        self.left_ = np.array(left, dtype=np.int64)
        self.right_ = np.array(right, dtype=np.int64)
        self.value_ = np.array(value)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = d
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "feature_")
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature_[node] >= 0
        while active.any():
            cur = node[active]
            go_left = X[active, self.feature_[cur]] <= self.threshold_[cur]
            node[active] = np.where(go_left, self.left_[cur], self.right_[cur])
            active = self.feature_[node] >= 0
        p = self.value_[node]
        return np.column_stack([1 - p, p])

    def predict(self, X):
        p = self.predict_proba(X)[:, 1]
        return (p >= 0.5).astype(np.int64)


class RandomForest(ClassifierMixin, BaseEstimator):
    """Bagged Gini trees with per-split feature subsampling and majority vote.

    Each tree sees a bootstrap sample of the rows; the forest predicts the
    class chosen by more than half of the trees (ties go to class 1).
    """

    def __init__(self, n_estimators=100, max_depth=10, max_features="sqrt", bootstrap=True,
                 random_state=0):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y).astype(np.int64)
        if len(np.unique(y)) < 2:
            raise ValueError("training labels contain a single class")
        rng = np.random.default_rng(self.random_state)
        self.estimators_ = []
        for _ in range(int(self.n_estimators)):
            rows = rng.integers(0, len(X), len(X)) if self.bootstrap else np.arange(len(X))
            tree = DecisionTree(max_depth=self.max_depth, max_features=self.max_features)
            self.estimators_.append(tree.fit(X[rows], y[rows], rng=rng))
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def votes(self, X):
        check_is_fitted(self, "estimators_")
        return np.mean([tree.predict(X) for tree in self.estimators_], axis=0)

    def predict(self, X):
        return (self.votes(X) >= 0.5).astype(np.int64)
