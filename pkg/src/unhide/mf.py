"""Probabilistic matrix factorization trained by per-rating SGD."""

import logging

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import DivergenceError

logger = logging.getLogger(__name__)


@njit(cache=True)
def _sgd_epoch(P, Q, users, items, values, order, lr, reg):
    K = P.shape[1]
    for t in order:
        u = users[t]
        i = items[t]
        pred = 0.0
        for k in range(K):
            pred += P[u, k] * Q[i, k]
        e = values[t] - pred
        for k in range(K):
            pu = P[u, k]
            qi = Q[i, k]
            P[u, k] = pu + lr * (e * qi - reg * pu)
            Q[i, k] = qi + lr * (e * pu - reg * qi)


def sgd_step(p, q, r, lr, reg):
    """One regularized SGD update for a single rating; returns new ``(p, q)``.

    Both updates use the pre-step vectors.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    e = r - p @ q
    return p + lr * (e * q - reg * p), q + lr * (e * p - reg * q)


def _check_ratings(X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != 3:
        raise ValueError(f"ratings must be an (n, 3) array of (user, item, rating), got {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("ratings contain non-finite values")
    return X


def squared_error(P, Q, X):
    """Sum of squared residuals ``(r - p_u . q_i)^2`` over rating rows."""
    u = X[:, 0].astype(np.int64)
    i = X[:, 1].astype(np.int64)
    pred = np.einsum("ij,ij->i", P[u], Q[i])
    return float(np.sum((X[:, 2] - pred) ** 2))


class PMF(BaseEstimator):
    """Matrix factorization ``R ~ P Q^T`` without bias terms.

    Parameters
    ----------
    n_factors : int
        Latent dimension K.
    learning_rate : float
        SGD step (gamma).
    reg : float
        L2 penalty (lambda).
    n_epochs : int
        Passes over the training ratings; the visit order is reshuffled
        every epoch from ``random_state``.
    init_scale : float
        Factors start uniform in ``[-init_scale, init_scale]``.

    Attributes
    ----------
    user_factors_, item_factors_ : ndarray of shape (U, K), (I, K)
    loss_trace_ : list of float
        Training squared-error sum after each epoch.
    train_rmse_ : list of float
        Training RMSE before the first epoch and after each epoch.
    """

    def __init__(self, n_factors=100, learning_rate=0.01, reg=0.05, n_epochs=50,
                 init_scale=0.1, random_state=0):
        self.n_factors = n_factors
        self.learning_rate = learning_rate
        self.reg = reg
        self.n_epochs = n_epochs
        self.init_scale = init_scale
        self.random_state = random_state

    def _validate_params(self):
        if int(self.n_factors) < 1:
            raise ValueError("n_factors must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not self.reg >= 0:
            raise ValueError("reg must be >= 0")
        if int(self.n_epochs) < 1:
            raise ValueError("n_epochs must be >= 1")

    def fit(self, X, y=None, n_users=None, n_items=None, init_factors=None):
        """Fit on an ``(n, 3)`` array of ``(user, item, rating)`` rows.

        ``n_users``/``n_items`` default to one past the largest index seen.
        ``init_factors`` optionally supplies the starting ``(P, Q)``.
        """
        self._validate_params()
        X = _check_ratings(X)
        if len(X) == 0:
            raise ValueError("training set is empty")
        users = X[:, 0].astype(np.int64)
        items = X[:, 1].astype(np.int64)
        values = np.ascontiguousarray(X[:, 2])
        n_users = int(users.max()) + 1 if n_users is None else int(n_users)
        n_items = int(items.max()) + 1 if n_items is None else int(n_items)
        if users.min() < 0 or users.max() >= n_users or items.min() < 0 or items.max() >= n_items:
            raise IndexError("rating indices out of range")

        rng = np.random.default_rng(self.random_state)
        K = int(self.n_factors)
        if init_factors is None:
            s = self.init_scale
            P = rng.uniform(-s, s, size=(n_users, K))
            Q = rng.uniform(-s, s, size=(n_items, K))
        else:
            P = np.array(init_factors[0], dtype=float).reshape(n_users, K)
            Q = np.array(init_factors[1], dtype=float).reshape(n_items, K)

        self.train_rmse_ = [np.sqrt(squared_error(P, Q, X) / len(X))]
        self.loss_trace_ = []
        for epoch in range(1, int(self.n_epochs) + 1):
            order = rng.permutation(len(X))
            _sgd_epoch(P, Q, users, items, values, order, float(self.learning_rate), float(self.reg))
            if not (np.isfinite(P).all() and np.isfinite(Q).all()):
                raise DivergenceError(f"factors became non-finite in epoch {epoch}", epoch)
            sse = squared_error(P, Q, X)
            self.loss_trace_.append(sse)
            self.train_rmse_.append(np.sqrt(sse / len(X)))
            logger.debug("epoch %d train rmse %.5f", epoch, self.train_rmse_[-1])

        self.user_factors_ = P
        self.item_factors_ = Q
        return self

    @property
    def n_users_(self):
        return self.user_factors_.shape[0]

    @property
    def n_items_(self):
        return self.item_factors_.shape[0]

    def predict(self, X):
        """Dot products ``p_u . q_i`` for an ``(n, 2+)`` array of index pairs (no clipping)."""
        check_is_fitted(self, "user_factors_")
        X = np.atleast_2d(np.asarray(X))
        u = X[:, 0].astype(np.int64)
        i = X[:, 1].astype(np.int64)
        if len(X) and (u.min() < 0 or u.max() >= self.n_users_ or i.min() < 0 or i.max() >= self.n_items_):
            raise IndexError("user or item index out of range")
        return np.einsum("ij,ij->i", self.user_factors_[u], self.item_factors_[i])

    def predict_one(self, u, i):
        return float(self.predict([[u, i]])[0])

    def score(self, X, y=None):
        """Negative RMSE, so that larger is better."""
        return -rmse(self, X)


def rmse(model, X):
    """Root mean squared error of ``model`` on ``(user, item, rating)`` rows."""
    X = _check_ratings(X)
    if len(X) == 0:
        raise ValueError("cannot compute RMSE of an empty rating set")
    pred = model.predict(X[:, :2])
    return float(np.sqrt(np.mean((X[:, 2] - pred) ** 2)))


def train_pmf(dataset, train_idx=None, **params):
    """Fit :class:`PMF` on a :class:`~unhide.data.RatingsDataset` (optionally a subset)."""
    return PMF(**params).fit(dataset.as_array(train_idx), n_users=dataset.n_users, n_items=dataset.n_items)
