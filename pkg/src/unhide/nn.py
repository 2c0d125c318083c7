"""Small feed-forward binary classifier with backprop to weights and inputs.

Layers are stateless between calls: a forward pass returns per-layer caches
that the backward pass consumes, so a fitted model can be evaluated from
several threads at once.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

BCE_EPS = 1e-7


class Dense:
    kind = "dense"

    def __init__(self, weights, biases):
        self.weights = np.asarray(weights, dtype=float)
        self.biases = np.asarray(biases, dtype=float)
        if self.weights.ndim != 2 or self.biases.shape != (self.weights.shape[1],):
            raise ValueError(f"bad dense shapes {self.weights.shape}, {self.biases.shape}")

    @classmethod
    def glorot(cls, n_in, n_out, rng):
        limit = np.sqrt(6.0 / (n_in + n_out))
        return cls(rng.uniform(-limit, limit, size=(n_in, n_out)), np.zeros(n_out))

    @property
    def n_in(self):
        return self.weights.shape[0]

    @property
    def n_out(self):
        return self.weights.shape[1]

    def params(self):
        return [self.weights, self.biases]

    def forward(self, x, training, rng):
        return x @ self.weights + self.biases, x

    def backward(self, cache, grad):
        return grad @ self.weights.T, [cache.T @ grad, grad.sum(axis=0)]


class ReLU:
    kind = "relu"

    def params(self):
        return []

    def forward(self, x, training, rng):
        mask = x > 0
        return np.where(mask, x, 0.0), mask

    def backward(self, mask, grad):
        return np.where(mask, grad, 0.0), []


class Sigmoid:
    kind = "sigmoid"

    def params(self):
        return []

    def forward(self, x, training, rng):
        out = sigmoid(x)
        return out, out

    def backward(self, out, grad):
        return grad * out * (1.0 - out), []


class Dropout:
    """Inverted dropout: kept units are scaled by ``1/(1-rate)`` while training."""

    kind = "dropout"

    def __init__(self, rate):
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = float(rate)

    def params(self):
        return []

    def forward(self, x, training, rng):
        if not training or self.rate == 0.0:
            return x, None
        if rng is None:
            raise ValueError("training-mode dropout needs an rng")
        scale = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * scale, scale

    def backward(self, scale, grad):
        return (grad if scale is None else grad * scale), []


def sigmoid(x):
    # split by sign so neither branch overflows
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def bce_loss(y, p):
    """Binary cross-entropy averaged over all entries; ``p`` is clamped to [eps, 1-eps]."""
    y = np.asarray(y, dtype=float)
    p = np.clip(np.asarray(p, dtype=float), BCE_EPS, 1.0 - BCE_EPS)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def bce_grad(y, p):
    """Gradient of :func:`bce_loss` with respect to ``p`` (zero where clamped)."""
    y = np.asarray(y, dtype=float)
    p = np.asarray(p, dtype=float)
    pc = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    g = -(y / pc - (1.0 - y) / (1.0 - pc)) / p.size
    return np.where(pc == p, g, 0.0)


def forward_pass(layers, X, training=False, rng=None):
    caches = []
    out = X
    for layer in layers:
        out, cache = layer.forward(out, training, rng)
        caches.append(cache)
    return out, caches


def backward_pass(layers, caches, grad):
    """Backpropagate ``grad`` (dLoss/dOutput); returns (dLoss/dInput, per-layer param grads)."""
    param_grads = [None] * len(layers)
    for k in range(len(layers) - 1, -1, -1):
        grad, param_grads[k] = layers[k].backward(caches[k], grad)
    return grad, param_grads


class RMSprop:
    """Per-parameter ``s <- rho s + (1-rho) g^2``, ``w <- w - lr g / (sqrt(s) + eps)``."""

    def __init__(self, learning_rate=0.001, rho=0.9, eps=1e-8):
        self.learning_rate = learning_rate
        self.rho = rho
        self.eps = eps
        self.state = None

    def step(self, params, grads):
        if self.state is None:
            self.state = [np.zeros_like(p) for p in params]
        for w, g, s in zip(params, grads, self.state):
            s *= self.rho
            s += (1.0 - self.rho) * g * g
            w -= self.learning_rate * g / (np.sqrt(s) + self.eps)


@dataclass
class TrainHistory:
    loss: list = field(default_factory=list)
    train_accuracy: list = field(default_factory=list)
    val_accuracy: list = field(default_factory=list)
    best_epoch: int = -1

    def __len__(self):
        return len(self.loss)


def _as_targets(y):
    y = np.asarray(y)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2:
        raise ValueError("labels must be 1-D or 2-D")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary 0/1")
    return y.astype(float)


class MLPClassifier(ClassifierMixin, BaseEstimator):
    """Dense/ReLU/dropout hidden layers feeding independent sigmoid outputs.

    Each output column of ``y`` is a separate binary target; the training
    loss is the per-output binary cross-entropy summed over outputs and
    averaged over the batch, minimized with RMSprop. ``batch_size=None``
    (the default) takes one full-batch step per epoch. When validation data is
    given, the weights from the epoch with the best mean validation accuracy
    are kept.
    """

    def __init__(self, hidden_layer_sizes=(10,), dropout=0.3, learning_rate=0.001, rho=0.9,
                 eps=1e-8, n_epochs=200, batch_size=None, random_state=0):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.dropout = dropout
        self.learning_rate = learning_rate
        self.rho = rho
        self.eps = eps
        self.n_epochs = n_epochs
        self.batch_size = batch_size
        self.random_state = random_state

    @classmethod
    def from_layers(cls, layers, **params):
        """Wrap an explicit layer list as a fitted model."""
        model = cls(**params)
        model._set_layers(list(layers))
        return model

    def _set_layers(self, layers):
        dims = [layer for layer in layers if isinstance(layer, Dense)]
        if not dims:
            raise ValueError("a model needs at least one dense layer")
        for a, b in zip(dims, dims[1:]):
            if a.n_out != b.n_in:
                raise ValueError(f"layer dimensions do not chain: {a.n_out} -> {b.n_in}")
        self.layers_ = layers
        self.n_features_in_ = dims[0].n_in
        self.n_outputs_ = dims[-1].n_out
        self.classes_ = np.array([0, 1])

    def _build(self, n_in, n_out, rng):
        layers = []
        for width in self.hidden_layer_sizes:
            layers += [Dense.glorot(n_in, width, rng), ReLU()]
            if self.dropout > 0:
                layers.append(Dropout(self.dropout))
            n_in = width
        layers += [Dense.glorot(n_in, n_out, rng), Sigmoid()]
        return layers

    def params(self):
        return [p for layer in self.layers_ for p in layer.params()]

    def fit(self, X, y, X_val=None, y_val=None):
        X = np.asarray(X, dtype=float)
        Y = _as_targets(y)
        if X.ndim != 2 or len(X) != len(Y):
            raise ValueError(f"X of shape {X.shape} does not match {len(Y)} labels")
        if not np.isfinite(X).all():
            raise ValueError("X contains non-finite values")
        for k in range(Y.shape[1]):
            if len(np.unique(Y[:, k])) < 2:
                raise ValueError(f"output {k} has a single class in the training set")
        has_val = X_val is not None and y_val is not None and len(y_val) > 0
        if has_val:
            X_val = np.asarray(X_val, dtype=float)
            Y_val = _as_targets(y_val)

        rng = np.random.default_rng(self.random_state)
        self._set_layers(self._build(X.shape[1], Y.shape[1], rng))
        params = self.params()
        opt = RMSprop(self.learning_rate, self.rho, self.eps)
        n = len(X)
        batch = n if not self.batch_size else min(int(self.batch_size), n)
        history = TrainHistory()
        best_acc, best_params = -np.inf, [p.copy() for p in params]

        for epoch in range(int(self.n_epochs)):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, batch):
                idx = order[start : start + batch]
                out, caches = forward_pass(self.layers_, X[idx], True, rng)
                total += self._loss(Y[idx], out) * len(idx)
                _, grads = backward_pass(self.layers_, caches, bce_grad(Y[idx], out) * Y.shape[1])
                opt.step(params, [g for gs in grads for g in gs])
            if not all(np.isfinite(p).all() for p in params):
                raise FloatingPointError(f"weights became non-finite in epoch {epoch}")
            history.loss.append(total / n)
            history.train_accuracy.append(self._accuracy(X, Y))
            if has_val:
                acc = self._accuracy(X_val, Y_val)
                history.val_accuracy.append(acc)
                if acc > best_acc:
                    best_acc, history.best_epoch = acc, epoch
                    best_params = [p.copy() for p in params]
        if has_val:
            for p, best in zip(params, best_params):
                p[...] = best
        else:
            history.best_epoch = int(self.n_epochs) - 1
        self.history_ = history
        return self

    @staticmethod
    def _loss(Y, out):
        return bce_loss(Y, out) * Y.shape[1]

    def _accuracy(self, X, Y):
        return float(np.mean((self.forward(X) >= 0.5) == Y.astype(bool)))

    def _check_input(self, X):
        check_is_fitted(self, "layers_")
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X, single

    def forward(self, X, training=False, rng=None):
        """Sigmoid outputs, shape ``(n, n_outputs)`` (or ``(n_outputs,)`` for a 1-D input)."""
        X, single = self._check_input(X)
        out, _ = forward_pass(self.layers_, X, training, rng)
        return out[0] if single else out

    def predict_proba(self, X):
        p = np.atleast_2d(self.forward(np.atleast_2d(X)))
        if self.n_outputs_ == 1:
            return np.column_stack([1.0 - p[:, 0], p[:, 0]])
        return [np.column_stack([1.0 - p[:, k], p[:, k]]) for k in range(self.n_outputs_)]

    def predict(self, X):
        out = (np.atleast_2d(self.forward(np.atleast_2d(X))) >= 0.5).astype(np.int64)
        return out[:, 0] if self.n_outputs_ == 1 else out

    def loss(self, X, y, training=False, rng=None):
        """Training objective (summed BCE over outputs, batch mean) at the current weights."""
        Y = _as_targets(y)
        return self._loss(Y, self.forward(X, training, rng))

    def weight_gradients(self, X, y, training=False, rng=None):
        """Gradients of :meth:`loss` with respect to every parameter, in :meth:`params` order."""
        X, _ = self._check_input(X)
        Y = _as_targets(y)
        out, caches = forward_pass(self.layers_, X, training, rng)
        _, grads = backward_pass(self.layers_, caches, bce_grad(Y, out) * Y.shape[1])
        return [g for gs in grads for g in gs]

    def input_gradient(self, X, output_index=0):
        """Gradient of one sigmoid output with respect to the input (inference mode)."""
        X, single = self._check_input(X)
        if not 0 <= output_index < self.n_outputs_:
            raise IndexError(f"output index {output_index} out of range for {self.n_outputs_} outputs")
        out, caches = forward_pass(self.layers_, X, False, None)
        seed = np.zeros_like(out)
        seed[:, output_index] = 1.0
        grad, _ = backward_pass(self.layers_, caches, seed)
        return grad[0] if single else grad

    def to_payload(self):
        check_is_fitted(self, "layers_")
        layers = []
        for layer in self.layers_:
            entry = {"type": layer.kind}
            if isinstance(layer, Dense):
                entry["weights"] = layer.weights.tolist()
                entry["biases"] = layer.biases.tolist()
            elif isinstance(layer, Dropout):
                entry["rate"] = layer.rate
            layers.append(entry)
        return {"params": _jsonable(self.get_params()), "layers": layers}

    @classmethod
    def from_payload(cls, payload):
        layers = []
        for entry in payload["layers"]:
            kind = entry["type"]
            if kind == "dense":
                w = np.array(entry["weights"], dtype=float).reshape(-1, len(entry["biases"]))
                layers.append(Dense(w, np.array(entry["biases"], dtype=float)))
            elif kind == "relu":
                layers.append(ReLU())
            elif kind == "sigmoid":
                layers.append(Sigmoid())
            elif kind == "dropout":
                layers.append(Dropout(entry["rate"]))
            else:
                raise ValueError(f"unknown layer type {kind!r}")
        params = dict(payload.get("params", {}))
        if "hidden_layer_sizes" in params:
            params["hidden_layer_sizes"] = tuple(params["hidden_layer_sizes"])
        return cls.from_layers(layers, **params)


def _jsonable(params):
    return {k: list(v) if isinstance(v, tuple) else v for k, v in params.items()}
