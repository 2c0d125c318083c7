"""Independent reference computations shared by the test modules."""

import numpy as np

FD_STEP = 1e-5
# entries smaller than this are compared absolutely; keeps round-off in
# near-zero gradients from dominating the relative error
REL_FLOOR = 1e-6


def central_diff(f, x, step=FD_STEP):
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    for j in np.ndindex(x.shape):
        hi, lo = x.copy(), x.copy()
        hi[j] += step
        lo[j] -= step
        grad[j] = (f(hi) - f(lo)) / (2 * step)
    return grad


def max_rel_error(a, b, floor=REL_FLOOR):
    a, b = np.asarray(a, float), np.asarray(b, float)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


def straight_line_forward(layers, x):
    """Plain-loop evaluation of Dense/ReLU/Sigmoid stacks in inference mode."""
    out = [float(v) for v in x]
    for layer in layers:
        if layer.kind == "dense":
            W, b = layer.weights, layer.biases
            out = [sum(out[i] * W[i, j] for i in range(len(out))) + b[j] for j in range(W.shape[1])]
        elif layer.kind == "relu":
            out = [v if v > 0 else 0.0 for v in out]
        elif layer.kind == "sigmoid":
            out = [1.0 / (1.0 + np.exp(-v)) for v in out]
    return np.array(out)


def reference_mln(rng, n_in=100, hidden=10, n_out=1, dropout=0.3):
    from unhide.nn import Dense, Dropout, MLPClassifier, ReLU, Sigmoid

    layers = [Dense(rng.normal(0, 0.3, (n_in, hidden)), rng.normal(0, 0.1, hidden)), ReLU(),
              Dropout(dropout),
              Dense(rng.normal(0, 0.5, (hidden, n_out)), rng.normal(0, 0.1, n_out)), Sigmoid()]
    return MLPClassifier.from_layers(layers)
