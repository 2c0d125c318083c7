"""Synthetic user factors with a planted demographic signal."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PlantedSpec:
    """``n`` users with ``K`` standard-normal factors.

    The label is 1 iff ``sum(effects[j] * X[:, signal[j]]) > 0``, then flipped
    with probability ``noise``. With no signal factors the labels are fair
    coin flips, independent of ``X``. ``effects`` defaults to all ones.
    """

    n: int = 5000
    K: int = 100
    signal: tuple = (0,)
    effects: tuple = None
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if any(not 0 <= j < self.K for j in self.signal):
            raise ValueError("signal factors must lie in 0..K-1")
        if len(set(self.signal)) != len(self.signal):
            raise ValueError("signal factors must be distinct")
        if not 0 <= self.noise < 0.5:
            raise ValueError("noise must be in [0, 0.5)")
        if self.effects is not None and len(self.effects) != len(self.signal):
            raise ValueError("one effect size per signal factor")


def generate(spec):
    """Return ``(X, y, signal)`` for a :class:`PlantedSpec`."""
    rng = np.random.default_rng(spec.seed)
    X = rng.standard_normal((spec.n, spec.K))
    signal = np.asarray(spec.signal, dtype=np.int64)
    if len(signal):
        effects = np.ones(len(signal)) if spec.effects is None else np.asarray(spec.effects, float)
        y = (X[:, signal] @ effects > 0).astype(np.int64)
    else:
        y = rng.integers(0, 2, spec.n)
    flip = rng.random(spec.n) < spec.noise
    y = np.where(flip, 1 - y, y)
    return X, y, signal
