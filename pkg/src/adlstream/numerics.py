"""Shared numerics: stable activations, Xavier init, streaming statistics.

All statistics use the population (divide-by-n) convention so that a
single observation already yields a well-defined variance of zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def sigmoid(x):
    """Numerically stable logistic sigmoid, elementwise.

    Accepts scalars or arrays; never overflows (saturates at 0/1).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


def softmax(v):
    """Stable softmax of a vector: shift by max, exponentiate, normalize."""
    v = np.asarray(v, dtype=float)
    z = v - v.max()
    e = np.exp(z)
    return e / e.sum()


def xavier_init(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform Xavier matrix of shape (fan_out, fan_in).

    Entries drawn from U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
    """
    if fan_in < 1 or fan_out < 1:
        raise ValueError(f"fan dimensions must be >= 1, got ({fan_in}, {fan_out})")
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


def xavier_vector(fan_in: int, fan_out: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform vector of `size` entries using the Xavier bound of (fan_in, fan_out)."""
    if fan_in < 1 or fan_out < 1:
        raise ValueError(f"fan dimensions must be >= 1, got ({fan_in}, {fan_out})")
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=size)


@dataclass
class RecursiveStat:
    """Welford-style running mean / population variance.

    Tracks either a scalar series (dim=None) or one statistic per feature
    (dim=n). `sq_accum` holds the sum of squared deviations.
    """
    dim: int | None = None
    count: int = 0
    mean: np.ndarray | float = 0.0
    sq_accum: np.ndarray | float = 0.0

    def __post_init__(self):
        if self.dim is not None and self.count == 0:
            self.mean = np.zeros(self.dim)
            self.sq_accum = np.zeros(self.dim)

    def variance(self):
        if self.count == 0:
            return np.zeros(self.dim) if self.dim is not None else 0.0
        return self.sq_accum / self.count

    def std(self):
        return np.sqrt(self.variance())


def stat_update(s: RecursiveStat, x) -> RecursiveStat:
    """Fold one observation into the running statistics (in place)."""
    s.count += 1
    delta = x - s.mean
    s.mean = s.mean + delta / s.count
    s.sq_accum = s.sq_accum + delta * (x - s.mean)
    return s


@dataclass
class MinTrackedStat:
    """Scalar RecursiveStat plus running minima of its mean and std.

    The minima are taken over the post-update (mean, std) values and are
    reset to the current values by `min_reset`.
    """
    inner: RecursiveStat = field(default_factory=RecursiveStat)
    mean_min: float = np.inf
    std_min: float = np.inf


def min_update(s: MinTrackedStat, x: float) -> MinTrackedStat:
    stat_update(s.inner, x)
    s.mean_min = min(s.mean_min, s.inner.mean)
    s.std_min = min(s.std_min, s.inner.std())
    return s


def min_reset(s: MinTrackedStat) -> MinTrackedStat:
    s.mean_min = s.inner.mean
    s.std_min = s.inner.std()
    return s
