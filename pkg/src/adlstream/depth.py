"""Drift detection over per-batch error records, and layer redundancy.

The detector slices a batch's binary misclassification vector at a cut
point into a reference prefix G and a tail H, then compares their means
under Hoeffding bounds at two significance levels (drift and warning).
The cut is the earliest prefix whose upper confidence bound falls to or
below the whole-window bound, i.e. the first statistically confirmed
low-error reference. All bounds share the window-wide value range, so a
short constant prefix cannot claim zero uncertainty.

Layer redundancy uses the maximum information compression index: the
smaller eigenvalue of the 2x2 covariance of two per-layer output series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AdlNetwork


@dataclass
class ErrorWindow:
    """Binary per-sample record of one batch's test phase: 1 = misclassified."""
    errors: np.ndarray
    batch_index: int = 0

    def __post_init__(self):
        self.errors = np.asarray(self.errors, dtype=float)


@dataclass
class DriftConfig:
    alpha_drift: float = 0.0001
    alpha_warning: float = 0.0005
    delta_mici: float = 0.05

    def __post_init__(self):
        for name in ("alpha_drift", "alpha_warning"):
            a = getattr(self, name)
            if not (0.0 < a < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {a}")
        if not self.alpha_drift < self.alpha_warning:
            raise ValueError(
                "alpha_drift must be stricter (smaller) than alpha_warning: "
                f"{self.alpha_drift} vs {self.alpha_warning}"
            )
        if self.delta_mici < 0.0:
            raise ValueError(f"delta_mici must be >= 0, got {self.delta_mici}")


@dataclass
class DriftStats:
    f_hat: float
    g_hat: float
    h_hat: float
    eps_f: float
    eps_g: float
    eps_w: float
    eps_d: float


@dataclass
class DriftOutcome:
    status: str  # stable | warning | drift
    cut: int | None = None
    stats: DriftStats | None = None


def hoeffding_bound(value_range: float, n: int, alpha: float) -> float:
    """(b - a) * sqrt(ln(1/alpha) / (2n)) for an n-row slice."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return value_range * math.sqrt(math.log(1.0 / alpha) / (2.0 * n))


def find_cut(window: ErrorWindow, alpha: float) -> int | None:
    """Earliest cut c in [2, T-2] whose prefix bound meets the window bound.

    Returns the smallest c with mean(err[:c]) + eps(c) <= mean(err) +
    eps(T). Windows with no errors at all carry no transition and
    short-circuit to None.
    """
    err = window.errors
    t = len(err)
    if t < 4:
        raise ValueError(f"window must have at least 4 entries, got {t}")
    if err.sum() == 0:
        return None
    value_range = float(err.max() - err.min())
    f_hat = err.mean()
    eps_f = hoeffding_bound(value_range, t, alpha)
    cuts = np.arange(2, t - 1)
    g_hat = np.cumsum(err)[1 : t - 2] / cuts
    eps_g = value_range * np.sqrt(math.log(1.0 / alpha) / (2.0 * cuts))
    ok = np.flatnonzero(g_hat + eps_g <= f_hat + eps_f)
    if len(ok) == 0:
        return None
    return int(cuts[ok[0]])


def detect(window: ErrorWindow, config: DriftConfig) -> DriftOutcome:
    """Classify a batch window as stable, warning, or drift.

    Drift needs the tail mean to exceed the reference prefix mean by more
    than the drift bound, and strictly in the degrading direction; the
    warning band sits between the warning and drift bounds.
    """
    cut = find_cut(window, config.alpha_drift)
    if cut is None:
        return DriftOutcome(status="stable")
    err = window.errors
    t = len(err)
    value_range = float(err.max() - err.min())
    f_hat = float(err.mean())
    g_hat = float(err[:cut].mean())
    h_hat = float(err[cut:].mean())
    stats = DriftStats(
        f_hat=f_hat,
        g_hat=g_hat,
        h_hat=h_hat,
        eps_f=hoeffding_bound(value_range, t, config.alpha_drift),
        eps_g=hoeffding_bound(value_range, cut, config.alpha_drift),
        eps_w=hoeffding_bound(value_range, t - cut, config.alpha_warning),
        eps_d=hoeffding_bound(value_range, t - cut, config.alpha_drift),
    )
    gap = abs(h_hat - g_hat)
    if gap > stats.eps_d and h_hat > g_hat:
        return DriftOutcome(status="drift", cut=cut, stats=stats)
    if stats.eps_w <= gap < stats.eps_d:
        return DriftOutcome(status="warning", cut=cut, stats=stats)
    return DriftOutcome(status="stable", cut=cut, stats=stats)


def mici(a: np.ndarray, b: np.ndarray) -> float:
    """Smaller eigenvalue of the 2x2 covariance of two series.

    Zero when one series is an affine function of the other; rises with
    residual (uncompressible) variance. Zero-variance series define the
    correlation as 0 and yield 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        raise ValueError("mici needs two equal-length 1-d series of length >= 2")
    var_a = float(np.var(a))
    var_b = float(np.var(b))
    if var_a == 0.0 or var_b == 0.0:
        return 0.0
    cov = float(np.mean((a - a.mean()) * (b - b.mean())))
    rho_sq = cov * cov / (var_a * var_b)
    radicand = (var_a + var_b) ** 2 - 4.0 * var_a * var_b * (1.0 - rho_sq)
    radicand = max(radicand, 0.0)
    lam = 0.5 * (var_a + var_b - math.sqrt(radicand))
    return max(lam, 0.0)


def layer_prune_candidate(
    net: AdlNetwork, layer_outputs: dict[int, np.ndarray], delta: float
) -> tuple[int | None, float | None]:
    """Pick the head to deactivate, if any pair exceeds the threshold.

    `layer_outputs` maps each output-active layer index to its per-sample
    scalar output series for the batch. Among pairs with the maximal
    index above delta, the member with the lower voting weight loses;
    equal weights drop the deeper layer. Returns (layer or None,
    max pairwise index or None).
    """
    active = [l for l in net.active_indices() if l in layer_outputs]
    if len(active) < 2:
        return None, None
    best_pair = None
    best_gamma = -1.0
    for ai in range(len(active)):
        for bi in range(ai + 1, len(active)):
            i, j = active[ai], active[bi]
            gamma = mici(layer_outputs[i], layer_outputs[j])
            if gamma > best_gamma:
                best_gamma = gamma
                best_pair = (i, j)
    if best_pair is None or best_gamma <= delta:
        return None, best_gamma if best_gamma >= 0 else None
    i, j = best_pair
    if net.beta[i] < net.beta[j]:
        return i, best_gamma
    if net.beta[j] < net.beta[i]:
        return j, best_gamma
    return j, best_gamma
