"""Hidden-node grow/prune driven by a streaming bias/variance estimate.

The expected network output under a Gaussian input model is obtained by
a probit-style closed form for the first layer, then forward-chained
through the deeper layers. The squared-output expectation reuses the
same chain seeded with the squared first-layer expectation. The grow
and prune tests compare the running mean+std of the bias^2 and variance
series against their tracked minima, with adaptive confidence factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import AdlNetwork, LayerParams
from .numerics import MinTrackedStat

GROW_PI_SCALE = 1.3
GROW_PI_OFFSET = 0.7


@dataclass
class WidthState:
    """Streaming statistics backing the grow/prune decisions.

    `samples_seen` counts estimates folded in since creation; the checks
    stay inert until at least two have arrived. `grew_this_sample` bars
    pruning on a sample that just grew a node.
    """
    bias_stat: MinTrackedStat = field(default_factory=MinTrackedStat)
    var_stat: MinTrackedStat = field(default_factory=MinTrackedStat)
    samples_seen: int = 0
    grew_this_sample: bool = False


@dataclass
class NsEstimate:
    exp_h1: np.ndarray
    exp_y: np.ndarray
    exp_y_sq: np.ndarray
    bias_sq: float
    variance: float
    exp_h_winning: np.ndarray


def expected_first_hidden(layer1: LayerParams, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Expected first-layer activation for x ~ N(mu, diag(sigma^2)).

    The mean is shrunk elementwise by 1/sqrt(1 + pi*sigma^2/8) before the
    affine map (probit approximation of the sigmoid integral).
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if mu.shape != (layer1.in_dim,) or sigma.shape != (layer1.in_dim,):
        raise ValueError(
            f"mu/sigma must have shape ({layer1.in_dim},), got {mu.shape}, {sigma.shape}"
        )
    scaled = mu / np.sqrt(1.0 + math.pi * sigma**2 / 8.0)
    return kernels.affine_sigmoid(layer1.w, layer1.b, scaled)


def expected_output(
    net: AdlNetwork, exp_h1: np.ndarray, l_w: int
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Chain an expectation seeded at layer 1 up to the winning layer's head.

    Returns the expected head output and all intermediate expected
    activations (needed later for prune-candidate selection).
    """
    if not (0 <= l_w < net.num_layers):
        raise ValueError(f"winning layer {l_w} out of range (L={net.num_layers})")
    exp_h = [np.asarray(exp_h1, dtype=float)]
    for l in range(1, l_w + 1):
        layer = net.layers[l]
        exp_h.append(kernels.affine_sigmoid(layer.w, layer.b, exp_h[-1]))
    head = net.layers[l_w]
    exp_y = kernels.affine_softmax(head.ws, head.bs, exp_h[l_w])
    return exp_y, exp_h


def ns_estimate(
    net: AdlNetwork, l_w: int, mu: np.ndarray, sigma: np.ndarray, c: np.ndarray
) -> NsEstimate:
    """Bias^2 and variance of the winning layer's expected output vs label c.

    Both are reduced to scalars by the mean over output dimensions; the
    variance is clamped at zero (the squared-expectation chain is an
    approximation and can dip slightly negative).
    """
    exp_h1 = expected_first_hidden(net.layers[0], mu, sigma)
    exp_y, exp_h = expected_output(net, exp_h1, l_w)
    exp_y_sq, _ = expected_output(net, exp_h1 * exp_h1, l_w)
    c = np.asarray(c, dtype=float)
    bias_sq = float(np.mean((exp_y - c) ** 2))
    variance = float(np.mean(exp_y_sq - exp_y**2))
    if variance < 0.0:
        variance = 0.0
    return NsEstimate(
        exp_h1=exp_h1,
        exp_y=exp_y,
        exp_y_sq=exp_y_sq,
        bias_sq=bias_sq,
        variance=variance,
        exp_h_winning=exp_h[l_w],
    )


def grow_factor(bias_sq: float) -> float:
    """Adaptive sigma-rule multiplier: high bias lowers the bar to grow."""
    return GROW_PI_SCALE * math.exp(-bias_sq) + GROW_PI_OFFSET


def prune_factor(variance: float) -> float:
    """Same shape as grow_factor but fed by the variance estimate."""
    return GROW_PI_SCALE * math.exp(-variance) + GROW_PI_OFFSET


def check_grow(state: WidthState, bias_sq: float) -> bool:
    """True when the bias series shows a confirmed upward excursion.

    Requires state already updated with this sample's bias_sq. The
    comparison is strict so a perfectly stationary series never fires;
    the caller must min_reset the bias stat after acting on True.
    """
    if state.samples_seen < 2:
        return False
    s = state.bias_stat
    return s.inner.mean + s.inner.std() > s.mean_min + grow_factor(bias_sq) * s.std_min


def check_prune(state: WidthState, variance: float) -> bool:
    """True when the variance series exceeds its minima by twice the factor.

    The doubled multiplier prevents pruning right after growth inflates
    the variance; a sample that grew a node never prunes.
    """
    if state.samples_seen < 2 or state.grew_this_sample:
        return False
    s = state.var_stat
    return (
        s.inner.mean + s.inner.std()
        > s.mean_min + 2.0 * prune_factor(variance) * s.std_min
    )


def select_prune_index(exp_h_lw: np.ndarray) -> int:
    """Least-contributing node: argmin of the expected activation, lowest index on ties."""
    exp_h_lw = np.asarray(exp_h_lw)
    if exp_h_lw.shape[0] < 2:
        raise ValueError("cannot select a prune index in a single-node layer")
    return int(np.argmin(exp_h_lw))
