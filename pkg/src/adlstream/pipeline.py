"""Per-batch learning policy: test, vote, adapt width, prune and grow depth.

Each batch is scored by the frozen model first (prequential test phase).
The test-phase evidence then drives, in order: voting-weight adaptation,
single-pass width learning on the winning layer, redundancy-based head
deactivation, and drift detection. A drift appends a fresh layer that is
trained on the warning-buffered batch (if any) followed by the current
one; a warning stores the batch for exactly that purpose.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .depth import DriftConfig, ErrorWindow, detect, layer_prune_candidate
from .model import (
    AdlNetwork,
    add_layer,
    add_node,
    count_params,
    deactivate_layer_output,
    forward,
    prune_node,
)
from .numerics import MinTrackedStat, min_reset, min_update, stat_update
from .vote import VotingState, apply_batch_votes
from .width import WidthState, check_grow, check_prune, ns_estimate, select_prune_index

MIN_DDS_WINDOW = 4


@dataclass
class StreamBatch:
    features: np.ndarray  # (T, n)
    labels: np.ndarray    # (T, m) one-hot, revealed after the test phase
    batch_index: int = 0

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=float)
        self.labels = np.ascontiguousarray(self.labels, dtype=float)
        if self.features.ndim != 2 or self.labels.ndim != 2:
            raise ValueError("features and labels must be 2-d arrays")
        if len(self.features) != len(self.labels) or len(self.features) < 1:
            raise ValueError("features and labels must align and be non-empty")

    def __len__(self) -> int:
        return len(self.features)


@dataclass
class PipelineConfig:
    drift: DriftConfig = field(default_factory=DriftConfig)
    zeta: float = 0.001
    learning_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.zeta <= 0.0:
            raise ValueError(f"zeta must be > 0, got {self.zeta}")
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")


@dataclass
class WarningBuffer:
    batch: StreamBatch | None = None


@dataclass
class TestPhaseResult:
    predictions: np.ndarray        # (T,)
    combined: np.ndarray           # (T, m)
    per_layer_correct: np.ndarray  # (T, L) bool
    true_class_conf: np.ndarray    # (T, L), each layer's probability on the true class
    window: ErrorWindow


@dataclass
class BatchReport:
    batch: int
    rate: float
    hl: int
    hn: int
    nop: int
    drift_status: str
    cut: int | None
    grow_events: int
    prune_events: int
    layer_events: list[dict]
    beta: list[float]
    p: list[float]
    wall_time_ms: float
    node_events: list[tuple[int, str]] = field(default_factory=list, repr=False)

    def to_dict(self, include_timing: bool = True) -> dict:
        doc = {
            "batch": self.batch,
            "rate": self.rate,
            "HL": self.hl,
            "HN": self.hn,
            "NoP": self.nop,
            "drift_status": self.drift_status,
            "cut": self.cut,
            "grow_events": self.grow_events,
            "prune_events": self.prune_events,
            "layer_events": self.layer_events,
            "beta": self.beta,
            "p": self.p,
        }
        if include_timing:
            doc["wall_time_ms"] = self.wall_time_ms
        return doc


def current_winning_layer(net: AdlNetwork) -> int:
    """Output-active layer with the highest voting weight; ties go shallow."""
    active = net.active_indices()
    return int(active[int(np.argmax(net.beta[active]))])


def standardize_input(net: AdlNetwork, x: np.ndarray) -> np.ndarray:
    """Center and scale a raw sample by the network's running input stats.

    The network consumes standardized features; raw scales would park the
    first layer's sigmoids in their saturated tails. Dimensions whose
    observed spread is (still) zero pass through with unit scale, which
    also leaves the very first samples untouched.
    """
    stats = net.input_stats
    if stats.count == 0:
        return np.asarray(x, dtype=float)
    sigma = stats.std()
    safe = np.where(sigma > 1e-12, sigma, 1.0)
    return (np.asarray(x, dtype=float) - stats.mean) / safe


# Input model of the standardized features, used by the NS expectation
# chain: zero mean, unit variance per dimension.
def standardized_input_moments(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.zeros(n), np.ones(n)


def test_phase(net: AdlNetwork, batch: StreamBatch) -> TestPhaseResult:
    """Score a batch with the frozen model; no parameter is touched."""
    if batch.features.shape[1] != net.n:
        raise ValueError(
            f"batch feature width {batch.features.shape[1]} != network input {net.n}"
        )
    t = len(batch)
    true_idx = np.argmax(batch.labels, axis=1)
    predictions = np.empty(t, dtype=int)
    combined = np.empty((t, net.m))
    per_layer_correct = np.empty((t, net.num_layers), dtype=bool)
    true_class_conf = np.empty((t, net.num_layers))
    for i in range(t):
        res = forward(net, standardize_input(net, batch.features[i]))
        predictions[i] = res.predicted
        combined[i] = res.combined
        for l, y in enumerate(res.outputs):
            per_layer_correct[i, l] = int(np.argmax(y)) == true_idx[i]
            true_class_conf[i, l] = y[true_idx[i]]
    errors = (predictions != true_idx).astype(float)
    return TestPhaseResult(
        predictions=predictions,
        combined=combined,
        per_layer_correct=per_layer_correct,
        true_class_conf=true_class_conf,
        window=ErrorWindow(errors=errors, batch_index=batch.batch_index),
    )


def local_gradients(net: AdlNetwork, l_w: int, x: np.ndarray, c: np.ndarray):
    """Gradients of the winning layer's local cross-entropy loss.

    Activations below l_w are treated as constants; nothing flows past
    the winning layer. Returns (dw, db, dws, dbs).
    """
    h_in = np.asarray(x, dtype=float)
    for l in range(l_w):
        layer = net.layers[l]
        h_in = kernels.affine_sigmoid(layer.w, layer.b, h_in)
    layer = net.layers[l_w]
    return kernels.local_grads(layer.w, layer.b, layer.ws, layer.bs, h_in, c)


def sgd_winning_layer(
    net: AdlNetwork, x: np.ndarray, c: np.ndarray, lr: float, l_w: int | None = None
) -> AdlNetwork:
    """One localized SGD step; every other layer stays bit-identical."""
    if l_w is None:
        l_w = current_winning_layer(net)
    h_in = np.asarray(x, dtype=float)
    for l in range(l_w):
        layer = net.layers[l]
        h_in = kernels.affine_sigmoid(layer.w, layer.b, h_in)
    layer = net.layers[l_w]
    kernels.sgd_step(layer.w, layer.b, layer.ws, layer.bs, h_in, np.asarray(c, float), lr)
    return net


def reset_width_state(state: WidthState) -> WidthState:
    """Restart the grow/prune statistics, e.g. after a layer addition."""
    state.bias_stat = MinTrackedStat()
    state.var_stat = MinTrackedStat()
    state.samples_seen = 0
    state.grew_this_sample = False
    return state


def low_level_learning(
    net: AdlNetwork,
    width_state: WidthState,
    batch: StreamBatch,
    lr: float,
    rng: np.random.Generator,
    layer_index: int | None = None,
    update_input_stats: bool = True,
) -> list[tuple[int, str]]:
    """Single pass over a batch: width adaptation plus winning-layer SGD.

    Trains `layer_index` when given (drift recovery trains the new layer
    explicitly), otherwise the current winning layer. Returns the
    (sample, kind) node events.
    """
    l_w = layer_index if layer_index is not None else current_winning_layer(net)
    mu, sigma = standardized_input_moments(net.n)
    events: list[tuple[int, str]] = []
    for i in range(len(batch)):
        c = batch.labels[i]
        if update_input_stats:
            stat_update(net.input_stats, batch.features[i])
        x = standardize_input(net, batch.features[i])
        ns = ns_estimate(net, l_w, mu, sigma, c)
        width_state.grew_this_sample = False
        min_update(width_state.bias_stat, ns.bias_sq)
        min_update(width_state.var_stat, ns.variance)
        width_state.samples_seen += 1
        if check_grow(width_state, ns.bias_sq):
            add_node(net, l_w, rng)
            min_reset(width_state.bias_stat)
            width_state.grew_this_sample = True
            events.append((i, "grow"))
        sgd_winning_layer(net, x, c, lr, l_w)
        if net.layers[l_w].nodes >= 2 and check_prune(width_state, ns.variance):
            prune_node(net, l_w, select_prune_index(ns.exp_h_winning))
            min_reset(width_state.var_stat)
            events.append((i, "prune"))
    return events


def apply_depth_adaptation(
    net: AdlNetwork,
    width_state: WidthState,
    buffer: WarningBuffer,
    outcome_status: str,
    batch: StreamBatch,
    config: PipelineConfig,
    rng: np.random.Generator,
) -> tuple[list[dict], list[tuple[int, str]]]:
    """React to the drift detector: grow a layer, buffer the batch, or reset.

    On drift the new layer is trained single-pass on the buffered batch
    (when one exists) and then the current batch; input statistics are
    not re-folded since both batches already passed through training.
    """
    layer_events: list[dict] = []
    node_events: list[tuple[int, str]] = []
    if outcome_status == "drift":
        add_layer(net, rng)
        new_l = net.num_layers - 1
        reset_width_state(width_state)
        trained: list[int] = []
        if buffer.batch is not None:
            node_events += low_level_learning(
                net, width_state, buffer.batch, config.learning_rate, rng,
                layer_index=new_l, update_input_stats=False,
            )
            trained.append(buffer.batch.batch_index)
        node_events += low_level_learning(
            net, width_state, batch, config.learning_rate, rng,
            layer_index=new_l, update_input_stats=False,
        )
        trained.append(batch.batch_index)
        buffer.batch = None
        layer_events.append({"kind": "added", "layer": new_l, "trained_batches": trained})
    elif outcome_status == "warning":
        buffer.batch = batch
    else:
        buffer.batch = None
    return layer_events, node_events


def process_batch(
    net: AdlNetwork,
    width_state: WidthState,
    buffer: WarningBuffer,
    batch: StreamBatch,
    config: PipelineConfig,
    rng: np.random.Generator,
) -> BatchReport:
    """Run one batch through the full policy and report what happened."""
    start = time.perf_counter()
    tp = test_phase(net, batch)

    active = net.active_indices()
    state = VotingState(
        beta=net.beta[active].copy(), p=net.p[active].copy(), zeta=config.zeta
    )
    apply_batch_votes(state, tp.per_layer_correct[:, active])
    net.beta[active] = state.beta
    net.p[active] = state.p

    node_events = low_level_learning(
        net, width_state, batch, config.learning_rate, rng
    )

    layer_events: list[dict] = []
    if len(batch) >= 2:
        layer_outputs = {int(l): tp.true_class_conf[:, l] for l in active}
        candidate, gamma = layer_prune_candidate(
            net, layer_outputs, config.drift.delta_mici
        )
        if candidate is not None:
            deactivate_layer_output(net, candidate)
            layer_events.append(
                {"kind": "deactivated", "layer": candidate, "gamma": gamma}
            )

    if len(batch) >= MIN_DDS_WINDOW:
        outcome = detect(tp.window, config.drift)
        status, cut = outcome.status, outcome.cut
    else:
        # short tail batches (CSV remainders) carry too little evidence
        status, cut = "stable", None
    depth_layer_events, depth_node_events = apply_depth_adaptation(
        net, width_state, buffer, status, batch, config, rng
    )
    layer_events += depth_layer_events
    node_events += depth_node_events

    hl, hn, nop = count_params(net)
    active_now = net.active_indices()
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return BatchReport(
        batch=batch.batch_index,
        rate=float(1.0 - tp.window.errors.mean()),
        hl=hl,
        hn=hn,
        nop=nop,
        drift_status=status,
        cut=cut,
        grow_events=sum(1 for _, kind in node_events if kind == "grow"),
        prune_events=sum(1 for _, kind in node_events if kind == "prune"),
        layer_events=layer_events,
        beta=[float(b) for b in net.beta],
        p=[float(v) for v in net.p],
        wall_time_ms=elapsed_ms,
        node_events=node_events,
    )
