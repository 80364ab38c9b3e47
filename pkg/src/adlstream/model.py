"""Different-depth network: layer stack with per-layer softmax heads.

Every hidden layer owns a private classifier head, so the network emits
one local probability vector per layer. The global output is the voting
combination of the output-active layers. Structural mutations (node
add/prune, layer add, head deactivation) keep all dimensions chained:
layer l consumes the activations of layer l-1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .numerics import RecursiveStat, xavier_init, xavier_vector

SNAPSHOT_VERSION = 1


@dataclass
class LayerParams:
    """One hidden layer plus its private softmax head.

    w: (nodes, d) input weights, b: (nodes,) bias,
    ws: (m, nodes) head weights, bs: (m,) head bias.
    """
    w: np.ndarray
    b: np.ndarray
    ws: np.ndarray
    bs: np.ndarray

    @property
    def nodes(self) -> int:
        return self.w.shape[0]

    @property
    def in_dim(self) -> int:
        return self.w.shape[1]


@dataclass
class AdlNetwork:
    layers: list[LayerParams]
    beta: np.ndarray
    p: np.ndarray
    output_active: np.ndarray
    input_stats: RecursiveStat
    n: int
    m: int

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def active_indices(self) -> np.ndarray:
        return np.flatnonzero(self.output_active)


@dataclass
class ForwardResult:
    hidden: list[np.ndarray]
    outputs: list[np.ndarray]
    combined: np.ndarray
    predicted: int


def _init_layer(in_dim: int, nodes: int, m: int, rng: np.random.Generator) -> LayerParams:
    # bias vectors share the Xavier bound of their companion matrix
    w = xavier_init(in_dim, nodes, rng)
    b = xavier_vector(in_dim, nodes, nodes, rng)
    ws = xavier_init(nodes, m, rng)
    bs = xavier_vector(nodes, m, m, rng)
    return LayerParams(w=w, b=b, ws=ws, bs=bs)


def new_network(n: int, m: int, rng: np.random.Generator) -> AdlNetwork:
    """Single layer, single hidden node, voting weight 1. Learning starts here."""
    if n < 1:
        raise ValueError(f"input dimension must be >= 1, got {n}")
    if m < 2:
        raise ValueError(f"class count must be >= 2, got {m}")
    layer = _init_layer(n, 1, m, rng)
    return AdlNetwork(
        layers=[layer],
        beta=np.array([1.0]),
        p=np.array([1.0]),
        output_active=np.array([True]),
        input_stats=RecursiveStat(dim=n),
        n=n,
        m=m,
    )


def forward(net: AdlNetwork, x: np.ndarray) -> ForwardResult:
    """Full forward pass.

    Output-inactive layers still compute their activations and local
    outputs (they stay in the chain); only active layers contribute to
    the combined vote.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n,):
        raise ValueError(f"expected input of shape ({net.n},), got {x.shape}")
    hidden: list[np.ndarray] = []
    outputs: list[np.ndarray] = []
    h = x
    for layer in net.layers:
        h = kernels.affine_sigmoid(layer.w, layer.b, h)
        hidden.append(h)
        outputs.append(kernels.affine_softmax(layer.ws, layer.bs, h))
    combined = np.zeros(net.m)
    for l in net.active_indices():
        combined += net.beta[l] * outputs[l]
    return ForwardResult(
        hidden=hidden,
        outputs=outputs,
        combined=combined,
        predicted=int(np.argmax(combined)),
    )


def add_node(net: AdlNetwork, l: int, rng: np.random.Generator) -> AdlNetwork:
    """Grow one hidden node in layer l; existing weights are untouched.

    If a successor layer exists it gains a fresh Xavier column so the
    chain stays dimension-consistent.
    """
    layer = net.layers[l]
    d, new_r = layer.in_dim, layer.nodes + 1
    layer.w = np.vstack([layer.w, xavier_vector(d, new_r, d, rng)[None, :]])
    layer.b = np.append(layer.b, xavier_vector(d, new_r, 1, rng))
    layer.ws = np.hstack([layer.ws, xavier_vector(new_r, net.m, net.m, rng)[:, None]])
    if l + 1 < net.num_layers:
        succ = net.layers[l + 1]
        new_col = xavier_vector(new_r, succ.nodes, succ.nodes, rng)
        succ.w = np.hstack([succ.w, new_col[:, None]])
    return net


def prune_node(net: AdlNetwork, l: int, i: int) -> AdlNetwork:
    """Remove node i of layer l. A layer is never emptied."""
    layer = net.layers[l]
    if layer.nodes < 2:
        raise ValueError("cannot prune the last node of a layer")
    if not (0 <= i < layer.nodes):
        raise ValueError(f"node index {i} out of range for layer with {layer.nodes} nodes")
    layer.w = np.delete(layer.w, i, axis=0)
    layer.b = np.delete(layer.b, i)
    layer.ws = np.delete(layer.ws, i, axis=1)
    if l + 1 < net.num_layers:
        succ = net.layers[l + 1]
        succ.w = np.delete(succ.w, i, axis=1)
    return net


def _renormalize(net: AdlNetwork) -> None:
    active = net.active_indices()
    total = net.beta[active].sum()
    net.beta[active] = net.beta[active] / total


def add_layer(net: AdlNetwork, rng: np.random.Generator) -> AdlNetwork:
    """Append a new single-node layer fed by the current deepest layer.

    The newcomer enters with voting weight and penalty factor 1; weights
    are then renormalized over the active heads.
    """
    in_dim = net.layers[-1].nodes
    net.layers.append(_init_layer(in_dim, 1, net.m, rng))
    net.beta = np.append(net.beta, 1.0)
    net.p = np.append(net.p, 1.0)
    net.output_active = np.append(net.output_active, True)
    _renormalize(net)
    return net


def deactivate_layer_output(net: AdlNetwork, l: int) -> AdlNetwork:
    """Cut layer l's head out of the vote; the layer keeps forward-passing.

    Its beta and p freeze at their current values and are excluded from
    all later voting updates and normalizations.
    """
    active = net.active_indices()
    if len(active) < 2:
        raise ValueError("cannot deactivate the only output-active layer")
    if not net.output_active[l]:
        raise ValueError(f"layer {l} is already output-inactive")
    net.output_active[l] = False
    _renormalize(net)
    return net


def count_params(net: AdlNetwork) -> tuple[int, int, int]:
    """(HL, HN, NoP): active head count, total nodes, total parameters.

    Inactive layers still hold (and forward-pass through) their weights,
    so they count toward HN and NoP; HL counts output connections only.
    """
    hl = int(net.output_active.sum())
    hn = sum(layer.nodes for layer in net.layers)
    nop = sum(
        layer.nodes * layer.in_dim + layer.nodes + net.m * layer.nodes + net.m
        for layer in net.layers
    )
    return hl, hn, nop


def network_to_dict(net: AdlNetwork) -> dict:
    return {
        "format_version": SNAPSHOT_VERSION,
        "n": net.n,
        "m": net.m,
        "layers": [
            {
                "w": layer.w.tolist(),
                "b": layer.b.tolist(),
                "ws": layer.ws.tolist(),
                "bs": layer.bs.tolist(),
            }
            for layer in net.layers
        ],
        "beta": net.beta.tolist(),
        "p": net.p.tolist(),
        "output_active": [bool(a) for a in net.output_active],
        "input_stats": {
            "count": net.input_stats.count,
            "mean": np.asarray(net.input_stats.mean).tolist(),
            "sq_accum": np.asarray(net.input_stats.sq_accum).tolist(),
        },
    }


def network_from_dict(doc: dict) -> AdlNetwork:
    version = doc.get("format_version")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version: {version!r}")
    layers = [
        LayerParams(
            w=np.asarray(entry["w"], dtype=float),
            b=np.asarray(entry["b"], dtype=float),
            ws=np.asarray(entry["ws"], dtype=float),
            bs=np.asarray(entry["bs"], dtype=float),
        )
        for entry in doc["layers"]
    ]
    stats_doc = doc["input_stats"]
    stats = RecursiveStat(dim=doc["n"])
    stats.count = int(stats_doc["count"])
    stats.mean = np.asarray(stats_doc["mean"], dtype=float)
    stats.sq_accum = np.asarray(stats_doc["sq_accum"], dtype=float)
    return AdlNetwork(
        layers=layers,
        beta=np.asarray(doc["beta"], dtype=float),
        p=np.asarray(doc["p"], dtype=float),
        output_active=np.asarray(doc["output_active"], dtype=bool),
        input_stats=stats,
        n=int(doc["n"]),
        m=int(doc["m"]),
    )


def save_network(net: AdlNetwork, path) -> None:
    with open(path, "w") as fh:
        json.dump(network_to_dict(net), fh)


def load_network(path) -> AdlNetwork:
    with open(path) as fh:
        return network_from_dict(json.load(fh))
