import numpy as np
import pytest

from adlstream.model import AdlNetwork, add_layer, add_node, new_network


def param_bytes(net: AdlNetwork) -> bytes:
    """Concatenated raw bytes of every parameter array, for freeze checks."""
    chunks = []
    for layer in net.layers:
        chunks += [layer.w.tobytes(), layer.b.tobytes(), layer.ws.tobytes(), layer.bs.tobytes()]
    return b"".join(chunks)


def layer_bytes(net: AdlNetwork, l: int) -> bytes:
    layer = net.layers[l]
    return b"".join([layer.w.tobytes(), layer.b.tobytes(), layer.ws.tobytes(), layer.bs.tobytes()])


def random_network(rng: np.random.Generator, n=3, m=2, layers=1, nodes_per_layer=None) -> AdlNetwork:
    """Network with a controlled shape, weights from new_network/add mutations."""
    net = new_network(n, m, rng)
    sizes = nodes_per_layer or [2] * layers
    for _ in range(sizes[0] - 1):
        add_node(net, 0, rng)
    for l in range(1, layers):
        add_layer(net, rng)
        for _ in range(sizes[l] - 1):
            add_node(net, l, rng)
    return net


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
