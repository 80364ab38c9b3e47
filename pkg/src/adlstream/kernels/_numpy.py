"""Pure-numpy implementations of the per-sample hot kernels."""
from __future__ import annotations

import numpy as np

from ..numerics import sigmoid, softmax


def affine_sigmoid(w, b, x):
    """sigmoid(w @ x + b) for one sample."""
    return sigmoid(w @ x + b)


def affine_softmax(w, b, x):
    """softmax(w @ x + b) for one sample."""
    return softmax(w @ x + b)


def local_grads(w, b, ws, bs, x, c):
    """Cross-entropy gradients of one layer's private head, input treated as constant.

    Returns (dw, db, dws, dbs) for loss -sum(c * log softmax(ws h + bs)),
    h = sigmoid(w x + b).
    """
    h = sigmoid(w @ x + b)
    y = softmax(ws @ h + bs)
    dz = y - c
    dws = np.outer(dz, h)
    dbs = dz
    dpre = (ws.T @ dz) * h * (1.0 - h)
    dw = np.outer(dpre, x)
    db = dpre
    return dw, db, dws, dbs


def sgd_step(w, b, ws, bs, x, c, lr):
    """One plain SGD step on a layer and its head, updating arrays in place."""
    dw, db, dws, dbs = local_grads(w, b, ws, bs, x, c)
    w -= lr * dw
    b -= lr * db
    ws -= lr * dws
    bs -= lr * dbs
