"""Numba-jitted implementations of the per-sample hot kernels.

Same signatures and float64 semantics as `_numpy`; explicit loops avoid
temporary allocations on the tiny matrices these run on.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def affine_sigmoid(w, b, x):
    r, d = w.shape
    out = np.empty(r)
    for i in range(r):
        z = b[i]
        for j in range(d):
            z += w[i, j] * x[j]
        if z >= 0.0:
            out[i] = 1.0 / (1.0 + math.exp(-z))
        else:
            e = math.exp(z)
            out[i] = e / (1.0 + e)
    return out


@njit(cache=True)
def affine_softmax(w, b, x):
    m, r = w.shape
    z = np.empty(m)
    for o in range(m):
        acc = b[o]
        for i in range(r):
            acc += w[o, i] * x[i]
        z[o] = acc
    zmax = z[0]
    for o in range(1, m):
        if z[o] > zmax:
            zmax = z[o]
    total = 0.0
    for o in range(m):
        z[o] = math.exp(z[o] - zmax)
        total += z[o]
    for o in range(m):
        z[o] /= total
    return z


@njit(cache=True)
def local_grads(w, b, ws, bs, x, c):
    r, d = w.shape
    m = ws.shape[0]
    h = affine_sigmoid(w, b, x)
    y = affine_softmax(ws, bs, h)
    dz = np.empty(m)
    for o in range(m):
        dz[o] = y[o] - c[o]
    dws = np.empty((m, r))
    for o in range(m):
        for i in range(r):
            dws[o, i] = dz[o] * h[i]
    dpre = np.empty(r)
    for i in range(r):
        acc = 0.0
        for o in range(m):
            acc += ws[o, i] * dz[o]
        dpre[i] = acc * h[i] * (1.0 - h[i])
    dw = np.empty((r, d))
    for i in range(r):
        for j in range(d):
            dw[i, j] = dpre[i] * x[j]
    return dw, dpre, dws, dz


@njit(cache=True)
def sgd_step(w, b, ws, bs, x, c, lr):
    dw, db, dws, dbs = local_grads(w, b, ws, bs, x, c)
    r, d = w.shape
    m = ws.shape[0]
    for i in range(r):
        b[i] -= lr * db[i]
        for j in range(d):
            w[i, j] -= lr * dw[i, j]
    for o in range(m):
        bs[o] -= lr * dbs[o]
        for i in range(r):
            ws[o, i] -= lr * dws[o, i]
