"""Numpy fallback for the SGD inner loop."""

from __future__ import annotations

import numpy as np


def sgd_epoch(w1, b1, w2, b2, x, y, class_w, order, batch_size, lr):
    """One epoch of minibatch SGD on the rectifier two-matrix net with
    weighted-mean cross entropy. Parameters are updated in place; the
    last batch may be smaller. Returns (weighted nll sum, weight sum)
    accumulated at each batch's pre-update parameters.
    """
    n = order.shape[0]
    nll_sum = 0.0
    weight_sum = 0.0
    for start in range(0, n, batch_size):
        idx = order[start : start + batch_size]
        xb = x[idx]
        yb = y[idx]
        rows = np.arange(xb.shape[0])

        a = xb @ w1 + b1
        h = np.maximum(a, 0.0)
        z = h @ w2 + b2
        zmax = z.max(axis=1, keepdims=True)
        ez = np.exp(z - zmax)
        sez = ez.sum(axis=1, keepdims=True)
        logp = (z - zmax) - np.log(sez)
        p = ez / sez

        wy = class_w[yb]
        bw = wy.sum()
        nll_sum += float(-(wy * logp[rows, yb]).sum())
        weight_sum += float(bw)

        dz = p * (wy / bw)[:, None]
        dz[rows, yb] -= wy / bw
        dw2 = h.T @ dz
        db2 = dz.sum(axis=0)
        dh = dz @ w2.T
        dh[a <= 0.0] = 0.0
        dw1 = xb.T @ dh
        db1 = dh.sum(axis=0)

        w1 -= lr * dw1
        b1 -= lr * db1
        w2 -= lr * dw2
        b2 -= lr * db2
    return nll_sum, weight_sum
