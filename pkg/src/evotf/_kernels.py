"""Compiled inner loops: fused forward + MSE over raw genes, and online BP.

These duplicate the numpy paths in :mod:`evotf.network` and
:mod:`evotf.backprop`; the test-suite checks the two agree.
"""

import math

import numpy as np
from numba import njit

from .transfer import EXP_CLIP, SQRT_2PI, TransferKind

KIND_CODES = {
    TransferKind.SIGFIX: 0,
    TransferKind.SIGADP: 1,
    TransferKind.TANHFIX: 2,
    TransferKind.TANHADP: 3,
    TransferKind.GAUSSIAN: 4,
    TransferKind.BETA: 5,
}


@njit(cache=True, inline="always")
def _clip(z):
    if z > EXP_CLIP:
        return EXP_CLIP
    if z < -EXP_CLIP:
        return -EXP_CLIP
    return z


@njit(cache=True, inline="always")
def _bound(v, lo, hi):
    return min(max(v, lo), hi)


@njit(cache=True, inline="always")
def _tanh(z):
    # exp-based tanh is several times faster than math.tanh here
    return 1.0 - 2.0 / (math.exp(2.0 * _clip(z)) + 1.0)


@njit(cache=True, inline="always")
def _phi(code, z, genes, off, lo, hi):
    """Transfer value at net input ``z``; node params start at ``genes[off]``."""
    if code == 0:
        return 1.0 / (1.0 + math.exp(-_clip(z)))
    if code == 1:
        return 1.0 / (1.0 + math.exp(-_clip(genes[off] * (z - genes[off + 1]))))
    if code == 2:
        return _tanh(z)
    if code == 3:
        return _tanh(genes[off] * (z - genes[off + 1]))
    if code == 4:
        sigma = _bound(genes[off], lo, hi)
        d = z - genes[off + 1]
        return math.exp(-_clip(d * d / (2.0 * sigma * sigma))) / (SQRT_2PI * sigma)
    theta = genes[off]
    sigma = _bound(genes[off + 1], lo, hi)
    p = _bound(genes[off + 2], lo, hi)
    q = _bound(genes[off + 3], lo, hi)
    if z <= theta - sigma * p / (p + q) or z >= theta + sigma * q / (p + q):
        return 0.0
    d = (p + q) * (z - theta) / sigma
    a = 1.0 + d / p
    b = 1.0 - d / q
    if a <= 0.0 or b <= 0.0:
        return 0.0
    return a**p * b**q


@njit(cache=True)
def mse_genes(code, n_params, genes, n_in, n_hid, n_out, X, Y, lo, hi):
    """Mean squared error over all samples and outputs for a flat gene vector."""
    o_wo = n_hid * n_in
    o_bh = o_wo + n_out * n_hid
    o_bo = o_bh + n_hid
    o_ph = o_bo + n_out
    o_po = o_ph + n_hid * n_params
    hidden = np.empty(n_hid)
    total = 0.0
    for s in range(X.shape[0]):
        for j in range(n_hid):
            z = -genes[o_bh + j]
            row = j * n_in
            for i in range(n_in):
                z += genes[row + i] * X[s, i]
            hidden[j] = _phi(code, z, genes, o_ph + j * n_params, lo, hi)
        for k in range(n_out):
            z = -genes[o_bo + k]
            row = o_wo + k * n_hid
            for j in range(n_hid):
                z += genes[row + j] * hidden[j]
            err = _phi(code, z, genes, o_po + k * n_params, lo, hi) - Y[s, k]
            total += err * err
    return total / (X.shape[0] * n_out)


@njit(cache=True, inline="always")
def _act(code, z):
    if code == 0:
        return 1.0 / (1.0 + math.exp(-_clip(z)))
    return _tanh(z)


@njit(cache=True, inline="always")
def _dact(code, y):
    if code == 0:
        return y * (1.0 - y)
    return 1.0 - y * y


@njit(cache=True)
def bp_train(code, X, T, w_h, b_h, w_o, b_o, eta, momentum, orders):
    """Online gradient descent with momentum, updating the arrays in place.

    Per-sample loss is ``0.5 * sum_k (y_k - t_k)**2``. ``orders`` holds one
    sample permutation per epoch. Returns the mean per-sample loss of the
    final weights over ``X``.
    """
    n_hid, n_in = w_h.shape
    n_out = w_o.shape[0]
    dw_h = np.zeros_like(w_h)
    db_h = np.zeros_like(b_h)
    dw_o = np.zeros_like(w_o)
    db_o = np.zeros_like(b_o)
    h = np.empty(n_hid)
    y = np.empty(n_out)
    delta_o = np.empty(n_out)
    delta_h = np.empty(n_hid)
    for epoch in range(orders.shape[0]):
        for s in orders[epoch]:
            for j in range(n_hid):
                z = -b_h[j]
                for i in range(n_in):
                    z += w_h[j, i] * X[s, i]
                h[j] = _act(code, z)
            for k in range(n_out):
                z = -b_o[k]
                for j in range(n_hid):
                    z += w_o[k, j] * h[j]
                y[k] = _act(code, z)
                delta_o[k] = (y[k] - T[s, k]) * _dact(code, y[k])
            for j in range(n_hid):
                acc = 0.0
                for k in range(n_out):
                    acc += delta_o[k] * w_o[k, j]
                delta_h[j] = acc * _dact(code, h[j])
            for k in range(n_out):
                for j in range(n_hid):
                    dw_o[k, j] = -eta * delta_o[k] * h[j] + momentum * dw_o[k, j]
                    w_o[k, j] += dw_o[k, j]
                db_o[k] = eta * delta_o[k] + momentum * db_o[k]
                b_o[k] += db_o[k]
            for j in range(n_hid):
                for i in range(n_in):
                    dw_h[j, i] = -eta * delta_h[j] * X[s, i] + momentum * dw_h[j, i]
                    w_h[j, i] += dw_h[j, i]
                db_h[j] = eta * delta_h[j] + momentum * db_h[j]
                b_h[j] += db_h[j]
    return bp_loss(code, X, T, w_h, b_h, w_o, b_o)


@njit(cache=True)
def bp_loss(code, X, T, w_h, b_h, w_o, b_o):
    n_hid, n_in = w_h.shape
    n_out = w_o.shape[0]
    h = np.empty(n_hid)
    total = 0.0
    for s in range(X.shape[0]):
        for j in range(n_hid):
            z = -b_h[j]
            for i in range(n_in):
                z += w_h[j, i] * X[s, i]
            h[j] = _act(code, z)
        for k in range(n_out):
            z = -b_o[k]
            for j in range(n_hid):
                z += w_o[k, j] * h[j]
            e = _act(code, z) - T[s, k]
            total += 0.5 * e * e
    return total / X.shape[0]
