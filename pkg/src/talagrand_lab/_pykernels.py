"""Numpy implementations of the cube kernels.

Used when the compiled extension is unavailable or when
``TALAGRAND_LAB_PURE=1`` is set. Semantics match ``_ckernels`` exactly.
"""
import numpy as np


def point_weights(n, p):
    q = 1.0 - p
    ones = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        ones = np.concatenate([ones, ones + 1])
    return p ** ones * q ** (n - ones)


def _pairs(a, n, i):
    # axis 1 of the view is coordinate i: index 0 <-> x_i = -1, 1 <-> x_i = +1
    return a.reshape(1 << (n - i - 1), 2, 1 << i)


def derivative_moments(f, w, n, r):
    f = np.asarray(f, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    out = np.empty(n)
    for i in range(n):
        fv = _pairs(f, n, i)
        wv = _pairs(w, n, i)
        d = np.abs(fv[:, 1, :] - fv[:, 0, :])
        out[i] = np.sum(d ** r * (wv[:, 0, :] + wv[:, 1, :]))
    return out


def influences(ind, w, n):
    ind = np.asarray(ind, dtype=np.float64) != 0.0
    w = np.asarray(w, dtype=np.float64)
    out = np.empty(n)
    for i in range(n):
        a = _pairs(ind, n, i)
        wv = _pairs(w, n, i)
        lo, hi = a[:, 0, :], a[:, 1, :]
        out[i] = np.sum(wv[:, 0, :] * (lo & ~hi)) + np.sum(wv[:, 1, :] * (hi & ~lo))
    return out


def fwht(a):
    size = a.shape[0]
    h = 1
    while h < size:
        v = a.reshape(-1, 2, h)
        u0 = v[:, 0, :].copy()
        v[:, 0, :] += v[:, 1, :]
        v[:, 1, :] = u0 - v[:, 1, :]
        h <<= 1
