# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops over dense functions on {-1,+1}^N.

Index convention: bit ``i`` of a point index is set iff ``x_i = +1``.
Every routine here has a numpy twin in ``_pykernels`` with identical
signature and semantics.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()


def point_weights(int n, double p):
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(size, dtype=np.float64)
    cdef double[::1] wv = w
    cdef double q = 1.0 - p
    cdef Py_ssize_t x, half
    cdef int i
    wv[0] = pow(q, n)
    # doubling: setting bit i multiplies the weight by p/q
    half = 1
    for i in range(n):
        for x in range(half):
            wv[x + half] = wv[x] * (p / q)
        half <<= 1
    return w


def derivative_moments(const double[::1] f, const double[::1] w, int n, double r):
    """Return m[i] = sum_x w(x) |f(tau_i x) - f(x)|**r for every coordinate."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    cdef Py_ssize_t base, x, bit
    cdef int i
    cdef int mode = 1 if r == 1.0 else (2 if r == 2.0 else 0)
    cdef double acc, d
    for i in range(n):
        bit = (<Py_ssize_t>1) << i
        acc = 0.0
        # visit each pair {x, x | bit} once, in memory order
        for base in range(0, size, 2 * bit):
            for x in range(base, base + bit):
                d = fabs(f[x + bit] - f[x])
                if mode == 1:
                    acc += d * (w[x] + w[x + bit])
                elif mode == 2:
                    acc += d * d * (w[x] + w[x + bit])
                else:
                    acc += pow(d, r) * (w[x] + w[x + bit])
        out[i] = acc
    return out


def influences(const double[::1] ind, const double[::1] w, int n):
    """Return I[i] = mu({x in A, tau_i x not in A}) for an indicator vector."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    cdef Py_ssize_t base, x, bit
    cdef int i
    cdef double acc, lo, hi
    for i in range(n):
        bit = (<Py_ssize_t>1) << i
        acc = 0.0
        for base in range(0, size, 2 * bit):
            for x in range(base, base + bit):
                lo = ind[x] != 0.0
                hi = ind[x + bit] != 0.0
                acc += w[x] * lo * (1.0 - hi) + w[x + bit] * hi * (1.0 - lo)
        out[i] = acc
    return out


def fwht(double[::1] a):
    """In-place unnormalized Walsh-Hadamard transform (length a power of two)."""
    cdef Py_ssize_t size = a.shape[0]
    cdef Py_ssize_t h = 1, i, j
    cdef double u, v
    while h < size:
        i = 0
        while i < size:
            for j in range(i, i + h):
                u = a[j]
                v = a[j + h]
                a[j] = u + v
                a[j + h] = u - v
            i += 2 * h
        h <<= 1
