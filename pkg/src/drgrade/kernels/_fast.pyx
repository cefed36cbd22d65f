# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled SGD inner loop; mirrors kernels.pure.sgd_epoch.

Loops are arranged so every inner loop runs over a contiguous trailing
dimension (axpy style), which the C compiler vectorizes. Within-batch
gradient accumulation order differs from the numpy fallback, so the two
backends agree to rounding, not bit for bit."""

from libc.math cimport exp, log
from libc.stdlib cimport free, malloc

import numpy as np


def sgd_epoch(double[:, ::1] w1, double[::1] b1, double[:, ::1] w2, double[::1] b2,
              const double[:, ::1] x, const long[::1] y, const double[::1] class_w,
              const long[::1] order, long batch_size, double lr):
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t d = w1.shape[0]
    cdef Py_ssize_t hdim = w1.shape[1]
    cdef Py_ssize_t k = w2.shape[1]
    cdef Py_ssize_t start, bsz, r, i, j, c, row
    cdef double nll_sum = 0.0, weight_sum = 0.0
    cdef double acc, xi, hj, zmax, sez, bw, wy, scale

    cdef double *xb = <double *> malloc(batch_size * d * sizeof(double))
    cdef double *a = <double *> malloc(batch_size * hdim * sizeof(double))
    cdef double *z = <double *> malloc(batch_size * k * sizeof(double))
    cdef double *dz = <double *> malloc(batch_size * k * sizeof(double))
    cdef double *dh = <double *> malloc(batch_size * hdim * sizeof(double))
    if xb == NULL or a == NULL or z == NULL or dz == NULL or dh == NULL:
        free(xb); free(a); free(z); free(dz); free(dh)
        raise MemoryError()

    try:
        start = 0
        while start < n:
            bsz = batch_size if start + batch_size <= n else n - start

            # gather the batch rows once (contiguous reuse below)
            for r in range(bsz):
                row = order[start + r]
                for i in range(d):
                    xb[r * d + i] = x[row, i]

            # hidden pre-activations: a = xb @ w1 + b1
            for r in range(bsz):
                for j in range(hdim):
                    a[r * hdim + j] = b1[j]
                for i in range(d):
                    xi = xb[r * d + i]
                    for j in range(hdim):
                        a[r * hdim + j] += xi * w1[i, j]

            # output logits through the rectifier: z = relu(a) @ w2 + b2
            for r in range(bsz):
                for c in range(k):
                    z[r * k + c] = b2[c]
                for j in range(hdim):
                    hj = a[r * hdim + j]
                    if hj > 0.0:
                        for c in range(k):
                            z[r * k + c] += hj * w2[j, c]

            # stable softmax, loss accumulation, and dz at pre-update params
            bw = 0.0
            for r in range(bsz):
                bw += class_w[y[order[start + r]]]
            weight_sum += bw
            for r in range(bsz):
                row = order[start + r]
                zmax = z[r * k]
                for c in range(1, k):
                    if z[r * k + c] > zmax:
                        zmax = z[r * k + c]
                sez = 0.0
                for c in range(k):
                    z[r * k + c] = exp(z[r * k + c] - zmax)
                    sez += z[r * k + c]
                wy = class_w[y[row]]
                nll_sum += -wy * log(z[r * k + y[row]] / sez)
                scale = wy / bw
                for c in range(k):
                    dz[r * k + c] = z[r * k + c] / sez * scale
                dz[r * k + y[row]] -= scale

            # dh = (dz @ w2.T) masked by the rectifier, before w2 changes
            for r in range(bsz):
                for j in range(hdim):
                    if a[r * hdim + j] > 0.0:
                        acc = 0.0
                        for c in range(k):
                            acc += dz[r * k + c] * w2[j, c]
                        dh[r * hdim + j] = acc
                    else:
                        dh[r * hdim + j] = 0.0

            # parameter updates (rank-1 per sample, contiguous rows)
            for r in range(bsz):
                for j in range(hdim):
                    hj = a[r * hdim + j]
                    if hj > 0.0:
                        for c in range(k):
                            w2[j, c] -= lr * hj * dz[r * k + c]
                for c in range(k):
                    b2[c] -= lr * dz[r * k + c]
                for i in range(d):
                    xi = lr * xb[r * d + i]
                    if xi != 0.0:
                        for j in range(hdim):
                            w1[i, j] -= xi * dh[r * hdim + j]
                for j in range(hdim):
                    b1[j] -= lr * dh[r * hdim + j]

            start += batch_size
    finally:
        free(xb); free(a); free(z); free(dz); free(dh)
    return nll_sum, weight_sum
