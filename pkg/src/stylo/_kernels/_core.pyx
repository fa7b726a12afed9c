# cython: boundscheck=False, wraparound=False, cdivision=True
# Compiled kernels for the hot loops: pairwise distance matrices and
# hinge-loss training. Mirrors stylo._kernels.pure.

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

MEAN_ABS = 0
WEIGHTED_ABS = 1
MANHATTAN = 2
EUCLIDEAN = 3
CANBERRA = 4
COSINE = 5


def pairwise_kernel(X, int kind, weights=None):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0]
    cdef Py_ssize_t d = Xv.shape[1]
    out_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] w
    if kind == WEIGHTED_ABS:
        w = np.ascontiguousarray(weights, dtype=np.float64)
    else:
        w = np.zeros(1, dtype=np.float64)
    cdef Py_ssize_t i, j, k
    cdef double acc, diff, denom, dot, ni, nj, val
    cdef double[::1] norms
    if kind == COSINE:
        norms_arr = np.empty(n, dtype=np.float64)
        norms = norms_arr
        for i in range(n):
            acc = 0.0
            for k in range(d):
                acc += Xv[i, k] * Xv[i, k]
            norms[i] = sqrt(acc)
    for i in range(n):
        for j in range(i + 1, n):
            if kind == COSINE:
                dot = 0.0
                for k in range(d):
                    dot += Xv[i, k] * Xv[j, k]
                val = 1.0 - dot / (norms[i] * norms[j])
                if val < 0.0:
                    val = 0.0
            elif kind == EUCLIDEAN:
                acc = 0.0
                for k in range(d):
                    diff = Xv[i, k] - Xv[j, k]
                    acc += diff * diff
                val = sqrt(acc)
            elif kind == CANBERRA:
                acc = 0.0
                for k in range(d):
                    denom = fabs(Xv[i, k]) + fabs(Xv[j, k])
                    if denom > 0.0:
                        acc += fabs(Xv[i, k] - Xv[j, k]) / denom
                val = acc
            elif kind == WEIGHTED_ABS:
                acc = 0.0
                for k in range(d):
                    acc += w[k] * fabs(Xv[i, k] - Xv[j, k])
                val = acc
            else:
                acc = 0.0
                for k in range(d):
                    acc += fabs(Xv[i, k] - Xv[j, k])
                if kind == MEAN_ABS:
                    val = acc / d
                else:
                    val = acc
            out[i, j] = val
            out[j, i] = val
    return out_arr


def hinge_fullbatch(X, y, int epochs, double lam):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0]
    cdef Py_ssize_t d = Xv.shape[1]
    w_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] w = w_arr
    grad_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] g = grad_arr
    cdef Py_ssize_t i, k
    cdef int t
    cdef double eta, s, scale
    for t in range(1, epochs + 1):
        eta = 1.0 / (lam * t)
        for k in range(d):
            g[k] = 0.0
        for i in range(n):
            s = 0.0
            for k in range(d):
                s += Xv[i, k] * w[k]
            if yv[i] * s < 1.0:
                for k in range(d):
                    g[k] += yv[i] * Xv[i, k]
        scale = 1.0 - 1.0 / t
        for k in range(d):
            w[k] = scale * w[k] + (eta / n) * g[k]
    return w_arr


def hinge_sgd(X, y, orders, double lam):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef long long[:, ::1] ov = np.ascontiguousarray(orders, dtype=np.int64)
    cdef Py_ssize_t d = Xv.shape[1]
    cdef Py_ssize_t epochs = ov.shape[0]
    cdef Py_ssize_t n = ov.shape[1]
    w_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef Py_ssize_t e, p, k
    cdef long long i
    cdef long long t = 1
    cdef double eta, s, scale
    for e in range(epochs):
        for p in range(n):
            i = ov[e, p]
            eta = 1.0 / (lam * t)
            s = 0.0
            for k in range(d):
                s += Xv[i, k] * w[k]
            scale = 1.0 - 1.0 / t
            for k in range(d):
                w[k] = scale * w[k]
            if yv[i] * s < 1.0:
                for k in range(d):
                    w[k] += eta * yv[i] * Xv[i, k]
            t += 1
    return w_arr
