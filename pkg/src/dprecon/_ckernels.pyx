# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled loop kernels; drop-in replacements for ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def im2col(const double[:, :, ::1] x, Py_ssize_t k, Py_ssize_t stride, Py_ssize_t pad):
    cdef Py_ssize_t c = x.shape[0], h = x.shape[1], w = x.shape[2]
    cdef Py_ssize_t ho = (h + 2 * pad - k) // stride + 1
    cdef Py_ssize_t wo = (w + 2 * pad - k) // stride + 1
    out = np.zeros((c * k * k, ho * wo), dtype=np.float64)
    cdef double[:, ::1] cols = out
    cdef Py_ssize_t ci, ki, kj, i, j, r, yi, xj
    with nogil:
        for ci in range(c):
            for ki in range(k):
                for kj in range(k):
                    r = (ci * k + ki) * k + kj
                    for i in range(ho):
                        yi = i * stride + ki - pad
                        if yi < 0 or yi >= h:
                            continue
                        for j in range(wo):
                            xj = j * stride + kj - pad
                            if xj < 0 or xj >= w:
                                continue
                            cols[r, i * wo + j] = x[ci, yi, xj]
    return out


def col2im(cols_in, Py_ssize_t c, Py_ssize_t h, Py_ssize_t w,
           Py_ssize_t k, Py_ssize_t stride, Py_ssize_t pad):
    cdef Py_ssize_t ho = (h + 2 * pad - k) // stride + 1
    cdef Py_ssize_t wo = (w + 2 * pad - k) // stride + 1
    cdef const double[:, ::1] cols = np.ascontiguousarray(
        cols_in, dtype=np.float64).reshape(c * k * k, ho * wo)
    out = np.zeros((c, h, w), dtype=np.float64)
    cdef double[:, :, ::1] x = out
    cdef Py_ssize_t ci, ki, kj, i, j, r, yi, xj
    # (ki, kj) outermost per channel: same per-element order as the numpy path
    with nogil:
        for ci in range(c):
            for ki in range(k):
                for kj in range(k):
                    r = (ci * k + ki) * k + kj
                    for i in range(ho):
                        yi = i * stride + ki - pad
                        if yi < 0 or yi >= h:
                            continue
                        for j in range(wo):
                            xj = j * stride + kj - pad
                            if xj < 0 or xj >= w:
                                continue
                            x[ci, yi, xj] += cols[r, i * wo + j]
    return out


def upsample(const double[:, :, ::1] x, Py_ssize_t f):
    cdef Py_ssize_t c = x.shape[0], h = x.shape[1], w = x.shape[2]
    out = np.empty((c, h * f, w * f), dtype=np.float64)
    cdef double[:, :, ::1] y = out
    cdef Py_ssize_t ci, i, j
    with nogil:
        for ci in range(c):
            for i in range(h * f):
                for j in range(w * f):
                    y[ci, i, j] = x[ci, i // f, j // f]
    return out


def upsample_adjoint(const double[:, :, ::1] g, Py_ssize_t f):
    cdef Py_ssize_t c = g.shape[0], h = g.shape[1] // f, w = g.shape[2] // f
    out = np.zeros((c, h, w), dtype=np.float64)
    cdef double[:, :, ::1] y = out
    cdef Py_ssize_t ci, a, b, i, j
    with nogil:
        for ci in range(c):
            for a in range(f):
                for b in range(f):
                    for i in range(h):
                        for j in range(w):
                            y[ci, i, j] += g[ci, i * f + a, j * f + b]
    return out
