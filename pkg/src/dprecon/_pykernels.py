"""Pure numpy versions of the convolution and resampling loop kernels.

Accumulation order matches the compiled kernels in ``_ckernels.pyx`` exactly,
so both backends give bitwise-identical results.
"""
import numpy as np


def im2col(x, k, stride, pad):
    """Unfold a (C, H, W) array into a (C*k*k, Ho*Wo) patch matrix."""
    c, h, w = x.shape
    ho = (h + 2 * pad - k) // stride + 1
    wo = (w + 2 * pad - k) // stride + 1
    xp = np.zeros((c, h + 2 * pad, w + 2 * pad), dtype=np.float64)
    xp[:, pad:pad + h, pad:pad + w] = x
    cols = np.empty((c, k, k, ho, wo), dtype=np.float64)
    for ki in range(k):
        for kj in range(k):
            cols[:, ki, kj] = xp[:, ki:ki + stride * (ho - 1) + 1:stride,
                                 kj:kj + stride * (wo - 1) + 1:stride]
    return cols.reshape(c * k * k, ho * wo)


def col2im(cols, c, h, w, k, stride, pad):
    """Adjoint of :func:`im2col`: scatter-add patch columns back into (C, H, W)."""
    ho = (h + 2 * pad - k) // stride + 1
    wo = (w + 2 * pad - k) // stride + 1
    cols = cols.reshape(c, k, k, ho, wo)
    xp = np.zeros((c, h + 2 * pad, w + 2 * pad), dtype=np.float64)
    for ki in range(k):
        for kj in range(k):
            xp[:, ki:ki + stride * (ho - 1) + 1:stride,
               kj:kj + stride * (wo - 1) + 1:stride] += cols[:, ki, kj]
    return np.ascontiguousarray(xp[:, pad:pad + h, pad:pad + w])


def upsample(x, f):
    return np.repeat(np.repeat(x, f, axis=1), f, axis=2)


def upsample_adjoint(g, f):
    """Sum each f x f block of ``g``."""
    c, fh, fw = g.shape
    out = np.zeros((c, fh // f, fw // f), dtype=np.float64)
    for a in range(f):
        for b in range(f):
            out += g[:, a::f, b::f]
    return out
