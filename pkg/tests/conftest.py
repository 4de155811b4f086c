"""Independent reference implementations used as test oracles."""
import numpy as np
import pytest


def naive_conv2d(x, w, b, stride, pad):
    """Direct sliding-window cross-correlation, explicit loops."""
    cin, h, wd = x.shape
    cout, _, k, _ = w.shape
    ho = (h + 2 * pad - k) // stride + 1
    wo = (wd + 2 * pad - k) // stride + 1
    out = np.zeros((cout, ho, wo))
    for o in range(cout):
        for i in range(ho):
            for j in range(wo):
                acc = b[o]
                for c in range(cin):
                    for ki in range(k):
                        for kj in range(k):
                            yi = i * stride + ki - pad
                            xj = j * stride + kj - pad
                            if 0 <= yi < h and 0 <= xj < wd:
                                acc += w[o, c, ki, kj] * x[c, yi, xj]
                out[o, i, j] = acc
    return out


def naive_dft2c(x):
    """Centered orthonormal 2-D DFT by double sum."""
    H, W = x.shape
    cy, cx = H // 2, W // 2
    out = np.zeros((H, W), dtype=complex)
    for u in range(H):
        for v in range(W):
            s = 0j
            for m in range(H):
                for n in range(W):
                    s += x[m, n] * np.exp(-2j * np.pi * ((u - cy) * (m - cy) / H
                                                         + (v - cx) * (n - cx) / W))
            out[u, v] = s
    return out / np.sqrt(H * W)


def dense_forward_matrix(S, mask):
    """Explicit (L*H*W) x (H*W) complex matrix of the acquisition operator."""
    L, H, W = S.shape
    N = H * W
    cy, cx = H // 2, W // 2
    u, v = np.meshgrid(np.arange(H), np.arange(W), indexing="ij")
    F = np.exp(-2j * np.pi * (np.outer((u - cy).ravel(), (u - cy).ravel()) / H
                              + np.outer((v - cx).ravel(), (v - cx).ravel()) / W)) / np.sqrt(N)
    blocks = [mask.ravel()[:, None] * F * S[l].ravel()[None, :] for l in range(L)]
    return np.vstack(blocks)


def central_diff(f, x, h=1e-5):
    """Central finite differences of scalar ``f`` at every entry of ``x``."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f(x)
        flat[i] = old - h
        fm = f(x)
        flat[i] = old
        gf[i] = (fp - fm) / (2 * h)
    return g


def rel_err(a, b):
    """Entrywise relative error max|a-b| / max(|a|, |b|) (0 where both are 0)."""
    a, b = np.asarray(a), np.asarray(b)
    den = np.maximum(np.abs(a), np.abs(b))
    out = np.zeros(np.broadcast(a, b).shape)
    nz = den > 0
    out[nz] = np.abs(a - b)[nz] / den[nz]
    return out


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
