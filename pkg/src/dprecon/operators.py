"""Multi-coil Cartesian acquisition model ``E = P F S`` and its adjoint.

Conventions: images are complex (H, W) arrays, k-space is complex (L, H, W),
the FFT is centered and orthonormal so its adjoint is its inverse, and the
two-channel real form of an image stacks (real, imag) on axis 0.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SamplingMask:
    """Binary k-space pattern with a centered, fully sampled calibration block.

    ``acs_rect`` is ``(row0, row1, col0, col1)`` with half-open bounds.
    """
    mask: np.ndarray
    acs_rect: tuple

    def __post_init__(self):
        m = np.asarray(self.mask)
        if not np.all((m == 0) | (m == 1)):
            raise ValueError("mask values must be 0 or 1")
        if not m.any():
            raise ValueError("mask has no sampled locations")
        r0, r1, c0, c1 = self.acs_rect
        if r1 > r0 and c1 > c0 and not np.all(m[r0:r1, c0:c1] == 1):
            raise ValueError("ACS block is not fully sampled in mask")

    @property
    def shape(self):
        return self.mask.shape

    @property
    def acceleration(self):
        return self.mask.size / float(np.count_nonzero(self.mask))


def fft2c(x):
    """Centered orthonormal 2-D DFT over the last two axes."""
    x = np.fft.ifftshift(x, axes=(-2, -1))
    return np.fft.fftshift(np.fft.fft2(x, norm="ortho"), axes=(-2, -1))


def ifft2c(k):
    """Inverse of :func:`fft2c`."""
    k = np.fft.ifftshift(k, axes=(-2, -1))
    return np.fft.fftshift(np.fft.ifft2(k, norm="ortho"), axes=(-2, -1))


def _mask_array(P):
    return P.mask if isinstance(P, SamplingMask) else np.asarray(P)


def _check(x_shape, S, P):
    m = _mask_array(P)
    if S.ndim != 3:
        raise ValueError(f"sensitivities must be (L, H, W), got {S.shape}")
    if S.shape[1:] != tuple(x_shape) or m.shape != tuple(x_shape):
        raise ValueError(
            f"shape mismatch: image {tuple(x_shape)}, maps {S.shape}, mask {m.shape}")
    return m


def forward_op(x, S, P):
    """Per coil: ``P * fft2c(S_l * x)``."""
    m = _check(x.shape, S, P)
    return m * fft2c(S * x[None])


def adjoint_op(d, S, P):
    """``sum_l conj(S_l) * ifft2c(P * d_l)``."""
    m = _check(d.shape[1:], S, P)
    if d.shape != S.shape:
        raise ValueError(f"k-space shape {d.shape} != maps shape {S.shape}")
    return np.sum(np.conj(S) * ifft2c(m * d), axis=0)


def zero_fill(d_u, S, P):
    """Normalized adjoint image (max magnitude 1) and the normalization scale."""
    img = adjoint_op(d_u, S, P)
    scale = float(np.max(np.abs(img)))
    if scale == 0.0 or not np.any(d_u):
        raise ValueError("empty acquisition: zero-filled image is identically zero")
    return img / scale, scale


def data_loss(x, d_u, S, P):
    """Squared-error data term and its gradient with respect to (Re x, Im x).

    Returns ``(loss, grad)`` where ``grad = 2 E^H (E x - d_u)`` as a complex
    array; its real part is d loss / d Re x and its imaginary part is
    d loss / d Im x.
    """
    r = forward_op(x, S, P) - d_u
    loss = float(np.sum(r.real ** 2 + r.imag ** 2))
    grad = 2.0 * adjoint_op(r, S, P)
    return loss, grad


def to_channels(x):
    """Complex (H, W) -> real (2, H, W)."""
    return np.stack([x.real, x.imag]).astype(np.float64)


def from_channels(x2):
    """Real (2, H, W) -> complex (H, W)."""
    return x2[0] + 1j * x2[1]
