"""Backend selection for the convolution loop kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is used. Set ``DPRECON_KERNELS=python`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("DPRECON_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def use_backend(name):
    """Switch kernels at runtime ("cython" or "python"). Returns the previous name."""
    global _impl, BACKEND
    prev = BACKEND
    if name == "python":
        _impl = _pykernels
    elif name == "cython":
        from . import _ckernels
        _impl = _ckernels
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    BACKEND = name
    return prev


def im2col(x, k, stride, pad):
    return _impl.im2col(x, k, stride, pad)


def col2im(cols, c, h, w, k, stride, pad):
    return _impl.col2im(cols, c, h, w, k, stride, pad)


def upsample(x, f):
    return _impl.upsample(x, f)


def upsample_adjoint(g, f):
    return _impl.upsample_adjoint(g, f)
