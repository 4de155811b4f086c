"""Parallel MRI reconstruction with an untrained encoder-decoder prior.

A randomly initialized network is fit to a single undersampled multi-coil
acquisition; GRAPPA and zero-filling are provided as baselines.
"""
from .kernels import BACKEND as KERNEL_BACKEND
from .operators import SamplingMask, adjoint_op, data_loss, fft2c, forward_op, ifft2c, zero_fill
from .recon import ReconConfig, ReconResult, reconstruct, total_loss
from .unet import NetworkParams, UNetConfig, build_unet, param_l2, unet_forward

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "SamplingMask", "adjoint_op", "data_loss", "fft2c", "forward_op",
    "ifft2c", "zero_fill", "ReconConfig", "ReconResult", "reconstruct", "total_loss",
    "NetworkParams", "UNetConfig", "build_unet", "param_l2", "unet_forward",
]
