"""Randomly initialized convolutional encoder-decoder with skip connections.

Layout for ``depth`` scales (every conv but the last has ``filters`` outputs)::

    enc0:  conv(in -> f), conv(f -> f)
    enc s: down = stride-2 conv(f -> f), conv, conv          (s = 1 .. depth-1)
    dec s: up = nearest x2 + conv(f -> f), concat(enc s), conv(2f -> f), conv
    out:   1x1 conv(f -> 2), linear

All convs except ``out`` are followed by a leaky ReLU.
"""
from dataclasses import dataclass

import numpy as np

from .autodiff import (NonFiniteError, Tensor, concat_channels, conv2d, leaky_relu,
                       upsample_nearest)


@dataclass(frozen=True)
class UNetConfig:
    depth: int = 4
    filters: int = 128
    kernel: int = 3
    slope: float = 0.1
    seed: int = 0
    in_channels: int = 2
    out_channels: int = 2

    def validate(self):
        if self.depth < 2:
            raise ValueError(f"depth must be >= 2, got {self.depth}")
        if self.filters < 1:
            raise ValueError(f"filters must be >= 1, got {self.filters}")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ValueError(f"kernel must be a positive odd integer, got {self.kernel}")
        if not 0.0 <= self.slope < 1.0:
            raise ValueError(f"slope must be in [0, 1), got {self.slope}")


def layer_specs(cfg):
    """Ordered ``(name, c_in, c_out, kernel, stride)`` for every conv layer."""
    f, k = cfg.filters, cfg.kernel
    specs = [("enc0.conv1", cfg.in_channels, f, k, 1), ("enc0.conv2", f, f, k, 1)]
    for s in range(1, cfg.depth):
        specs += [(f"enc{s}.down", f, f, k, 2),
                  (f"enc{s}.conv1", f, f, k, 1),
                  (f"enc{s}.conv2", f, f, k, 1)]
    for s in range(cfg.depth - 2, -1, -1):
        specs += [(f"dec{s}.up", f, f, k, 1),
                  (f"dec{s}.conv1", 2 * f, f, k, 1),
                  (f"dec{s}.conv2", f, f, k, 1)]
    specs.append(("out", f, cfg.out_channels, 1, 1))
    return specs


class NetworkParams:
    """Ordered mapping of parameter name -> :class:`Tensor`."""

    def __init__(self, cfg, tensors):
        self.cfg = cfg
        self.tensors = dict(tensors)

    def names(self):
        return list(self.tensors)

    def values(self):
        return list(self.tensors.values())

    def __getitem__(self, name):
        return self.tensors[name]

    def __len__(self):
        return len(self.tensors)

    def count(self):
        return sum(t.data.size for t in self.tensors.values())

    def replace(self, arrays):
        """New params with the same names and the given arrays (same order)."""
        return NetworkParams(self.cfg, {n: Tensor(a, name=n) for n, a in zip(self.tensors, arrays)})

    def on_tape(self, tape):
        return NetworkParams(self.cfg, {n: tape.leaf(t, name=n) for n, t in self.tensors.items()})

    def flat(self):
        return np.concatenate([t.data.reshape(-1) for t in self.tensors.values()])


def build_unet(cfg):
    """Seeded He-uniform weights (bound sqrt(6 / fan_in)) and zero biases."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    tensors = {}
    for name, cin, cout, k, _ in layer_specs(cfg):
        bound = np.sqrt(6.0 / (cin * k * k))
        tensors[f"{name}.weight"] = Tensor(rng.uniform(-bound, bound, (cout, cin, k, k)))
        tensors[f"{name}.bias"] = Tensor(np.zeros(cout))
    for n, t in tensors.items():
        t.name = n
    return NetworkParams(cfg, tensors)


def unet_forward(params, x0, tape=None):
    """Run the network on a (2, H, W) tensor; returns a (2, H, W) tensor."""
    cfg = params.cfg
    if x0.data.ndim != 3 or x0.shape[0] != cfg.in_channels:
        raise ValueError(f"expected input ({cfg.in_channels}, H, W), got {x0.shape}")
    m = 2 ** (cfg.depth - 1)
    if x0.shape[1] % m or x0.shape[2] % m:
        raise ValueError(
            f"input {x0.shape[1]}x{x0.shape[2]} not divisible by {m} (depth {cfg.depth})")
    pad = (cfg.kernel - 1) // 2

    def conv(name, x, stride=1, act=True):
        w, b = params[f"{name}.weight"], params[f"{name}.bias"]
        p = pad if w.shape[-1] > 1 else 0
        y = conv2d(x, w, b, stride=stride, pad=p, tape=tape)
        return leaky_relu(y, cfg.slope, tape=tape) if act else y

    h = conv("enc0.conv2", conv("enc0.conv1", x0))
    skips = [h]
    for s in range(1, cfg.depth):
        h = conv(f"enc{s}.down", h, stride=2)
        h = conv(f"enc{s}.conv2", conv(f"enc{s}.conv1", h))
        skips.append(h)
    for s in range(cfg.depth - 2, -1, -1):
        h = conv(f"dec{s}.up", upsample_nearest(h, 2, tape=tape))
        h = concat_channels(h, skips[s], tape=tape)
        h = conv(f"dec{s}.conv2", conv(f"dec{s}.conv1", h))
    out = conv("out", h, act=False)
    if not np.all(np.isfinite(out.data)):
        raise NonFiniteError("network output is non-finite")
    return out


def param_l2(params):
    """Sum of squares of every parameter entry."""
    total = 0.0
    for t in params.values():
        flat = t.data.reshape(-1)
        total += float(flat @ flat)
    return total
