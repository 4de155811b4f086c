"""ADAM with bias correction over a list of float64 arrays."""
from dataclasses import dataclass, field

import numpy as np

from .autodiff import NonFiniteError


@dataclass
class AdamState:
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    t: int = 0

    @classmethod
    def zeros_like(cls, arrays):
        return cls([np.zeros_like(a) for a in arrays], [np.zeros_like(a) for a in arrays], 0)


def adam_step(params, grads, state, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
    """One ADAM update.

    Args:
        params: list of arrays (not modified).
        grads: list of gradient arrays matching ``params``.
        state: :class:`AdamState`; updated in place (moments replaced, ``t`` incremented).

    Returns:
        list of updated parameter arrays.
    """
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} params but {len(grads)} gradients")
    if not state.m:
        fresh = AdamState.zeros_like(params)
        state.m, state.v = fresh.m, fresh.v
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ValueError(f"param {i}: shape {p.shape} vs gradient {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for param {i} at step {state.t + 1}")

    state.t += 1
    c1 = 1.0 - beta1 ** state.t
    c2 = 1.0 - beta2 ** state.t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        m = beta1 * state.m[i] + (1.0 - beta1) * g
        v = beta2 * state.v[i] + (1.0 - beta2) * (g * g)
        state.m[i], state.v[i] = m, v
        out.append(p - lr * (m / c1) / (np.sqrt(v / c2) + eps))
    return out
