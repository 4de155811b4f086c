"""Per-subject reconstruction by fitting an untrained network to the measured data."""
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from . import arrayfile
from .autodiff import NonFiniteError, Tape, Tensor, add, external_loss, scale, sum_squares
from .operators import data_loss, from_channels, to_channels, zero_fill
from .optim import AdamState, adam_step
from .unet import UNetConfig, build_unet, param_l2, unet_forward

log = logging.getLogger(__name__)

DEFAULT_REG_LAMBDA = 1e-6


@dataclass(frozen=True)
class ReconConfig:
    unet: UNetConfig = field(default_factory=UNetConfig)
    lr: float = 1e-3
    iterations: int = 2000
    lam: float = 0.0
    seed: int = 0
    checkpoint_every: int = 0
    checkpoint_dir: str = ""
    plateau_stop: bool = False
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.checkpoint_every < 0:
            raise ValueError("checkpoint_every must be >= 0")
        self.unet.validate()


@dataclass
class ReconResult:
    image: np.ndarray              # complex (H, W), de-normalized
    loss_history: np.ndarray       # (iterations_run, 3): data, reg, total
    iterations_run: int
    params: object = None          # parameters that produced ``image``
    scale: float = 1.0
    x0: np.ndarray = None          # normalized zero-filled input, complex


def total_loss(data_term, params, lam):
    """Data term plus ``lam`` times the squared parameter norm."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    return data_term + lam * param_l2(params)


def _loss_and_grads(params, x0, d_norm, S, P, lam, regularized):
    tape = Tape()
    p = params.on_tape(tape)
    out = unet_forward(p, x0, tape)

    def fit(arr):
        loss, g = data_loss(from_channels(arr), d_norm, S, P)
        return loss, to_channels(g)

    data = external_loss(out, fit, tape)
    if regularized:
        # the 2 * lam * theta gradient comes from this branch of the graph
        reg_terms = [sum_squares(t, tape) for t in p.values()]
        reg = reg_terms[0]
        for r in reg_terms[1:]:
            reg = add(reg, r, tape)
        total = add(data, scale(reg, lam, tape), tape)
        reg_value = float(reg.data)
    else:
        total = data
        reg_value = param_l2(params)
    grads = tape.backward(total)
    return (float(data.data), reg_value, float(total.data),
            [grads[t] for t in p.values()], out.data)


def _save_checkpoint(params, directory, it):
    path = os.path.join(directory, f"ckpt_{it:06d}")
    os.makedirs(path, exist_ok=True)
    for name, t in params.tensors.items():
        arrayfile.write_array(os.path.join(path, f"{name}.nldt"), t.data)


def load_checkpoint(params, path):
    """Load tensors saved by a checkpoint into a copy of ``params``."""
    return params.replace(
        [arrayfile.read_array(os.path.join(path, f"{n}.nldt")) for n in params.names()])


def reconstruct(d_u, S, P, cfg, regularized=None, callback=None):
    """Fit a freshly initialized network so its output explains ``d_u``.

    Args:
        d_u: undersampled multi-coil k-space, complex (L, H, W).
        S: coil sensitivities, complex (L, H, W).
        P: :class:`SamplingMask` or binary (H, W) array.
        cfg: :class:`ReconConfig`. ``cfg.lam == 0`` fits the plain data term.
        regularized: force the regularized loss graph even when ``cfg.lam == 0``
            (default: regularized iff ``cfg.lam > 0``).
        callback: optional ``callback(iteration, data, reg, total)``.

    Returns:
        :class:`ReconResult`.
    """
    cfg.validate()
    if regularized is None:
        regularized = cfg.lam > 0
    x0c, zf_scale = zero_fill(d_u, S, P)
    d_norm = d_u / zf_scale
    x0 = Tensor(to_channels(x0c))

    ucfg = cfg.unet
    if ucfg.seed != cfg.seed:
        ucfg = UNetConfig(**{**ucfg.__dict__, "seed": cfg.seed})
    params = build_unet(ucfg)
    state = AdamState()
    history = []
    last_out = None
    used = params
    for it in range(cfg.iterations):
        data, reg, total, grads, out = _loss_and_grads(
            params, x0, d_norm, S, P, cfg.lam, regularized)
        if not np.isfinite(total):
            raise NonFiniteError(f"non-finite loss at iteration {it}")
        history.append((data, reg, total))
        last_out, used = out, params
        if callback is not None:
            callback(it, data, reg, total)
        if cfg.checkpoint_every and cfg.checkpoint_dir and it % cfg.checkpoint_every == 0:
            _save_checkpoint(params, cfg.checkpoint_dir, it)
        if cfg.plateau_stop and it >= 200:
            prev = history[it - 200][2]
            if abs(prev - total) <= 1e-7 * abs(prev):
                log.info("plateau reached at iteration %d", it)
                break
        if it == cfg.iterations - 1:
            break
        try:
            new = adam_step([t.data for t in params.values()], grads, state,
                            lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
        except NonFiniteError as exc:
            raise NonFiniteError(f"iteration {it}: {exc}") from exc
        params = params.replace(new)

    return ReconResult(
        image=from_channels(last_out) * zf_scale,
        loss_history=np.asarray(history, dtype=np.float64).reshape(-1, 3),
        iterations_run=len(history),
        params=used,
        scale=zf_scale,
        x0=x0c,
    )
