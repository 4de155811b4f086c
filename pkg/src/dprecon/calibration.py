"""Coil sensitivity estimation (ESPIRiT-style) and the GRAPPA baseline.

Phase encode is axis 0 (rows) of each coil's k-space, readout is axis 1.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .operators import SamplingMask, ifft2c

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AcsBlock:
    data: np.ndarray     # complex (L, ah, aw)
    origin: tuple        # (row0, col0) in the full k-space grid


def extract_acs(d, P):
    """Copy the calibration rectangle of ``P`` out of k-space ``d``."""
    if not isinstance(P, SamplingMask):
        raise TypeError("extract_acs needs a SamplingMask with acs_rect")
    r0, r1, c0, c1 = P.acs_rect
    if r1 <= r0 or c1 <= c0:
        raise ValueError("sampling mask has an empty ACS region")
    return AcsBlock(np.array(d[:, r0:r1, c0:c1]), (r0, c0))


def calibration_matrix(acs, kernel):
    """Rows are all kernel x kernel patches (every coil) of the ACS block."""
    L, ah, aw = acs.shape
    if kernel > min(ah, aw):
        raise ValueError(f"kernel {kernel} larger than ACS block {ah}x{aw}")
    nh, nw = ah - kernel + 1, aw - kernel + 1
    win = np.lib.stride_tricks.sliding_window_view(acs, (kernel, kernel), axis=(1, 2))
    # win: (L, nh, nw, k, k) -> (nh*nw, L*k*k)
    return np.ascontiguousarray(win.transpose(1, 2, 0, 3, 4)).reshape(nh * nw, L * kernel * kernel)


def espirit_maps(acs, H, W, kernel=6, sv_thresh=0.01, eig_thresh=0.9):
    """Sensitivity maps from the calibration block.

    Keeps the k-space kernels whose singular values exceed ``sv_thresh`` times
    the largest, turns them into a per-pixel L x L operator in image space and
    takes its leading eigenvector where the eigenvalue is at least
    ``eig_thresh``. Coil 0 is made real non-negative at every pixel and maps
    have unit sum-of-squares on the support.

    Returns:
        (maps, support): complex (L, H, W) and boolean (H, W).
    """
    if not (0 < sv_thresh < 1 and 0 < eig_thresh < 1):
        raise ValueError("thresholds must lie in (0, 1)")
    data = acs.data if isinstance(acs, AcsBlock) else np.asarray(acs)
    L = data.shape[0]
    A = calibration_matrix(data, kernel)
    _, s, vh = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        raise ValueError("degenerate calibration data (rank 0)")
    V = vh[s >= sv_thresh * s[0]]
    kern = V.reshape(-1, L, kernel, kernel)

    # zero-pad each kernel into the full grid, centered, then to image space
    padded = np.zeros((kern.shape[0], L, H, W), dtype=np.complex128)
    r0, c0 = H // 2 - kernel // 2, W // 2 - kernel // 2
    padded[:, :, r0:r0 + kernel, c0:c0 + kernel] = kern
    img = ifft2c(padded)                                   # (n, L, H, W)
    # per pixel: G = (HW / k^2) sum_n a_n a_n^H, a_n = image-space kernel n
    a = img.transpose(2, 3, 1, 0)                          # (H, W, L, n)
    G = (a @ np.conj(a.swapaxes(-1, -2))) * (H * W / kernel ** 2)
    evals, evecs = np.linalg.eigh(G)
    lead = evecs[..., -1]                                  # (H, W, L)
    lam = evals[..., -1]

    ph = lead[..., 0]
    mag0 = np.abs(ph)
    rot = np.where(mag0 > 0, np.conj(ph) / np.where(mag0 > 0, mag0, 1), 1.0)
    lead = lead * rot[..., None]
    support = lam >= eig_thresh
    lead = lead / np.linalg.norm(lead, axis=-1, keepdims=True)
    maps = np.where(support[..., None], lead, 0).transpose(2, 0, 1)
    return np.ascontiguousarray(maps), support


@dataclass(frozen=True)
class GrappaKernel:
    weights: tuple       # per missing offset m = 1..R-1: complex (L, L*ny*nx)
    R: int
    ny: int              # sampled source lines
    nx: int              # readout taps
    ridge: float


def _source_rows(R, ny, m):
    """Row offsets of the source lines relative to a target at offset ``m`` past a sampled line."""
    first = -(ny // 2 - 1) * R if ny > 1 else 0
    return np.array([first + j * R for j in range(ny)]) - m


def grappa_calibrate(acs, R, kern=(4, 5), ridge=1e-4):
    """Fit GRAPPA weights on the ACS block.

    Args:
        acs: :class:`AcsBlock` or complex (L, ah, aw).
        R: 1-D acceleration along rows (>= 2).
        kern: ``(source lines, readout taps)``.
        ridge: Tikhonov weight relative to ``trace(A^H A)``.
    """
    data = acs.data if isinstance(acs, AcsBlock) else np.asarray(acs)
    if R < 2:
        raise ValueError("nothing to calibrate: R must be >= 2 so that lines are missing")
    ny, nx = kern
    L, ah, aw = data.shape
    hx = nx // 2
    weights = []
    for m in range(1, R):
        rows = _source_rows(R, ny, m)
        ys = np.arange(max(0, -rows.min()), min(ah, ah - rows.max()))
        xs = np.arange(hx, aw - (nx - 1 - hx))
        n_eq, n_unk = ys.size * xs.size, L * ny * nx
        if n_eq < n_unk:
            raise ValueError(
                f"underdetermined GRAPPA fit: {n_eq} equations for {n_unk} unknowns "
                f"(ACS {ah}x{aw}, kernel {ny}x{nx}, R={R})")
        if n_eq < 10 * n_unk:
            log.warning("GRAPPA fit has only %d equations for %d unknowns", n_eq, n_unk)
        A = _gather(data, ys, xs, rows, nx)        # (n_eq, n_unk)
        B = data[:, ys][:, :, xs].reshape(L, -1).T          # (n_eq, L)
        if ridge > 0:
            lam = ridge * np.real(np.vdot(A, A))
            A_aug = np.vstack([A, np.sqrt(lam) * np.eye(n_unk)])
            B_aug = np.vstack([B, np.zeros((n_unk, L), dtype=B.dtype)])
            w, *_ = np.linalg.lstsq(A_aug, B_aug, rcond=None)
        else:
            w, *_ = np.linalg.lstsq(A, B, rcond=None)
        weights.append(w.T)
    return GrappaKernel(tuple(weights), R, ny, nx, ridge)


def _gather(data, ys, xs, rows, nx):
    # source vectors for targets (ys x xs); samples beyond the grid read as zero
    L, h, w = data.shape
    hx = nx // 2
    py = max(0, -rows.min(), rows.max())
    padded = np.zeros((L, h + 2 * py, w + 2 * hx), dtype=np.complex128)
    padded[:, py:py + h, hx:hx + w] = data
    yy = ys[:, None, None, None] + rows[None, None, :, None] + py
    xx = xs[None, :, None, None] + np.arange(nx)[None, None, None, :]
    src = padded[:, yy, xx]                                  # (L, ny_t, nx_t, ny, nx)
    return src.transpose(1, 2, 0, 3, 4).reshape(ys.size * xs.size, -1)


def _row_lattice(mask, R):
    """Offset of the sampled-row lattice of a uniform 1-D pattern."""
    full = np.all(mask != 0, axis=1)
    empty = ~np.any(mask != 0, axis=1)
    if not np.all(full | empty):
        raise ValueError("GRAPPA needs a 1-D pattern: every row fully sampled or empty")
    sampled = np.flatnonzero(full)
    for off in range(R):
        lattice = (np.arange(mask.shape[0]) - off) % R == 0
        if np.all(full[lattice]):
            return off
    raise ValueError(f"mask is not a uniform pattern with R={R} (sampled rows {sampled[:8]}...)")


def grappa_apply(d_u, kernel, P):
    """Fill the missing rows of ``d_u``; acquired samples are left untouched."""
    mask = P.mask if isinstance(P, SamplingMask) else np.asarray(P)
    L, H, W = d_u.shape
    if kernel.weights and kernel.weights[0].shape[0] != L:
        raise ValueError(f"kernel fitted for {kernel.weights[0].shape[0]} coils, data has {L}")
    off = _row_lattice(mask, kernel.R)
    acquired = np.all(mask != 0, axis=1)
    out = np.array(d_u, dtype=np.complex128)
    for m in range(1, kernel.R):
        rows = _source_rows(kernel.R, kernel.ny, m)
        targets = np.flatnonzero(((np.arange(H) - off) % kernel.R == m) & ~acquired)
        if targets.size == 0:
            continue
        A = _gather(d_u, targets, np.arange(W), rows, kernel.nx)
        pred = A @ kernel.weights[m - 1].T                   # (n_t * W, L)
        out[:, targets, :] = pred.T.reshape(L, targets.size, W)
    return out


def rsos_combine(imgs):
    """Root sum of squares over the coil axis."""
    imgs = np.asarray(imgs)
    return np.sqrt(np.sum(imgs.real ** 2 + imgs.imag ** 2, axis=0))


def grappa_recon(d_u, P, acs=None, R=None, kern=(4, 5), ridge=1e-4):
    """Calibrate, fill and combine; returns ``(filled_kspace, rsos_image)``."""
    if acs is None:
        acs = extract_acs(d_u, P)
    if R is None:
        R = infer_r(P.mask if isinstance(P, SamplingMask) else P)
    k = grappa_calibrate(acs, R, kern, ridge)
    filled = grappa_apply(d_u, k, P)
    return filled, rsos_combine(ifft2c(filled))


def infer_r(mask):
    """Row spacing of a uniform 1-D pattern (ignoring the calibration rows)."""
    full = np.flatnonzero(np.all(np.asarray(mask) != 0, axis=1))
    if full.size < 2:
        raise ValueError("cannot infer acceleration from fewer than two sampled rows")
    gaps = np.diff(full)
    return int(gaps.max())
