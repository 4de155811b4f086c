"""Synthetic phantoms, coil maps, sampling patterns and acquisitions."""
import numpy as np

from .operators import SamplingMask, fft2c

# Modified Shepp-Logan (Toft): intensity, semi-axis a, semi-axis b, x0, y0, angle [deg]
SHEPP_LOGAN_ELLIPSES = np.array([
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0],
    [-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0],
    [-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0],
    [0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0],
    [0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0],
    [0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0],
    [0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0],
    [0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0],
    [0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0],
])


def pixel_coords(H, W):
    """Pixel-center coordinates in [-1, 1]; x grows with column, y decreases with row."""
    x = (2.0 * np.arange(W) + 1.0) / W - 1.0
    y = 1.0 - (2.0 * np.arange(H) + 1.0) / H
    return np.meshgrid(x, y)


def shepp_logan_magnitude(H, W):
    X, Y = pixel_coords(H, W)
    img = np.zeros((H, W))
    for val, a, b, x0, y0, ang in SHEPP_LOGAN_ELLIPSES:
        t = np.deg2rad(ang)
        xr = (X - x0) * np.cos(t) + (Y - y0) * np.sin(t)
        yr = -(X - x0) * np.sin(t) + (Y - y0) * np.cos(t)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += val
    return np.clip(img, 0.0, None)


def smooth_phase(H, W, seed):
    """Seeded quadratic polynomial in the normalized pixel coordinates."""
    c = np.random.default_rng(seed).uniform(-1.0, 1.0, 6)
    X, Y = pixel_coords(H, W)
    return c[0] + c[1] * X + c[2] * Y + c[3] * X * X + c[4] * X * Y + c[5] * Y * Y


def shepp_logan(H, W, phase_strength=0.0, seed=0):
    """Complex Shepp-Logan phantom with max magnitude 1 and smooth synthetic phase."""
    if H < 16 or W < 16:
        raise ValueError(f"phantom must be at least 16x16, got {H}x{W}")
    mag = shepp_logan_magnitude(H, W)
    mag = mag / mag.max()
    if phase_strength == 0:
        return mag.astype(np.complex128)
    return mag * np.exp(1j * phase_strength * smooth_phase(H, W, seed))


def coil_profiles(L, X, Y, seed):
    """Unnormalized ring-of-Gaussians coil profiles on arbitrary coordinates."""
    rng = np.random.default_rng(seed)
    offset = rng.uniform(0, 2 * np.pi)
    ramps = rng.uniform(-0.5, 0.5, (L, 3))
    maps = np.empty((L,) + X.shape, dtype=np.complex128)
    for l in range(L):
        phi = offset + 2 * np.pi * l / L
        cx, cy = 0.9 * np.cos(phi), 0.9 * np.sin(phi)
        mag = np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2 * 0.6 ** 2))
        phase = np.pi * (ramps[l, 0] * X + ramps[l, 1] * Y) + 2 * np.pi * ramps[l, 2]
        maps[l] = mag * np.exp(1j * phase)
    return maps


def simulate_coils(L, H, W, seed=0):
    """Smooth complex coil maps normalized to unit sum-of-squares at every pixel."""
    if L < 1:
        raise ValueError(f"need at least one coil, got {L}")
    X, Y = pixel_coords(H, W)
    maps = coil_profiles(L, X, Y, seed)
    rss = np.sqrt(np.sum(np.abs(maps) ** 2, axis=0))
    return maps / rss


def _acs_bounds(n, acs):
    start = n // 2 - acs // 2
    return start, start + acs


def sample_pattern(kind, H, W, R, acs_lines):
    """Uniform Cartesian undersampling with a centered calibration block.

    ``uniform1d`` keeps every ``R``-th row (phase encode axis 0) plus
    ``acs_lines`` centered full rows. ``uniform2d`` takes ``R = (R1, R2)`` and
    keeps the points on every ``R1``-th row and ``R2``-th column, plus a
    centered ``acs_lines`` square (or ``(rows, cols)`` pair). The lattice is
    anchored so the center row/column is sampled.
    """
    mask = np.zeros((H, W), dtype=np.float64)
    if kind == "uniform1d":
        R = int(R if np.isscalar(R) else R[0])
        if R < 1:
            raise ValueError(f"R must be >= 1, got {R}")
        if not 0 <= acs_lines <= H:
            raise ValueError(f"{acs_lines} ACS lines do not fit in {H} rows")
        rows = np.arange(H)
        mask[(rows - H // 2) % R == 0, :] = 1
        r0, r1 = _acs_bounds(H, acs_lines)
        mask[r0:r1, :] = 1
        rect = (r0, r1, 0, W) if acs_lines else (0, 0, 0, 0)
    elif kind == "uniform2d":
        R1, R2 = (int(R), int(R)) if np.isscalar(R) else (int(R[0]), int(R[1]))
        if R1 < 1 or R2 < 1:
            raise ValueError(f"R must be >= 1, got {(R1, R2)}")
        ah, aw = (acs_lines, acs_lines) if np.isscalar(acs_lines) else acs_lines
        if not (0 <= ah <= H and 0 <= aw <= W):
            raise ValueError(f"ACS {ah}x{aw} does not fit in {H}x{W}")
        rows = (np.arange(H) - H // 2) % R1 == 0
        cols = (np.arange(W) - W // 2) % R2 == 0
        mask[np.ix_(rows, cols)] = 1
        r0, r1 = _acs_bounds(H, ah)
        c0, c1 = _acs_bounds(W, aw)
        mask[r0:r1, c0:c1] = 1
        rect = (r0, r1, c0, c1) if ah and aw else (0, 0, 0, 0)
    else:
        raise ValueError(f"unknown pattern kind {kind!r}")
    return SamplingMask(mask, rect)


def simulate_acquisition(x, S, P, noise_sigma=0.0, seed=0):
    """Fully sampled multi-coil k-space plus seeded complex Gaussian noise, and its masked copy.

    ``noise_sigma`` is the standard deviation of the complex noise per sample
    (real and imaginary parts each get ``noise_sigma / sqrt(2)``).
    """
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    mask = P.mask if isinstance(P, SamplingMask) else np.asarray(P)
    d_full = fft2c(S * x[None])
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal(d_full.shape) + 1j * rng.standard_normal(d_full.shape)
        d_full = d_full + noise * (noise_sigma / np.sqrt(2.0))
    return d_full, mask * d_full


def find_acs(mask):
    """Largest centered fully sampled rectangle, grown greedily from the center.

    Returns ``(row0, row1, col0, col1)`` half-open; used when only a mask file
    is available.
    """
    m = np.asarray(mask) != 0
    H, W = m.shape
    r, c = H // 2, W // 2
    if not m[r, c]:
        raise ValueError("mask center is not sampled; no calibration region")
    r0, r1, c0, c1 = r, r + 1, c, c + 1
    grown = True
    while grown:
        grown = False
        if r0 > 0 and m[r0 - 1, c0:c1].all():
            r0 -= 1
            grown = True
        if r1 < H and m[r1, c0:c1].all():
            r1 += 1
            grown = True
        if c0 > 0 and m[r0:r1, c0 - 1].all():
            c0 -= 1
            grown = True
        if c1 < W and m[r0:r1, c1].all():
            c1 += 1
            grown = True
    return r0, r1, c0, c1
