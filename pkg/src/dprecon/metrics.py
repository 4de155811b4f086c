"""Image quality metrics on magnitude images."""
from dataclasses import dataclass

import numpy as np

PSNR_CAP = 300.0


@dataclass(frozen=True)
class MetricReport:
    psnr_db: float
    ssim: float
    nrmse: float
    psnr_capped: bool = False

    def csv_header(self):
        return "psnr_db,ssim,nrmse"

    def csv_row(self):
        return f"{self.psnr_db!r},{self.ssim!r},{self.nrmse!r}"


def _pair(ref, test):
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")
    return ref, test


def nrmse(ref, test):
    ref, test = _pair(ref, test)
    return float(np.linalg.norm(test - ref) / np.linalg.norm(ref))


def psnr_capped(ref, test):
    """``(psnr_db, capped)``; identical images give ``(PSNR_CAP, True)``."""
    ref, test = _pair(ref, test)
    rmse = np.sqrt(np.mean((test - ref) ** 2))
    if rmse == 0:
        return PSNR_CAP, True
    val = 20.0 * np.log10(ref.max() / rmse)
    return (PSNR_CAP, True) if val > PSNR_CAP else (float(val), False)


def psnr(ref, test):
    """Peak SNR in dB relative to ``max(ref)``."""
    return psnr_capped(ref, test)[0]


def gaussian_window(size=7, sigma=1.5):
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r ** 2) / (2 * sigma ** 2))
    return g / g.sum()


def _filter_valid(img, g):
    # separable 'valid' correlation
    k = g.size
    h, w = img.shape
    tmp = sum(g[i] * img[i:h - k + 1 + i, :] for i in range(k))
    return sum(g[j] * tmp[:, j:w - k + 1 + j] for j in range(k))


def ssim(ref, test, normalize=True, data_range=None, win_size=7, sigma=1.5,
         k1=0.01, k2=0.03):
    """Mean SSIM over all fully contained Gaussian windows.

    With ``normalize`` both images are divided by ``max(ref)`` and the dynamic
    range is that of the normalized reference. With ``normalize=False``
    ``data_range`` must be given and the metric is symmetric in its arguments.
    """
    ref, test = _pair(ref, test)
    if min(ref.shape) < win_size:
        raise ValueError(f"images smaller than the {win_size}x{win_size} window")
    if normalize:
        peak = ref.max()
        if peak <= 0:
            raise ValueError("reference maximum must be positive for normalization")
        ref, test = ref / peak, test / peak
        if data_range is None:
            data_range = ref.max() - ref.min()
    elif data_range is None:
        raise ValueError("data_range is required when normalize=False")
    if data_range <= 0:
        raise ValueError("data range must be positive")
    g = gaussian_window(win_size, sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mu_x = _filter_valid(ref, g)
    mu_y = _filter_valid(test, g)
    sxx = _filter_valid(ref * ref, g) - mu_x ** 2
    syy = _filter_valid(test * test, g) - mu_y ** 2
    sxy = _filter_valid(ref * test, g) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x ** 2 + mu_y ** 2 + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def evaluate(ref, test):
    """All three metrics on magnitudes (complex inputs are converted with ``abs``)."""
    ref, test = np.abs(ref), np.abs(test)
    p, capped = psnr_capped(ref, test)
    return MetricReport(p, ssim(ref, test), nrmse(ref, test), capped)
