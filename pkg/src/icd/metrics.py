"""Full-reference quality metrics and the training-objective loss suite.

All metrics assume unit-range float images. PSNR/MSE/Rel-MAE work on any
matching pair of arrays; SSIM uses the standard Gaussian-window formulation
(11 taps, sigma 1.5, K1=0.01, K2=0.03, dynamic range 1) with the windowed
statistics evaluated per channel and the map averaged over the interior
where the window fits entirely inside the image.

The loss suite combines pixel fidelity with structure terms:

    l_rgb   = mean-l1(out, ref) + (1 - SSIM(out, ref))
    l_I     = mean-l1(I_out, I_ref) + (1 - SSIM(I_out, I_ref))
    l_C     = mean-l1(C_out, C_ref)
    l_total = l_rgb + lambda_I * l_I + lambda_C * l_C

where I and C are the max-baseline intensity envelope and log-chromaticity
of each image. A Smooth-l1 variant of the pixel terms is available but off
by default.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .core import EPS_DEFAULT, decompose
from .errors import InvalidInputError, ParamDomainError, ShapeMismatchError

PSNR_CAP_DB = 100.0

SSIM_WIN = 11
SSIM_SIGMA = 1.5
_SSIM_TRUNCATE = 3.5  # radius int(3.5 * 1.5 + 0.5) = 5, hence an 11-tap window
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass
class LossWeights:
    """Balancing weights of the total loss and the Smooth-l1 transition point."""

    lambda_i: float = 1500.0
    lambda_c: float = 2500.0
    smooth_l1_beta: float = 0.01

    def __post_init__(self):
        if self.lambda_i < 0 or self.lambda_c < 0 or self.smooth_l1_beta < 0:
            raise ParamDomainError("loss weights must be non-negative")


@dataclass
class MetricsReport:
    """Metric and loss values for one image pair; field names match the JSON keys."""

    psnr_db: float
    ssim: float
    mse: float
    rel_mae: float
    l_rgb: float
    l_I: float
    l_C: float
    l_total: float


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(a, b):
    """Mean squared error over all values."""
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(a, b, cap_db=PSNR_CAP_DB):
    """Peak signal-to-noise ratio in dB for unit-range images.

    Returns ``cap_db`` for identical inputs (MSE = 0); otherwise the exact
    value 10 * log10(1 / MSE), uncapped.
    """
    err = mse(a, b)
    if err == 0.0:
        return float(cap_db)
    return float(10.0 * np.log10(1.0 / err))


def mean_l1(a, b):
    """Mean absolute error over all values."""
    a, b = _pair(a, b)
    return float(np.mean(np.abs(a - b)))


def smooth_l1(a, b, beta=0.01):
    """Mean Smooth-l1 distance: 0.5 d^2 / beta below beta, d - beta / 2 above."""
    a, b = _pair(a, b)
    if beta <= 0:
        raise ParamDomainError(f"beta must be > 0, got {beta}")
    d = np.abs(a - b)
    return float(np.mean(np.where(d < beta, 0.5 * d * d / beta, d - 0.5 * beta)))


def rel_mae(a, b, delta=1e-2):
    """Relative mean absolute error of ``a`` against reference ``b``.

    mean(|a - b| / (b + delta)); delta stabilizes near-zero reference values.
    """
    a, b = _pair(a, b)
    return float(np.mean(np.abs(a - b) / (b + delta)))


def _ssim_plane(x, y):
    # windowed moments; any boundary mode works because the border where the
    # window hangs off the image is cropped before averaging
    def f(a):
        return gaussian_filter(a, sigma=SSIM_SIGMA, truncate=_SSIM_TRUNCATE, mode="nearest")

    ux, uy = f(x), f(y)
    vxx = f(x * x) - ux * ux
    vyy = f(y * y) - uy * uy
    vxy = f(x * y) - ux * uy
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    s = ((2.0 * ux * uy + c1) * (2.0 * vxy + c2)) / ((ux * ux + uy * uy + c1) * (vxx + vyy + c2))
    pad = SSIM_WIN // 2
    return float(s[pad:-pad, pad:-pad].mean())


def ssim(a, b):
    """Mean structural similarity between two images or two 2-d maps.

    For (H, W, 3) inputs the index is computed per channel and averaged.
    Both spatial dimensions must be at least the window size (11).
    """
    a, b = _pair(a, b)
    if a.ndim not in (2, 3):
        raise ShapeMismatchError(f"ssim expects 2-d or 3-d arrays, got shape {a.shape}")
    if min(a.shape[0], a.shape[1]) < SSIM_WIN:
        raise InvalidInputError(
            f"image {a.shape[:2]} is smaller than the {SSIM_WIN}x{SSIM_WIN} ssim window"
        )
    if a.ndim == 2:
        return _ssim_plane(a, b)
    return float(np.mean([_ssim_plane(a[..., c], b[..., c]) for c in range(a.shape[2])]))


def total_loss(out, ref, eps=EPS_DEFAULT, weights=None, use_smooth_l1=False):
    """Loss suite for an output/reference pair.

    Returns (l_rgb, l_I, l_C, l_total). ``use_smooth_l1`` swaps the mean-l1
    pixel terms for Smooth-l1 with ``weights.smooth_l1_beta``; the SSIM
    structure terms are unaffected.
    """
    w = weights or LossWeights()
    out, ref = _pair(out, ref)
    pix = (lambda a, b: smooth_l1(a, b, w.smooth_l1_beta)) if use_smooth_l1 else mean_l1

    dec_out = decompose(out, eps)
    dec_ref = decompose(ref, eps)
    l_rgb = pix(out, ref) + (1.0 - ssim(out, ref))
    l_i = pix(dec_out.intensity, dec_ref.intensity) + (1.0 - ssim(dec_out.intensity, dec_ref.intensity))
    l_c = pix(dec_out.chroma, dec_ref.chroma)
    l_tot = l_rgb + w.lambda_i * l_i + w.lambda_c * l_c
    return float(l_rgb), float(l_i), float(l_c), float(l_tot)


def metrics_report(out, ref, eps=EPS_DEFAULT, weights=None):
    """Assemble the full MetricsReport for an output/reference pair."""
    l_rgb, l_i, l_c, l_tot = total_loss(out, ref, eps, weights)
    return MetricsReport(
        psnr_db=psnr(out, ref),
        ssim=ssim(out, ref),
        mse=mse(out, ref),
        rel_mae=rel_mae(out, ref),
        l_rgb=l_rgb,
        l_I=l_i,
        l_C=l_c,
        l_total=l_tot,
    )
