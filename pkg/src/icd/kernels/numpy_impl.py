"""Pure-numpy kernel implementations (fallback backend).

Vectorized counterparts of the numba kernels. Shapes are fixed by the
wrappers in :mod:`icd.core` and :mod:`icd.noise`: images are (H, W, 3)
float64, intensity maps (H, W) float64.
"""

import numpy as np

from . import MODE_AVE, MODE_MIN

NAME = "numpy"


def decompose_kernel(img, eps, mode):
    if mode == MODE_MIN:
        base = img.min(axis=2)
    elif mode == MODE_AVE:
        base = img.mean(axis=2)
    else:
        base = img.max(axis=2)
    # log(base + eps) subtracted from the same float for the base channel,
    # so the anchor component is exactly 0 under the max/min modes
    chroma = np.log(img + eps) - np.log(base + eps)[..., None]
    return base, chroma


def reconstruct_kernel(inten, chroma, eps):
    return (inten + eps)[..., None] * np.exp(chroma) - eps


def gate_kernel(inten, chroma, alpha, gamma):
    g = alpha + (1.0 - alpha) * np.sin(0.5 * np.pi * inten) ** gamma
    return chroma * g[..., None]


def mc_trial_sums(clean, chroma_clean, anchor, eta, eps):
    """Accumulate one noise trial of exact-vs-linearized chroma statistics.

    Returns (sum |exact|, sum |pred|, sum |exact - pred|, included pixel
    count, excluded pixel count). A pixel is excluded when the noise flips
    the channel ordering relative to the clean anchor, or when any noisy
    channel is not loggable (value + eps <= 0).
    """
    noisy = clean + eta
    anchor3 = anchor[..., None]
    noisy_m = np.take_along_axis(noisy, anchor3, axis=2)[..., 0]
    ordered = ~(noisy > noisy_m[..., None]).any(axis=2)
    loggable = (noisy + eps > 0.0).all(axis=2)
    incl = ordered & loggable

    with np.errstate(invalid="ignore", divide="ignore"):
        exact = (np.log(noisy + eps) - np.log(noisy_m + eps)[..., None]) - chroma_clean
    eta_m = np.take_along_axis(eta, anchor3, axis=2)[..., 0]
    clean_m = np.take_along_axis(clean, anchor3, axis=2)[..., 0]
    pred = eta / (clean + eps) - (eta_m / (clean_m + eps))[..., None]

    incl3 = incl[..., None]
    s_exact = float(np.where(incl3, np.abs(exact), 0.0).sum())
    s_pred = float(np.where(incl3, np.abs(pred), 0.0).sum())
    s_diff = float(np.where(incl3, np.abs(exact - pred), 0.0).sum())
    n_incl = int(incl.sum())
    return s_exact, s_pred, s_diff, n_incl, incl.size - n_incl
