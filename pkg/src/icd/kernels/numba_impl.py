"""Numba-compiled kernel implementations.

Importing this module requires numba; :mod:`icd.backend` falls back to
``numpy_impl`` when the import fails. Elementwise kernels parallelize over
rows. The Monte-Carlo accumulator is deliberately serial so that the
floating-point summation order, and therefore the report, is deterministic.
fastmath stays off everywhere: the anchor channel must come out exactly 0.
"""

import math

import numpy as np
from numba import njit, prange

from . import MODE_AVE, MODE_MIN

NAME = "numba"


@njit(cache=True, parallel=True)
def decompose_kernel(img, eps, mode):
    h, w, _ = img.shape
    inten = np.empty((h, w))
    chroma = np.empty((h, w, 3))
    for y in prange(h):
        for x in range(w):
            r = img[y, x, 0]
            g = img[y, x, 1]
            b = img[y, x, 2]
            if mode == MODE_MIN:
                base = min(r, min(g, b))
            elif mode == MODE_AVE:
                base = (r + g + b) / 3.0
            else:
                base = max(r, max(g, b))
            inten[y, x] = base
            lb = math.log(base + eps)
            for c in range(3):
                chroma[y, x, c] = math.log(img[y, x, c] + eps) - lb
    return inten, chroma


@njit(cache=True, parallel=True)
def reconstruct_kernel(inten, chroma, eps):
    h, w = inten.shape
    out = np.empty((h, w, 3))
    for y in prange(h):
        for x in range(w):
            scale = inten[y, x] + eps
            for c in range(3):
                out[y, x, c] = scale * math.exp(chroma[y, x, c]) - eps
    return out


@njit(cache=True, parallel=True)
def gate_kernel(inten, chroma, alpha, gamma):
    h, w = inten.shape
    out = np.empty((h, w, 3))
    for y in prange(h):
        for x in range(w):
            g = alpha + (1.0 - alpha) * math.sin(0.5 * math.pi * inten[y, x]) ** gamma
            for c in range(3):
                out[y, x, c] = chroma[y, x, c] * g
    return out


@njit(cache=True)
def mc_trial_sums(clean, chroma_clean, anchor, eta, eps):
    h, w, _ = clean.shape
    s_exact = 0.0
    s_pred = 0.0
    s_diff = 0.0
    n_incl = 0
    for y in range(h):
        for x in range(w):
            m = anchor[y, x]
            noisy_m = clean[y, x, m] + eta[y, x, m]
            ok = True
            for c in range(3):
                noisy_c = clean[y, x, c] + eta[y, x, c]
                if noisy_c > noisy_m or noisy_c + eps <= 0.0:
                    ok = False
                    break
            if not ok:
                continue
            n_incl += 1
            lm = math.log(noisy_m + eps)
            pm = eta[y, x, m] / (clean[y, x, m] + eps)
            for c in range(3):
                exact = (math.log(clean[y, x, c] + eta[y, x, c] + eps) - lm) - chroma_clean[y, x, c]
                pred = eta[y, x, c] / (clean[y, x, c] + eps) - pm
                s_exact += abs(exact)
                s_pred += abs(pred)
                s_diff += abs(exact - pred)
    return s_exact, s_pred, s_diff, n_incl, h * w - n_incl
