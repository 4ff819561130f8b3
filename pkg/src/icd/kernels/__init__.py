"""Computational kernels.

Two interchangeable implementations live here: ``numpy_impl`` (vectorized,
always available) and ``numba_impl`` (JIT-compiled loops, used when numba
imports). Both expose the same four functions with identical semantics:

    decompose_kernel(img, eps, mode)   -> (intensity, chroma)
    reconstruct_kernel(inten, chroma, eps) -> rgb (unclipped)
    gate_kernel(inten, chroma, alpha, gamma) -> chroma
    mc_trial_sums(clean, chroma_clean, anchor, eta, eps) -> trial statistics

Selection happens in :mod:`icd.backend`; library code never imports an
implementation module directly.
"""

MODE_MAX = 0
MODE_MIN = 1
MODE_AVE = 2
