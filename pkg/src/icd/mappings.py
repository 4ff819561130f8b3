"""Decoupled mapping variants and the enhancement pipeline.

Each variant is an update rule on the decomposed representation. The table
below lists the intensity and chromaticity halves; a variant that defines
only one half uses the residual rule for the other.

    residual             I + dI                      C + dC
    end_to_end           dI                          dC
    intensity_division   I / L                       C + dC
    intensity_fractional u*I / (u*I + (1 - I) + eps) C + dC
    intensity_quadratic  I + a * I * (1 - I)         C + dC
    chroma_gamma         I + dI                      gamma_c * C
    gated_chroma_residual I + dI                     C + w * dC
    chroma_affine        I + dI                      alpha_c * C + beta_c

Every mapped intensity passes through constrain_intensity and every mapped
chromaticity through constrain_chromaticity, so the outputs always feed the
inverse transform a feasible pair. Parameters may be scalars, 3-vectors
(chroma side), or per-pixel fields matching the image.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from .core import (
    EPS_DEFAULT,
    Baseline,
    DecoupledImage,
    chroma_gate,
    constrain_chromaticity,
    constrain_intensity,
    decompose,
    reconstruct,
)
from .errors import ConfigurationError, ParamDomainError, ShapeMismatchError
from .metrics import LossWeights, total_loss


class Variant(str, Enum):
    RESIDUAL = "residual"
    END_TO_END = "end_to_end"
    INTENSITY_DIVISION = "intensity_division"
    INTENSITY_FRACTIONAL = "intensity_fractional"
    INTENSITY_QUADRATIC = "intensity_quadratic"
    CHROMA_GAMMA = "chroma_gamma"
    GATED_CHROMA_RESIDUAL = "gated_chroma_residual"
    CHROMA_AFFINE = "chroma_affine"


# variant-defining parameters; residual increments default to zero instead
_REQUIRED = {
    Variant.RESIDUAL: (),
    Variant.END_TO_END: ("delta_i", "delta_c"),
    Variant.INTENSITY_DIVISION: ("L",),
    Variant.INTENSITY_FRACTIONAL: ("u",),
    Variant.INTENSITY_QUADRATIC: ("a",),
    Variant.CHROMA_GAMMA: ("gamma_c",),
    Variant.GATED_CHROMA_RESIDUAL: ("w",),
    Variant.CHROMA_AFFINE: ("alpha_c", "beta_c"),
}

FIT_VARIANTS = (
    Variant.INTENSITY_DIVISION,
    Variant.INTENSITY_FRACTIONAL,
    Variant.INTENSITY_QUADRATIC,
)
FIT_PARAM = {
    Variant.INTENSITY_DIVISION: "L",
    Variant.INTENSITY_FRACTIONAL: "u",
    Variant.INTENSITY_QUADRATIC: "a",
}


@dataclass
class MappingSpec:
    """A mapping variant plus its parameters.

    ``delta_i`` / ``delta_c`` default to 0 (no update) for the residual-form
    halves; the parameters that define a variant (L, u, a, gamma_c, w,
    alpha_c, beta_c, and both deltas for end_to_end) must be supplied.
    """

    variant: Variant
    delta_i: Any = None
    delta_c: Any = None
    L: Any = None
    u: Any = None
    a: Any = None
    gamma_c: Any = None
    w: Any = None
    alpha_c: Any = None
    beta_c: Any = None

    def __post_init__(self):
        self.variant = Variant(self.variant)
        missing = [p for p in _REQUIRED[self.variant] if getattr(self, p) is None]
        if missing:
            raise ConfigurationError(
                f"variant {self.variant.value!r} requires parameter(s): {', '.join(missing)}"
            )


def _scalar_field(value, shape, name, positive=False):
    """Coerce a scalar or (H, W) field to float64, checking the domain."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim not in (0, 2):
        raise ShapeMismatchError(f"{name} must be a scalar or (H, W) field, got shape {arr.shape}")
    if arr.ndim == 2 and arr.shape != shape:
        raise ShapeMismatchError(f"{name} field {arr.shape} does not match image {shape}")
    if positive and not (arr > 0.0).all():
        raise ParamDomainError(f"{name} must be strictly positive")
    return arr


def _vector_field(value, shape, name, positive=False, unit=False):
    """Coerce a scalar, 3-vector, or (H, W, 3) field to float64."""
    arr = np.asarray(value, dtype=np.float64)
    ok = arr.ndim == 0 or arr.shape == (3,) or arr.shape == shape + (3,)
    if not ok:
        raise ShapeMismatchError(
            f"{name} must be a scalar, a 3-vector, or an (H, W, 3) field, got shape {arr.shape}"
        )
    if positive and not (arr > 0.0).all():
        raise ParamDomainError(f"{name} must be strictly positive")
    if unit and ((arr < 0.0) | (arr > 1.0)).any():
        raise ParamDomainError(f"{name} components must lie in [0, 1]")
    return arr


def apply_intensity_mapping(spec, iin, eps=EPS_DEFAULT):
    """Map an intensity envelope through the variant's intensity rule.

    The result is lower-bounded at eps (constrain_intensity), so it is always
    a valid input for the inverse transform.
    """
    iin = np.asarray(iin, dtype=np.float64)
    if iin.ndim != 2:
        raise ShapeMismatchError(f"intensity must be 2-d, got shape {iin.shape}")
    shape = iin.shape
    v = spec.variant
    if v == Variant.END_TO_END:
        out = np.broadcast_to(_scalar_field(spec.delta_i, shape, "delta_i"), shape)
    elif v == Variant.INTENSITY_DIVISION:
        out = iin / _scalar_field(spec.L, shape, "L", positive=True)
    elif v == Variant.INTENSITY_FRACTIONAL:
        u = _scalar_field(spec.u, shape, "u", positive=True)
        out = u * iin / (u * iin + (1.0 - iin) + eps)
    elif v == Variant.INTENSITY_QUADRATIC:
        out = iin + _scalar_field(spec.a, shape, "a") * iin * (1.0 - iin)
    else:
        di = 0.0 if spec.delta_i is None else spec.delta_i
        out = iin + _scalar_field(di, shape, "delta_i")
    return constrain_intensity(out, eps)


def apply_chroma_mapping(spec, cin):
    """Map a chromaticity map through the variant's chromaticity rule.

    The result is upper-bounded at zero (constrain_chromaticity).
    """
    cin = np.asarray(cin, dtype=np.float64)
    if cin.ndim != 3 or cin.shape[2] != 3:
        raise ShapeMismatchError(f"chroma must be (H, W, 3), got shape {cin.shape}")
    shape = cin.shape[:2]
    v = spec.variant
    if v == Variant.END_TO_END:
        out = np.broadcast_to(_vector_field(spec.delta_c, shape, "delta_c"), cin.shape)
    elif v == Variant.CHROMA_GAMMA:
        out = _vector_field(spec.gamma_c, shape, "gamma_c", positive=True) * cin
    elif v == Variant.GATED_CHROMA_RESIDUAL:
        w = _vector_field(spec.w, shape, "w", unit=True)
        dc = 0.0 if spec.delta_c is None else spec.delta_c
        out = cin + w * _vector_field(dc, shape, "delta_c")
    elif v == Variant.CHROMA_AFFINE:
        out = _vector_field(spec.alpha_c, shape, "alpha_c") * cin + _vector_field(
            spec.beta_c, shape, "beta_c"
        )
    else:
        dc = 0.0 if spec.delta_c is None else spec.delta_c
        out = cin + _vector_field(dc, shape, "delta_c")
    return constrain_chromaticity(out)


def enhance(img, spec, gate=None, eps=EPS_DEFAULT):
    """Full enhancement pipeline on one image.

    decompose -> optional chromaticity gate -> intensity and chromaticity
    mappings (each with its retained constraint) -> inverse transform ->
    clip to [0, 1]. Uses the max baseline throughout; byte-identical inputs
    give byte-identical outputs.
    """
    dec = decompose(img, eps, Baseline.MAX)
    chroma = dec.chroma if gate is None else chroma_gate(dec.intensity, dec.chroma, gate)
    iout = apply_intensity_mapping(spec, dec.intensity, eps)
    cout = apply_chroma_mapping(spec, chroma)
    return reconstruct(DecoupledImage(intensity=iout, chroma=cout), eps, Baseline.MAX, clip=True)


def fit_scalar_param(dark, ref, variant, grid, eps=EPS_DEFAULT, weights=None, use_smooth_l1=False):
    """Grid-search one scalar parameter of an intensity variant.

    Evaluates enhance(dark, variant(p), dC = 0) against ``ref`` for every p
    in ``grid`` under the total loss and returns (best_param, best_loss).
    The grid is scanned in ascending order and ties keep the smaller value.
    """
    variant = Variant(variant)
    if variant not in FIT_VARIANTS:
        raise ConfigurationError(
            f"fit supports {', '.join(v.value for v in FIT_VARIANTS)}; got {variant.value!r}"
        )
    grid = np.asarray(grid, dtype=np.float64).ravel()
    if grid.size == 0:
        raise ConfigurationError("parameter grid is empty")
    w = weights or LossWeights()

    best_p = None
    best_loss = np.inf
    for p in np.sort(grid):
        spec = MappingSpec(variant=variant, **{FIT_PARAM[variant]: float(p)})
        out = enhance(dark, spec, gate=None, eps=eps)
        loss = total_loss(out, ref, eps, w, use_smooth_l1)[3]
        if loss < best_loss:
            best_p, best_loss = float(p), float(loss)
    return best_p, best_loss
