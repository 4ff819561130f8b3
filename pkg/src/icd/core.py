"""Forward/inverse intensity-chromaticity transform and feasibility constraints.

An RGB image I with channels in [0, 1] is reparameterized per pixel into a
scalar intensity envelope and per-channel log-ratios against that envelope:

    I_base(x) = max_c I_c(x)                      (or min / mean, see Baseline)
    C_c(x)    = log(I_c(x) + eps) - log(I_base(x) + eps)

The map has the closed-form inverse

    I_c(x) = (I_base(x) + eps) * exp(C_c(x)) - eps

so decompose followed by reconstruct returns the input up to rounding. Under
the max baseline the chromaticity is non-positive, one component per pixel is
exactly zero (the envelope channel), and each reconstructed channel stays at
or below the envelope whenever the inputs satisfy intensity >= eps and
chroma <= 0. Those two clamps are exposed as constrain_intensity and
constrain_chromaticity and are applied by the enhancement pipeline before
inversion.

All arrays are float64; images are (H, W, 3), intensity maps (H, W).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .backend import get_kernels
from .errors import (
    EmptyInputError,
    InvalidInputError,
    ParamDomainError,
    ShapeMismatchError,
)
from .kernels import MODE_AVE, MODE_MAX, MODE_MIN

EPS_DEFAULT = 1e-4

GAMMA_RANGE = (0.5, 4.0)

ZERO_ANCHOR_TOL = 1e-12

# C >= log(eps / (1 + eps)) for any unit-interval image
def chroma_floor(eps=EPS_DEFAULT):
    return float(np.log(eps / (1.0 + eps)))


class Baseline(str, Enum):
    """Which per-pixel channel statistic anchors the log-ratios."""

    MAX = "max"
    MIN = "min"
    AVE = "ave"


_BASELINE_MODE = {Baseline.MAX: MODE_MAX, Baseline.MIN: MODE_MIN, Baseline.AVE: MODE_AVE}


@dataclass
class GateParams:
    """Parameters of the intensity-aware chromaticity gate.

    ``alpha`` is the confidence floor in (0, 1]; ``gamma`` shapes the ramp
    and must lie within GAMMA_RANGE.
    """

    alpha: float = 0.5
    gamma: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ParamDomainError(f"gate alpha must be in (0, 1], got {self.alpha}")
        lo, hi = GAMMA_RANGE
        if not lo <= self.gamma <= hi:
            raise ParamDomainError(f"gate gamma must be in [{lo}, {hi}], got {self.gamma}")


@dataclass
class DecoupledImage:
    """Paired intensity envelope (H, W) and chromaticity map (H, W, 3)."""

    intensity: np.ndarray
    chroma: np.ndarray

    def __post_init__(self):
        self.intensity = np.asarray(self.intensity, dtype=np.float64)
        self.chroma = np.asarray(self.chroma, dtype=np.float64)
        if self.intensity.ndim != 2:
            raise ShapeMismatchError(f"intensity must be 2-d, got shape {self.intensity.shape}")
        if self.chroma.ndim != 3 or self.chroma.shape[2] != 3:
            raise ShapeMismatchError(f"chroma must be (H, W, 3), got shape {self.chroma.shape}")
        if self.intensity.shape != self.chroma.shape[:2]:
            raise ShapeMismatchError(
                f"intensity {self.intensity.shape} does not match chroma {self.chroma.shape[:2]}"
            )

    @property
    def height(self):
        return self.intensity.shape[0]

    @property
    def width(self):
        return self.intensity.shape[1]


def _check_eps(eps):
    if not (np.isfinite(eps) and eps > 0.0):
        raise ParamDomainError(f"eps must be a positive finite real, got {eps}")
    return float(eps)


def as_image(img, eps=EPS_DEFAULT, name="image"):
    """Validate and convert an array to a float64 (H, W, 3) image.

    Values are required to be finite and loggable (v + eps > 0). The unit
    interval is the documented domain for image work but is deliberately not
    enforced here: the noise analysis evaluates the transform on unclipped
    noisy observations that can stray slightly outside [0, 1].
    """
    arr = np.ascontiguousarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeMismatchError(f"{name} must have shape (H, W, 3), got {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyInputError(f"{name} has a zero-sized dimension: {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidInputError(f"{name} contains non-finite values")
    if (arr + eps <= 0.0).any():
        raise InvalidInputError(f"{name} contains values at or below -eps; log is undefined")
    return arr


def decompose(img, eps=EPS_DEFAULT, baseline=Baseline.MAX):
    """Split an RGB image into intensity envelope and log-chromaticity.

    Parameters
    ----------
    img : array_like, shape (H, W, 3)
        Channel values, nominally in [0, 1].
    eps : float
        Stabilizer added inside both logarithms; must be > 0.
    baseline : Baseline
        MAX (default) anchors on the per-pixel maximum and yields chroma
        <= 0 with a zero anchor component. MIN yields chroma >= 0. AVE
        yields sign-mixed chroma; no feasibility constraint applies to it.
    """
    eps = _check_eps(eps)
    arr = as_image(img, eps)
    inten, chroma = get_kernels().decompose_kernel(arr, eps, _BASELINE_MODE[Baseline(baseline)])
    return DecoupledImage(intensity=inten, chroma=chroma)


def reconstruct(dec, eps=EPS_DEFAULT, baseline=Baseline.MAX, clip=True):
    """Invert the decomposition back to an RGB image.

    Applies I_c = (I_base + eps) * exp(C_c) - eps per channel, then clips to
    [0, 1] unless ``clip`` is False (the unclipped result is what the
    channel-bound guarantee is stated on). The inverse formula itself is the
    same for every baseline; ``baseline`` is accepted to mirror decompose.
    """
    eps = _check_eps(eps)
    Baseline(baseline)
    inten = np.ascontiguousarray(dec.intensity, dtype=np.float64)
    chroma = np.ascontiguousarray(dec.chroma, dtype=np.float64)
    if inten.shape != chroma.shape[:2]:
        raise ShapeMismatchError(
            f"intensity {inten.shape} does not match chroma {chroma.shape[:2]}"
        )
    out = get_kernels().reconstruct_kernel(inten, chroma, eps)
    if clip:
        np.clip(out, 0.0, 1.0, out=out)
    return out


def constrain_intensity(raw, eps=EPS_DEFAULT):
    """Lower-bound an intensity map at eps (keeps the inverse well posed)."""
    return np.maximum(np.asarray(raw, dtype=np.float64), _check_eps(eps))


def constrain_chromaticity(raw):
    """Upper-bound a chromaticity map at zero."""
    return np.minimum(np.asarray(raw, dtype=np.float64), 0.0)


def chroma_gate(intensity, chroma, gate):
    """Attenuate chromaticity where the intensity says it is unreliable.

    Multiplies C by G(I) = alpha + (1 - alpha) * sin(pi * I / 2) ** gamma.
    G is alpha at I = 0, 1 at I = 1, and monotone in between, so gating a
    feasible (non-positive, zero-anchored) map keeps it feasible.
    """
    if not isinstance(gate, GateParams):
        raise ParamDomainError(f"gate must be a GateParams instance, got {type(gate).__name__}")
    inten = np.ascontiguousarray(intensity, dtype=np.float64)
    chrom = np.ascontiguousarray(chroma, dtype=np.float64)
    if inten.ndim != 2 or chrom.shape != inten.shape + (3,):
        raise ShapeMismatchError(
            f"intensity {inten.shape} does not pair with chroma {chrom.shape}"
        )
    if inten.size and (inten.min() < 0.0 or inten.max() > 1.0):
        raise InvalidInputError("gate input intensity must lie in [0, 1]")
    return get_kernels().gate_kernel(inten, chrom, float(gate.alpha), float(gate.gamma))


@dataclass
class PropertyReport:
    """Outcome of the representation-property checks for one decomposition.

    The ratio check only covers pixels whose channels all reach 100 * eps
    (below that, eps visibly perturbs the log-ratio); the illumination check
    is present only when a scaled copy was supplied, covers pixels whose
    original channels all reach ``min_signal``, and uses the analytic
    tolerance 2 * eps / (scale * min_signal).
    """

    non_positive_ok: bool
    non_positive_violations: int
    zero_anchor_ok: bool
    zero_anchor_violations: int
    zero_anchor_max_dev: float
    ratio_ok: bool
    ratio_violations: int
    ratio_checked: int
    ratio_tol: float
    illum_ok: bool | None = None
    illum_violations: int = 0
    illum_checked: int = 0
    illum_tol: float | None = None
    argmax_stable: bool | None = None

    @property
    def all_ok(self):
        checks = [self.non_positive_ok, self.zero_anchor_ok, self.ratio_ok]
        if self.illum_ok is not None:
            checks += [self.illum_ok, bool(self.argmax_stable)]
        return all(checks)


def check_properties(img, dec, eps=EPS_DEFAULT, scaled=None, scale=None, min_signal=0.05):
    """Verify the representation properties of a max-baseline decomposition.

    Checks non-positivity (exact), per-pixel zero anchor (within
    ZERO_ANCHOR_TOL), and agreement of the chromaticity with the ideal
    log-ratio log(I_c / I_max) on well-exposed pixels. When ``scaled`` (an
    elementwise ``scale`` * img copy) is given, additionally checks that the
    chromaticity is stable under the brightness change and that the anchor
    channel never moves.
    """
    eps = _check_eps(eps)
    arr = as_image(img, eps)
    if dec.intensity.shape != arr.shape[:2]:
        raise ShapeMismatchError(
            f"decomposition {dec.intensity.shape} does not match image {arr.shape[:2]}"
        )

    chroma = dec.chroma
    npos = int((chroma > 0.0).sum())
    anchor_dev = np.abs(chroma.max(axis=2))
    nanchor = int((anchor_dev > ZERO_ANCHOR_TOL).sum())
    max_dev = float(anchor_dev.max()) if anchor_dev.size else 0.0

    # |C_c - log(I_c / I_max)| <= log1p(1/K) once every channel >= K * eps
    ratio_tol = float(np.log1p(0.01))
    well = (arr >= 100.0 * eps).all(axis=2)
    nratio = 0
    checked = int(well.sum())
    if checked:
        pix = arr[well]
        ideal = np.log(pix / pix.max(axis=1, keepdims=True))
        nratio = int((np.abs(chroma[well] - ideal) > ratio_tol).sum())

    report = PropertyReport(
        non_positive_ok=npos == 0,
        non_positive_violations=npos,
        zero_anchor_ok=nanchor == 0,
        zero_anchor_violations=nanchor,
        zero_anchor_max_dev=max_dev,
        ratio_ok=nratio == 0,
        ratio_violations=nratio,
        ratio_checked=checked,
        ratio_tol=ratio_tol,
    )

    if scaled is None:
        return report
    if scale is None or not 0.0 < scale <= 1.0:
        raise ParamDomainError(f"scale must lie in (0, 1] when a scaled copy is given, got {scale}")
    sarr = as_image(scaled, eps, name="scaled image")
    if sarr.shape != arr.shape:
        raise ShapeMismatchError(f"scaled image {sarr.shape} does not match image {arr.shape}")

    sdec = decompose(sarr, eps)
    strong = (arr >= min_signal).all(axis=2)
    tol = 2.0 * eps / (scale * min_signal)
    nillum = int((np.abs(sdec.chroma[strong] - chroma[strong]) > tol).sum())
    report.illum_ok = nillum == 0
    report.illum_violations = nillum
    report.illum_checked = int(strong.sum())
    report.illum_tol = tol
    report.argmax_stable = bool((arr.argmax(axis=2) == sarr.argmax(axis=2)).all())
    return report
