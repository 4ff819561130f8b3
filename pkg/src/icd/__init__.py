"""Log-domain intensity-chromaticity decoupling for images.

Reversible per-pixel split of an RGB image into an intensity envelope and
non-positive log-chromaticity, with feasibility-constrained reconstruction,
an intensity-aware chromaticity gate, a family of enhancement mapping
variants, quality metrics with the matching loss suite, and Monte-Carlo
validation of the first-order noise model. See the README for the CLI.
"""

from .backend import available_backends, get_kernels, resolve_backend
from .core import (
    EPS_DEFAULT,
    GAMMA_RANGE,
    Baseline,
    DecoupledImage,
    GateParams,
    PropertyReport,
    check_properties,
    chroma_floor,
    chroma_gate,
    constrain_chromaticity,
    constrain_intensity,
    decompose,
    reconstruct,
)
from .errors import (
    ConfigurationError,
    EmptyInputError,
    IcdError,
    InvalidInputError,
    ParamDomainError,
    PfmFormatError,
    ShapeMismatchError,
)
from .mappings import (
    FIT_VARIANTS,
    MappingSpec,
    Variant,
    apply_chroma_mapping,
    apply_intensity_mapping,
    enhance,
    fit_scalar_param,
)
from .metrics import (
    LossWeights,
    MetricsReport,
    mean_l1,
    metrics_report,
    mse,
    psnr,
    rel_mae,
    smooth_l1,
    ssim,
    total_loss,
)
from .noise import (
    AgreementReport,
    NoiseModel,
    ScalingScene,
    linearized_chroma_perturbation,
    monte_carlo_chroma_agreement,
    rgb_jacobian_amplification,
    synthesize_scene,
)

__version__ = "0.1.0"

__all__ = [
    "EPS_DEFAULT",
    "GAMMA_RANGE",
    "AgreementReport",
    "Baseline",
    "ConfigurationError",
    "DecoupledImage",
    "EmptyInputError",
    "FIT_VARIANTS",
    "GateParams",
    "IcdError",
    "InvalidInputError",
    "LossWeights",
    "MappingSpec",
    "MetricsReport",
    "NoiseModel",
    "ParamDomainError",
    "PfmFormatError",
    "PropertyReport",
    "ScalingScene",
    "ShapeMismatchError",
    "Variant",
    "apply_chroma_mapping",
    "apply_intensity_mapping",
    "available_backends",
    "check_properties",
    "chroma_floor",
    "chroma_gate",
    "constrain_chromaticity",
    "constrain_intensity",
    "decompose",
    "enhance",
    "fit_scalar_param",
    "get_kernels",
    "linearized_chroma_perturbation",
    "mean_l1",
    "metrics_report",
    "monte_carlo_chroma_agreement",
    "mse",
    "psnr",
    "reconstruct",
    "rel_mae",
    "resolve_backend",
    "rgb_jacobian_amplification",
    "smooth_l1",
    "ssim",
    "synthesize_scene",
    "total_loss",
]
