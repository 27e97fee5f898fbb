"""
anisowave - Anisotropic Wavelet Transforms on Expansive-Matrix Groups

A numerical toolkit for continuous wavelet transforms over the group
R^d x_A R and the anisotropic Triebel-Lizorkin norms they characterize.

Features:
- Expansive matrices, their ellipsoids and the step quasi-norm rho_A
- Group law, Haar measure, translations and convolution of sampled fields
- Admissible windows and Calderon pairs built from smooth scale profiles
- FFT-based wavelet transforms with isometry and reproducing checks
- Hardy-Littlewood, Peetre and local maximal functions
- Littlewood-Paley, Peetre, sequence and coorbit norms with fitted constants
- Weights, envelopes, Wiener amalgams and molecule criteria
- Seeded verification campaigns with JSON/CSV reports

Example usage:
    >>> from anisowave import make_expansive, build_calderon_pair, tight_profile
    >>> from anisowave import GridSpec, TLParams, make_signal, tl_norm_lp
    >>>
    >>> M = make_expansive([[2.0]])
    >>> pair = build_calderon_pair(M, tight_profile(center=0.0))
    >>> grid = GridSpec(d=1, n=256, X=8.0, m=1, s_min=0.0, s_max=0.0)
    >>> f = make_signal("modulated-gaussian", grid, width=2.0, frequency=[1.5])
    >>> value = tl_norm_lp(f, pair, TLParams(p=2, q=2))
"""

import logging

__version__ = "0.1.0"
__author__ = "anisowave Contributors"
__license__ = "MIT"

# Add NullHandler to prevent "No handler found" warnings
# Users should configure logging in their application if they want to see logs
logging.getLogger(__name__).addHandler(logging.NullHandler())

# Errors
from .errors import (
    AnisowaveError,
    SingularMatrix,
    LogarithmUnavailable,
    ConvergenceFailure,
    ZeroVector,
    GridMismatch,
    ProfileDegenerate,
    CoverageGap,
    EmptyBallRange,
    NonConvergent,
    ConfigError,
    AliasWarning,
)

# Data models
from .models import (
    ExpansiveMatrix,
    AnisotropicEllipsoid,
    GroupElement,
    GridSpec,
    GroupField,
    ScaleProfile,
    SpectralWindow,
    CalderonPair,
    TestSignal,
    TLParams,
    QBox,
    MaximalConfig,
    Envelope,
    ControlWeightSpec,
    CheckResult,
    ExperimentConfig,
)

# Dilations and quasi-norms
from .anisotropy import (
    check_expansive,
    make_expansive,
    adjoint,
    matrix_power,
    build_ellipsoid,
    quasi_norm,
    continuous_scale,
    shell_index,
    structural_constants,
    quasi_norm_bounds,
    integrability_partial_sums,
    quasi_norm_table,
)

# The group G_A
from .group import (
    multiply,
    invert,
    modular,
    haar_integral,
    group_convolve,
    translate_left,
    translate_right,
    save_field,
    load_field,
    export_slice_csv,
)

# Windows
from .spectra import (
    build_admissible,
    build_calderon_pair,
    tight_profile,
    admissibility_defect,
    calderon_defect,
)

# Wavelet transform
from .transform import (
    make_signal,
    make_battery,
    wavelet_transform,
    reconstruct,
    isometry_ratio,
    reproducing_defect,
    covering_scales,
    decay_fit,
)

# Maximal functions
from .maximal import hl_maximal, peetre_maximal, local_maximal, maximal_field

# Norms
from .norms import (
    tl_norm_lp,
    tl_norm_peetre_disc,
    tl_norm_peetre_cont,
    seq_norm,
    seq_maximal_norm,
    peetre_space_norm,
    coorbit_norm,
    norm_equivalence,
    sequence_equivalence,
)

# Weights, envelopes and molecules
from .coorbit import (
    weight_v,
    weight_check,
    control_weight,
    envelope_integrability,
    wiener_amalgam_norm,
    molecule_param_check,
    wavelet_decay_bounds_check,
)

__all__ = [
    # Version info
    "__version__",
    "__author__",
    "__license__",

    # Errors
    "AnisowaveError",
    "SingularMatrix",
    "LogarithmUnavailable",
    "ConvergenceFailure",
    "ZeroVector",
    "GridMismatch",
    "ProfileDegenerate",
    "CoverageGap",
    "EmptyBallRange",
    "NonConvergent",
    "ConfigError",
    "AliasWarning",

    # Models
    "ExpansiveMatrix",
    "AnisotropicEllipsoid",
    "GroupElement",
    "GridSpec",
    "GroupField",
    "ScaleProfile",
    "SpectralWindow",
    "CalderonPair",
    "TestSignal",
    "TLParams",
    "QBox",
    "MaximalConfig",
    "Envelope",
    "ControlWeightSpec",
    "CheckResult",
    "ExperimentConfig",

    # Dilations and quasi-norms
    "check_expansive",
    "make_expansive",
    "adjoint",
    "matrix_power",
    "build_ellipsoid",
    "quasi_norm",
    "continuous_scale",
    "shell_index",
    "structural_constants",
    "quasi_norm_bounds",
    "integrability_partial_sums",
    "quasi_norm_table",

    # Group
    "multiply",
    "invert",
    "modular",
    "haar_integral",
    "group_convolve",
    "translate_left",
    "translate_right",
    "save_field",
    "load_field",
    "export_slice_csv",

    # Windows
    "build_admissible",
    "build_calderon_pair",
    "tight_profile",
    "admissibility_defect",
    "calderon_defect",

    # Transform
    "make_signal",
    "make_battery",
    "wavelet_transform",
    "reconstruct",
    "isometry_ratio",
    "reproducing_defect",
    "covering_scales",
    "decay_fit",

    # Maximal functions
    "hl_maximal",
    "peetre_maximal",
    "local_maximal",
    "maximal_field",

    # Norms
    "tl_norm_lp",
    "tl_norm_peetre_disc",
    "tl_norm_peetre_cont",
    "seq_norm",
    "seq_maximal_norm",
    "peetre_space_norm",
    "coorbit_norm",
    "norm_equivalence",
    "sequence_equivalence",

    # Weights and molecules
    "weight_v",
    "weight_check",
    "control_weight",
    "envelope_integrability",
    "wiener_amalgam_norm",
    "molecule_param_check",
    "wavelet_decay_bounds_check",
]
