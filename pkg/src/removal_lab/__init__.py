"""Counting, Fourier, and regularity tooling for colored linear patterns over F_p."""

from .energy import (
    Decomposition,
    Partition,
    decomp_initial,
    decomp_refine,
    increment_subspace,
    project,
    project_energy,
    trivial_decomposition,
)
from .errors import (
    CaseAAbort,
    DimensionPreconditionError,
    RemovalLabError,
    ResourceCapError,
    RetryCapError,
    SpaceExhaustedError,
    UnsupportedCharacteristicError,
    VerificationError,
)
from .fields import Subspace, annihilator, ext_field, null_space, rank, rref_rank_null
from .fourier import (
    FLOAT_TOL,
    batch_coset_norms,
    is_regular,
    lambda_fourier,
    regularity_norm,
    transform,
)
from .patterns import (
    Pattern,
    PatternStats,
    complexity1_check,
    first_instance,
    lam,
    pattern_stats,
    read_family,
    read_pattern,
    solutions,
    subpattern,
    subpattern_closure,
    write_family,
    write_pattern,
)
from .ramsey import Dichotomy, canonical_coloring, decide_dichotomy
from .regularize import (
    RecolorReport,
    RegularModel,
    green_regularize,
    regular_model,
    regularity_recolor,
    strong_decomp_regularize,
    strong_regularize,
    verify_model,
    weak_decomp_regularize,
)
from .removal import (
    CountingCertificate,
    InhomReduction,
    RemovalReport,
    certify_counting,
    count_inhomogeneous,
    induced_removal,
    inhomogeneous_reduce,
)
from .space import Coloring, Space, coset_restrict, read_coloring, write_coloring

__all__ = [
    "CaseAAbort",
    "Coloring",
    "CountingCertificate",
    "Decomposition",
    "Dichotomy",
    "DimensionPreconditionError",
    "FLOAT_TOL",
    "InhomReduction",
    "Partition",
    "Pattern",
    "PatternStats",
    "RecolorReport",
    "RegularModel",
    "RemovalLabError",
    "RemovalReport",
    "ResourceCapError",
    "RetryCapError",
    "Space",
    "SpaceExhaustedError",
    "Subspace",
    "UnsupportedCharacteristicError",
    "VerificationError",
    "annihilator",
    "batch_coset_norms",
    "canonical_coloring",
    "certify_counting",
    "complexity1_check",
    "coset_restrict",
    "count_inhomogeneous",
    "decide_dichotomy",
    "decomp_initial",
    "decomp_refine",
    "ext_field",
    "first_instance",
    "green_regularize",
    "increment_subspace",
    "induced_removal",
    "inhomogeneous_reduce",
    "is_regular",
    "lam",
    "lambda_fourier",
    "null_space",
    "pattern_stats",
    "project",
    "project_energy",
    "rank",
    "read_coloring",
    "read_family",
    "read_pattern",
    "regular_model",
    "regularity_norm",
    "regularity_recolor",
    "rref_rank_null",
    "solutions",
    "strong_decomp_regularize",
    "strong_regularize",
    "subpattern",
    "subpattern_closure",
    "transform",
    "trivial_decomposition",
    "verify_model",
    "weak_decomp_regularize",
    "write_coloring",
    "write_family",
    "write_pattern",
]
