"""Edgeworth-type expansions for normalized i.i.d. sums, with numerical oracles."""

from .combinatorics import WeightedPartition, enumerate_weighted_partitions, faa_di_bruno
from .cumulants import (
    CumulantVector,
    MomentVector,
    cumulants_from_moments,
    hermite,
    moments_from_cumulants,
)
from .edgeworth import (
    EdgeworthApproximant,
    ExpansionOrder,
    ak_polynomial,
    pk_polynomial,
    phi_m,
    qk_density_term,
    tail_bound_check,
    tm_projection_check,
    u_m_fourier,
)
from .errors import (
    ArityError,
    BoundsError,
    BranchError,
    ConfigurationError,
    FracEdgeError,
    NumericError,
    PreconditionError,
    ResolutionError,
    TruncationError,
)
from .poly import Poly

__all__ = [
    "WeightedPartition",
    "enumerate_weighted_partitions",
    "faa_di_bruno",
    "CumulantVector",
    "MomentVector",
    "cumulants_from_moments",
    "hermite",
    "moments_from_cumulants",
    "EdgeworthApproximant",
    "ExpansionOrder",
    "ak_polynomial",
    "pk_polynomial",
    "phi_m",
    "qk_density_term",
    "tail_bound_check",
    "tm_projection_check",
    "u_m_fourier",
    "ArityError",
    "BoundsError",
    "BranchError",
    "ConfigurationError",
    "FracEdgeError",
    "NumericError",
    "PreconditionError",
    "ResolutionError",
    "TruncationError",
    "Poly",
]

__version__ = "0.1.0"
