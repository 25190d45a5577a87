"""Low-volume polynomial superlevel-set covers for finite point clouds.

Fit a polynomial p of chosen degree so that U(p) = {x in B : p(x) >= 1}
contains a given point cloud while the integral of p over the box B, a
certified upper bound on the volume of U(p) whenever p >= 0 on B, is as
small as the underlying linear program allows.
"""

from .basis import (
    MultiIndex,
    PolyBasis,
    Polynomial,
    enumerate_indices,
    eval_basis,
    eval_basis_many,
    eval_poly,
    eval_poly_many,
    gram_to_poly,
    half_degree,
    make_basis,
    poly_from_dict,
    poly_to_dict,
    poly_to_gram,
)
from .domain import BoxDomain
from .fitting import (
    ContainmentError,
    FitError,
    FitResult,
    GridSpec,
    PointCloud,
    SolverFailedError,
    SweepEntry,
    UnboundedFitError,
    assemble,
    build_grid,
    default_grid_spec,
    degree_sweep,
    fit,
)
from .lp import LpOptions, LpProblem, LpSolution, export_mps, solve
from .moments import (
    IllConditionedMomentsWarning,
    MomentFactorizationError,
    MomentMatrix,
    MomentVector,
    OrthonormalTransform,
    box_chebyshev_moment,
    box_monomial_moment,
    moment_matrix,
    moment_vector,
    orthonormalize,
)
from .verification import (
    ChebyshevCheck,
    ScanResult,
    TraceReport,
    VerificationReport,
    VolumeEstimate,
    chebyshev_check,
    count_components,
    mc_volume,
    nonnegativity_scan,
    run_report,
    trace_report,
)

__all__ = [
    "BoxDomain",
    "ChebyshevCheck",
    "ContainmentError",
    "FitError",
    "FitResult",
    "GridSpec",
    "IllConditionedMomentsWarning",
    "LpOptions",
    "LpProblem",
    "LpSolution",
    "MomentFactorizationError",
    "MomentMatrix",
    "MomentVector",
    "MultiIndex",
    "OrthonormalTransform",
    "PointCloud",
    "PolyBasis",
    "Polynomial",
    "ScanResult",
    "SolverFailedError",
    "SweepEntry",
    "TraceReport",
    "UnboundedFitError",
    "VerificationReport",
    "VolumeEstimate",
    "assemble",
    "box_chebyshev_moment",
    "box_monomial_moment",
    "build_grid",
    "chebyshev_check",
    "count_components",
    "default_grid_spec",
    "degree_sweep",
    "enumerate_indices",
    "eval_basis",
    "eval_basis_many",
    "eval_poly",
    "eval_poly_many",
    "export_mps",
    "fit",
    "gram_to_poly",
    "half_degree",
    "make_basis",
    "mc_volume",
    "moment_matrix",
    "moment_vector",
    "nonnegativity_scan",
    "orthonormalize",
    "poly_from_dict",
    "poly_to_dict",
    "poly_to_gram",
    "run_report",
    "solve",
    "trace_report",
]

__version__ = "0.1.0"
