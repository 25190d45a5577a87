"""Fit a low-volume polynomial superlevel set around a finite point cloud.

The fitted set is U(p) = {x in B : p(x) >= 1} for a polynomial p of chosen
degree.  Minimizing the integral of p over the box B, subject to p >= 1 at
every cloud point and p >= 0 on a dense grid of B, is a linear program in the
coefficients of p; its optimal value upper-bounds nothing and lower-bounds
nothing by itself, but with p >= 0 on all of B it dominates the volume of
U(p), which is what makes the objective a useful surrogate.

Nonnegativity is only enforced at grid points, so a fitted polynomial can dip
slightly negative between them; the verification module measures this.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .basis import BasisKind, PolyBasis, Polynomial, eval_basis_many, make_basis
from .domain import BoxDomain
from .lp import LpOptions, LpProblem, LpSolution, solve
from .moments import MomentVector, moment_vector

MAX_GRID_POINTS = 10_000_000
CONTAINMENT_TOL = 1e-6


class FitError(RuntimeError):
    """Base class for fitting failures."""


class UnboundedFitError(FitError):
    """The objective can decrease without bound on the assembled problem."""


class SolverFailedError(FitError):
    """The solver could not certify an outcome."""


class ContainmentError(FitError):
    """The returned polynomial fails p >= 1 at some cloud point."""


@dataclass(frozen=True)
class PointCloud:
    """Finite set of points to cover, one row per point."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("point cloud must be a nonempty (N, n) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def count(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class GridSpec:
    """Where to enforce p >= 0: a tensor grid or a quasi-random sample.

    Exactly one of points_per_axis and sample_count must be set.  The seed
    only affects the quasi-random mode.
    """

    points_per_axis: int | None = None
    sample_count: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if (self.points_per_axis is None) == (self.sample_count is None):
            raise ValueError("set exactly one of points_per_axis and sample_count")
        if self.points_per_axis is not None and self.points_per_axis < 2:
            raise ValueError("points_per_axis must be at least 2")
        if self.sample_count is not None and self.sample_count < 1:
            raise ValueError("sample_count must be positive")


def default_grid_spec(dimension: int) -> GridSpec:
    """Grid density defaults: 2001 points in 1-D, 201 per axis in 2-D,
    and a 100000-point quasi-random sample in higher dimension."""
    if dimension == 1:
        return GridSpec(points_per_axis=2001)
    if dimension == 2:
        return GridSpec(points_per_axis=201)
    return GridSpec(sample_count=100_000)


def build_grid(box: BoxDomain, spec: GridSpec) -> np.ndarray:
    """Materialize the grid as an (M, n) array of points inside the box.

    Tensor grids include the box boundary and are laid out row-major in the
    axis order.  Quasi-random grids use a scrambled Sobol sequence, so a
    fixed seed gives identical points on every run.
    """
    n = box.dimension
    if spec.points_per_axis is not None:
        total = spec.points_per_axis**n
        if total > MAX_GRID_POINTS:
            raise ValueError(
                f"tensor grid would hold {total} points (limit {MAX_GRID_POINTS}); "
                "use a quasi-random sample_count grid instead"
            )
        axes = [
            np.linspace(box.lower[d], box.upper[d], spec.points_per_axis)
            for d in range(n)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    sampler = qmc.Sobol(d=n, scramble=True, seed=spec.seed)
    with warnings.catch_warnings():
        # Sobol balance holds only at powers of two; any count is fine here.
        warnings.simplefilter("ignore", UserWarning)
        unit = sampler.random(spec.sample_count)
    return qmc.scale(unit, box.lower_array, box.upper_array)


def assemble(
    cloud: PointCloud,
    grid_points: np.ndarray,
    basis: PolyBasis,
    moments: MomentVector,
) -> LpProblem:
    """Build the coefficient program: minimize the integral of p over the box
    subject to p >= 1 on the cloud and p >= 0 on the grid."""
    if moments.basis is not basis and moments.basis != basis:
        raise ValueError("moment vector was computed for a different basis")
    rows_cloud = eval_basis_many(basis, cloud.points)
    rows_grid = eval_basis_many(basis, np.asarray(grid_points, dtype=float))
    A = np.vstack([rows_cloud, rows_grid])
    b = np.concatenate([np.ones(cloud.count), np.zeros(rows_grid.shape[0])])
    kinds = ("K",) * cloud.count + ("grid",) * rows_grid.shape[0]
    return LpProblem(c=moments.values.copy(), A=A, b=b, row_kinds=kinds)


@dataclass(frozen=True)
class FitDiagnostics:
    containment_margin: float
    min_grid_value: float
    trace_pm: float | None


@dataclass(frozen=True)
class FitResult:
    polynomial: Polynomial
    objective: float
    degree: int
    grid_size: int
    status: str
    diagnostics: FitDiagnostics
    box: BoxDomain
    lp_iterations: int
    lp_rows: int
    lp_cols: int

    @property
    def w(self) -> float:
        """Optimal integral of p over the box."""
        return self.objective


def _bound_rows(num_cols: int, bound: float) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(num_cols)
    A = np.vstack([eye, -eye])
    b = np.full(2 * num_cols, -bound)
    return A, b


def _trace_pm(polynomial: Polynomial, box: BoxDomain) -> float | None:
    if polynomial.basis.kind != "monomial":
        return None
    from .basis import half_degree, poly_to_gram
    from .moments import moment_matrix

    gram = poly_to_gram(polynomial)
    half = make_basis(polynomial.dimension, half_degree(polynomial.degree), "monomial")
    mm = moment_matrix(half, box, warn_threshold=math.inf)
    return float(np.sum(gram * mm.entries))


def _fit_on_grid(
    cloud: PointCloud,
    box: BoxDomain,
    degree: int,
    kind: BasisKind,
    grid_points: np.ndarray,
    coeff_bound: float | None,
    options: LpOptions | None,
) -> FitResult:
    basis = make_basis(cloud.dimension, degree, kind, box if kind == "chebyshev" else None)
    moments = moment_vector(basis, box)
    problem = assemble(cloud, grid_points, basis, moments)

    if coeff_bound is not None:
        if not (math.isfinite(coeff_bound) and coeff_bound > 0):
            raise ValueError("coeff_bound must be positive and finite")
        A_extra, b_extra = _bound_rows(problem.num_cols, coeff_bound)
        problem = LpProblem(
            c=problem.c,
            A=np.vstack([problem.A, A_extra]),
            b=np.concatenate([problem.b, b_extra]),
            row_kinds=problem.row_kinds + ("bound",) * b_extra.size,
        )

    solution: LpSolution = solve(problem, options)
    if solution.status == "unbounded":
        raise UnboundedFitError(
            f"degree-{degree} fit is unbounded: the grid leaves room to push the "
            "polynomial down; refine the grid or set a coefficient bound"
        )
    if solution.status != "optimal":
        raise SolverFailedError(f"degree-{degree} fit failed: {solution.message}")

    polynomial = Polynomial(basis, solution.v)
    values_cloud = eval_basis_many(basis, cloud.points) @ polynomial.coeffs
    margin = float(np.min(values_cloud)) - 1.0
    if margin < -CONTAINMENT_TOL:
        raise ContainmentError(
            f"fitted polynomial misses a cloud point by {-margin:.3e}"
        )
    grid_count = np.asarray(grid_points).shape[0]
    values_grid = problem.A[cloud.count : cloud.count + grid_count] @ polynomial.coeffs
    min_grid = float(np.min(values_grid)) if grid_count else math.inf

    diagnostics = FitDiagnostics(
        containment_margin=margin,
        min_grid_value=min_grid,
        trace_pm=_trace_pm(polynomial, box),
    )
    return FitResult(
        polynomial=polynomial,
        objective=float(solution.objective),
        degree=degree,
        grid_size=grid_count,
        status=solution.status,
        diagnostics=diagnostics,
        box=box,
        lp_iterations=solution.iterations,
        lp_rows=problem.num_rows,
        lp_cols=problem.num_cols,
    )


def fit(
    cloud: PointCloud,
    box: BoxDomain,
    degree: int,
    *,
    kind: BasisKind = "monomial",
    grid: GridSpec | None = None,
    inflate: float = 1.0,
    coeff_bound: float | None = None,
    options: LpOptions | None = None,
) -> FitResult:
    """Fit one polynomial of the given degree around the cloud.

    Args:
        cloud: points to cover; must lie inside the (inflated) box.
        box: bounding box B of the superlevel set.
        degree: total degree of the polynomial, at least 0.
        kind: coefficient basis; "chebyshev" is better conditioned at
            high degree and on wide boxes.
        grid: where to enforce p >= 0; dimension-based default when None.
        inflate: scale factor applied to the box about its center before
            fitting, to push boundary effects away from the cloud.
        coeff_bound: optional bound on the sup-norm of the coefficient
            vector, as extra constraint rows.
        options: solver tolerances and limits.

    Raises:
        ValueError: cloud outside the box, or invalid parameters.
        UnboundedFitError, SolverFailedError, ContainmentError.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if cloud.dimension != box.dimension:
        raise ValueError("cloud and box dimensions differ")
    box_eff = box.inflate(inflate)
    if not box_eff.contains_all(cloud.points):
        raise ValueError("point cloud is not contained in the box")
    spec = grid if grid is not None else default_grid_spec(cloud.dimension)
    grid_points = build_grid(box_eff, spec)
    return _fit_on_grid(cloud, box_eff, degree, kind, grid_points, coeff_bound, options)


@dataclass(frozen=True)
class SweepEntry:
    degree: int
    result: FitResult | None
    error: str | None
    seconds: float = 0.0


def degree_sweep(
    cloud: PointCloud,
    box: BoxDomain,
    degrees: list[int] | tuple[int, ...],
    *,
    kind: BasisKind = "monomial",
    grid: GridSpec | None = None,
    inflate: float = 1.0,
    coeff_bound: float | None = None,
    options: LpOptions | None = None,
) -> list[SweepEntry]:
    """Fit every degree on one shared grid, in ascending order.

    Because the degree-d basis is a prefix of the degree-d' basis for d < d'
    and the grid is shared, the optimal objective cannot increase with the
    degree; a violation beyond roundoff means the solver misbehaved and is
    raised rather than returned.
    """
    degrees = list(degrees)
    if not degrees:
        raise ValueError("degrees must be nonempty")
    if any(d < 0 for d in degrees):
        raise ValueError("degrees must be nonnegative")
    if any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise ValueError("degrees must be strictly ascending")
    if cloud.dimension != box.dimension:
        raise ValueError("cloud and box dimensions differ")

    box_eff = box.inflate(inflate)
    if not box_eff.contains_all(cloud.points):
        raise ValueError("point cloud is not contained in the box")
    spec = grid if grid is not None else default_grid_spec(cloud.dimension)
    grid_points = build_grid(box_eff, spec)

    entries: list[SweepEntry] = []
    last_w: float | None = None
    for degree in degrees:
        start = time.perf_counter()
        try:
            result = _fit_on_grid(
                cloud, box_eff, degree, kind, grid_points, coeff_bound, options
            )
        except (FitError, ValueError) as exc:
            entries.append(
                SweepEntry(
                    degree=degree, result=None, error=str(exc),
                    seconds=time.perf_counter() - start,
                )
            )
            continue
        if last_w is not None and result.objective > last_w + 1e-6 * (1.0 + abs(last_w)):
            raise SolverFailedError(
                f"objective rose from {last_w} to {result.objective} at degree "
                f"{degree}; expected a nonincreasing sweep on a shared grid"
            )
        last_w = result.objective
        entries.append(
            SweepEntry(
                degree=degree, result=result, error=None,
                seconds=time.perf_counter() - start,
            )
        )
    return entries
