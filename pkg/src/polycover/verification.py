"""Independent checks on a fitted superlevel set U(p) = {x in B : p(x) >= 1}.

Volume is estimated by Monte Carlo with a counter-based generator, so runs
with equal seeds agree bit for bit regardless of chunking.  When p >= 0 holds
on all of B, Markov's bound gives  vol U(p) <= integral of p over B;  the
integral is the fit objective w, so w should exceed the estimated volume up
to sampling noise.  The nonnegativity scan probes how far p dips below zero
between the grid points where it was enforced, the component count describes
the topology of U(p) on a pixel grid, and the trace report recomputes w
through a Gram-matrix route as a cross-check on the moment pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from .basis import Polynomial, eval_poly_many, half_degree, make_basis, poly_to_gram
from .domain import BoxDomain
from .fitting import GridSpec, build_grid, default_grid_spec
from .moments import MomentVector, moment_matrix, moment_vector

TRACE_AGREEMENT_TOL = 1e-9
MIN_MC_SAMPLES = 1000


@dataclass(frozen=True)
class VolumeEstimate:
    estimate: float
    standard_error: float
    samples: int
    seed: int
    rng_name: str = "philox"


def mc_volume(
    p: Polynomial,
    box: BoxDomain,
    samples: int = 1_000_000,
    seed: int = 0,
    chunk_size: int = 262_144,
) -> VolumeEstimate:
    """Monte Carlo estimate of vol {x in B : p(x) >= 1}.

    The standard error is the binomial one, vol(B) * sqrt(q(1-q)/N); it goes
    to zero only like 1/sqrt(N), so treat small gaps as noise.
    """
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} samples")
    if p.dimension != box.dimension:
        raise ValueError("polynomial and box dimensions differ")
    rng = np.random.Generator(np.random.Philox(seed))
    lower = box.lower_array
    widths = box.widths
    hits = 0
    remaining = samples
    while remaining > 0:
        m = min(chunk_size, remaining)
        points = lower + rng.random((m, box.dimension)) * widths
        hits += int(np.count_nonzero(eval_poly_many(p, points) >= 1.0))
        remaining -= m
    fraction = hits / samples
    volume = box.volume
    stderr = volume * math.sqrt(fraction * (1.0 - fraction) / samples)
    return VolumeEstimate(
        estimate=volume * fraction, standard_error=stderr, samples=samples, seed=seed
    )


@dataclass(frozen=True)
class ChebyshevCheck:
    """Comparison of the objective w against the estimated set volume."""

    w: float
    gap: float
    passed: bool


def chebyshev_check(
    p: Polynomial, moments: MomentVector, volume: VolumeEstimate
) -> ChebyshevCheck:
    """Verify  w = integral of p  >=  vol U(p)  up to three standard errors.

    The inequality assumes p >= 0 on the box; a fit that dips negative
    between grid points can undershoot, which is exactly what this flags.
    """
    if moments.basis != p.basis:
        raise ValueError("moment vector was computed for a different basis")
    w = math.fsum(float(c) * float(y) for c, y in zip(p.coeffs, moments.values))
    gap = w - volume.estimate
    passed = gap >= -3.0 * volume.standard_error
    return ChebyshevCheck(w=w, gap=gap, passed=passed)


@dataclass(frozen=True)
class ScanResult:
    min_value: float
    argmin: tuple[float, ...]
    points: int


def nonnegativity_scan(
    p: Polynomial, box: BoxDomain, spec: GridSpec | None = None
) -> ScanResult:
    """Minimum of p over a scan grid finer than the fitting default.

    The default scan is four times denser per axis than the fitting grid
    (or a four times larger quasi-random sample in high dimension, drawn
    with a different seed so it probes new locations).
    """
    if spec is None:
        base = default_grid_spec(box.dimension)
        if base.points_per_axis is not None:
            spec = GridSpec(points_per_axis=4 * (base.points_per_axis - 1) + 1)
        else:
            spec = GridSpec(sample_count=4 * base.sample_count, seed=1)
    points = build_grid(box, spec)
    values = eval_poly_many(p, points)
    pos = int(np.argmin(values))
    return ScanResult(
        min_value=float(values[pos]),
        argmin=tuple(float(x) for x in points[pos]),
        points=points.shape[0],
    )


def _cell_center_axes(box: BoxDomain, resolution: int) -> list[np.ndarray]:
    axes = []
    for lo, up in zip(box.lower, box.upper):
        h = (up - lo) / resolution
        axes.append(np.linspace(lo + h / 2.0, up - h / 2.0, resolution))
    return axes


def count_components(
    p: Polynomial, box: BoxDomain, resolution: int | None = None
) -> int:
    """Number of face-connected components of {p >= 1} on a cell-center grid.

    Supported up to dimension 3.  Components thinner than a cell can escape
    the grid; raise the resolution when the set has fine structure.
    """
    n = box.dimension
    if p.dimension != n:
        raise ValueError("polynomial and box dimensions differ")
    if n > 3:
        raise ValueError("component counting supports dimensions 1 to 3 only")
    if resolution is None:
        resolution = 512 if n <= 2 else 64
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    axes = _cell_center_axes(box, resolution)
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.reshape(-1) for m in mesh], axis=1)
    mask = (eval_poly_many(p, points) >= 1.0).reshape((resolution,) * n)
    _, count = scipy.ndimage.label(mask)
    return int(count)


@dataclass(frozen=True)
class TraceReport:
    """Two routes to the integral of p: coefficient dot product and Gram trace."""

    trace_pm: float
    weighted_coeff_sum: float
    orthonormal_trace: float | None
    relative_gap: float


def trace_report(p: Polynomial, box: BoxDomain) -> TraceReport:
    """Recompute the objective as trace(P M) and compare with sum of p_a y_a.

    P is the symmetric Gram representative of p over the half-degree basis
    and M the matching moment matrix, so trace(P M) equals the integral of p
    exactly; the two routes must agree to 1e-9 relative or an ArithmeticError
    is raised.  Sums accumulate in extended precision because high-degree
    coefficients cancel heavily.  Monomial bases only.
    """
    if p.basis.kind != "monomial":
        raise ValueError("trace_report requires a monomial basis")
    if p.dimension != box.dimension:
        raise ValueError("polynomial and box dimensions differ")

    moments = moment_vector(p.basis, box)
    dot = float(
        np.sum(p.coeffs.astype(np.longdouble) * moments.values.astype(np.longdouble))
    )

    gram = poly_to_gram(p)
    half = make_basis(p.dimension, half_degree(p.degree), "monomial")
    mm = moment_matrix(half, box, warn_threshold=math.inf)
    trace = float(
        np.sum(gram.astype(np.longdouble) * mm.entries.astype(np.longdouble))
    )

    gap = abs(trace - dot) / (1.0 + abs(dot))
    if gap > TRACE_AGREEMENT_TOL:
        raise ArithmeticError(
            f"trace route {trace!r} and coefficient route {dot!r} disagree "
            f"(relative gap {gap:.3e})"
        )

    orthonormal: float | None = None
    try:
        from .moments import orthonormalize

        transform = orthonormalize(mm)
        orthonormal = float(np.trace(transform.transform_gram(gram)))
    except ValueError:
        orthonormal = None

    return TraceReport(
        trace_pm=trace,
        weighted_coeff_sum=dot,
        orthonormal_trace=orthonormal,
        relative_gap=gap,
    )


@dataclass(frozen=True)
class VerificationReport:
    w: float
    mc_volume: float
    mc_stderr: float
    cheb_gap: float
    min_scan_value: float
    components: int | None
    trace_pm: float | None

    def to_json_dict(self) -> dict:
        return {
            "w": self.w,
            "mc_volume": self.mc_volume,
            "mc_stderr": self.mc_stderr,
            "cheb_gap": self.cheb_gap,
            "min_scan_value": self.min_scan_value,
            "components": self.components,
            "trace_PM": self.trace_pm,
        }


def run_report(
    p: Polynomial,
    box: BoxDomain,
    *,
    mc_samples: int = 1_000_000,
    seed: int = 0,
    scan_spec: GridSpec | None = None,
    resolution: int | None = None,
) -> VerificationReport:
    """Full verification pass over one fitted polynomial."""
    moments = moment_vector(p.basis, box)
    volume = mc_volume(p, box, samples=mc_samples, seed=seed)
    cheb = chebyshev_check(p, moments, volume)
    scan = nonnegativity_scan(p, box, scan_spec)
    components = count_components(p, box, resolution) if box.dimension <= 3 else None
    trace = trace_report(p, box).trace_pm if p.basis.kind == "monomial" else None
    return VerificationReport(
        w=cheb.w,
        mc_volume=volume.estimate,
        mc_stderr=volume.standard_error,
        cheb_gap=cheb.gap,
        min_scan_value=scan.min_value,
        components=components,
        trace_pm=trace,
    )
