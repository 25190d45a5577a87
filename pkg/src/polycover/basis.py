"""Multi-index enumeration, polynomial bases, evaluation, and Gram conversions.

A basis is the ordered family of all n-variate monomials (or tensor products
of Chebyshev polynomials of the first kind) of total degree at most d.  The
ordering is graded lexicographic: ascending total degree, then ascending
lexicographic order of the exponent tuples.  This makes the degree-d basis a
prefix of every higher-degree basis, which the fitting layer relies on.

Chebyshev basis elements are evaluated through the affine map of the attached
box onto [-1, 1]^n, so a Chebyshev basis always carries its box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Literal

import numpy as np

from .domain import BoxDomain

MultiIndex = tuple[int, ...]
BasisKind = Literal["monomial", "chebyshev"]

BASIS_KINDS = ("monomial", "chebyshev")


def _compositions(total: int, parts: int) -> Iterator[MultiIndex]:
    """All exponent tuples with the given sum, in ascending lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def enumerate_indices(dimension: int, degree: int) -> list[MultiIndex]:
    """Ordered list of all multi-indices with |alpha| <= degree.

    Args:
        dimension: number of variables, at least 1.
        degree: maximum total degree, at least 0.

    Returns:
        Graded-lex ordered, duplicate-free list of length
        binomial(dimension + degree, degree).
    """
    if dimension < 1:
        raise ValueError("dimension must be at least 1")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    indices: list[MultiIndex] = []
    for total in range(degree + 1):
        indices.extend(_compositions(total, dimension))
    return indices


def basis_size(dimension: int, degree: int) -> int:
    return math.comb(dimension + degree, degree)


def half_degree(degree: int) -> int:
    """Ceil(degree / 2), the degree of the square-root basis for Gram forms."""
    return (degree + 1) // 2


@dataclass(frozen=True)
class PolyBasis:
    """Ordered finite polynomial basis of degree <= d in n variables.

    Chebyshev bases carry the box whose affine map onto [-1, 1]^n defines the
    tensor Chebyshev elements; monomial bases are box-free.
    """

    dimension: int
    degree: int
    kind: BasisKind
    indices: tuple[MultiIndex, ...]
    box: BoxDomain | None = None

    def __post_init__(self) -> None:
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "chebyshev":
            if self.box is None:
                raise ValueError("a chebyshev basis requires a box")
            if self.box.dimension != self.dimension:
                raise ValueError("basis box dimension mismatch")
        if len(self.indices) != basis_size(self.dimension, self.degree):
            raise ValueError("index list does not match the full basis")

    def __len__(self) -> int:
        return len(self.indices)

    @cached_property
    def index_position(self) -> dict[MultiIndex, int]:
        return {alpha: i for i, alpha in enumerate(self.indices)}

    @cached_property
    def exponent_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)


def make_basis(
    dimension: int,
    degree: int,
    kind: BasisKind = "monomial",
    box: BoxDomain | None = None,
) -> PolyBasis:
    """Construct the full graded-lex basis of the given dimension and degree."""
    indices = tuple(enumerate_indices(dimension, degree))
    if kind == "monomial":
        box = None
    return PolyBasis(dimension=dimension, degree=degree, kind=kind, indices=indices, box=box)


def _chebyshev_table(t: np.ndarray, max_degree: int) -> np.ndarray:
    """Values T_0(t)..T_max(t) via the three-term recurrence; shape (len(t), max+1)."""
    out = np.empty((t.shape[0], max_degree + 1))
    out[:, 0] = 1.0
    if max_degree >= 1:
        out[:, 1] = t
    for k in range(2, max_degree + 1):
        out[:, k] = 2.0 * t * out[:, k - 1] - out[:, k - 2]
    return out


def eval_basis_many(basis: PolyBasis, points: np.ndarray) -> np.ndarray:
    """Evaluate every basis element at every point.

    Args:
        basis: the basis to evaluate.
        points: array of shape (N, n) or (n,) for a single point.

    Returns:
        Array of shape (N, len(basis)) with one column per basis element.
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != basis.dimension:
        raise ValueError(
            f"points have dimension {pts.shape[-1]}, basis has {basis.dimension}"
        )
    if basis.kind == "chebyshev":
        assert basis.box is not None
        pts = basis.box.affine_to_unit(pts)

    n = basis.dimension
    exps = basis.exponent_array
    if basis.kind == "monomial":
        tables = [
            pts[:, d, None] ** np.arange(int(exps[:, d].max()) + 1)
            for d in range(n)
        ]
    else:
        tables = [_chebyshev_table(pts[:, d], int(exps[:, d].max())) for d in range(n)]

    values = tables[0][:, exps[:, 0]]
    for d in range(1, n):
        values = values * tables[d][:, exps[:, d]]
    return values[0] if single else values


def eval_basis(basis: PolyBasis, x: np.ndarray) -> np.ndarray:
    """Evaluate every basis element at a single point; returns a 1-D vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1:
        raise ValueError("eval_basis expects a single point")
    return eval_basis_many(basis, x)


@dataclass
class Polynomial:
    """A polynomial stored as a dense coefficient vector over a basis."""

    basis: PolyBasis
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if coeffs.shape[0] != len(self.basis):
            raise ValueError(
                f"coefficient vector has length {coeffs.shape[0]}, "
                f"basis has {len(self.basis)} elements"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        self.coeffs = coeffs

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def degree(self) -> int:
        return self.basis.degree

    def __call__(self, x: np.ndarray) -> float:
        return eval_poly(self, x)


def eval_poly(p: Polynomial, x: np.ndarray) -> float:
    """Value of the polynomial at one point."""
    return float(eval_basis(p.basis, x) @ p.coeffs)


def eval_poly_many(
    p: Polynomial, points: np.ndarray, chunk_size: int = 262_144
) -> np.ndarray:
    """Values at many points, evaluated in chunks to bound peak memory."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], chunk_size):
        block = pts[start : start + chunk_size]
        out[start : start + chunk_size] = eval_basis_many(p.basis, block) @ p.coeffs
    return out


def constant_poly(basis: PolyBasis, value: float) -> Polynomial:
    coeffs = np.zeros(len(basis))
    coeffs[0] = value
    return Polynomial(basis, coeffs)


# ---------------------------------------------------------------------------
# Gram matrix conversions (monomial bases)
# ---------------------------------------------------------------------------

GRAM_SYMMETRY_TOL = 1e-12


def _require_monomial(basis: PolyBasis, what: str) -> None:
    if basis.kind != "monomial":
        raise ValueError(f"{what} is defined for monomial bases only")


def gram_to_poly(gram: np.ndarray, basis_half: PolyBasis) -> Polynomial:
    """Expand the quadratic form of a symmetric matrix over a half-degree basis.

    Given a symmetric matrix P and the monomial basis pi of degree delta,
    returns pi^T P pi collected as a polynomial of degree 2*delta.
    """
    _require_monomial(basis_half, "gram_to_poly")
    P = np.asarray(gram, dtype=float)
    s = len(basis_half)
    if P.shape != (s, s):
        raise ValueError(f"gram matrix must be {s}x{s} for this basis")
    asym = float(np.max(np.abs(P - P.T))) if s else 0.0
    if asym > GRAM_SYMMETRY_TOL * max(1.0, float(np.max(np.abs(P))) if s else 1.0):
        raise ValueError(f"gram matrix is asymmetric (max deviation {asym:.3e})")

    full = make_basis(basis_half.dimension, 2 * basis_half.degree, "monomial")
    coeffs = np.zeros(len(full))
    pos = full.index_position
    idx = basis_half.indices
    for i in range(s):
        ai = idx[i]
        for j in range(s):
            gamma = tuple(a + b for a, b in zip(ai, idx[j]))
            coeffs[pos[gamma]] += P[i, j]
    return Polynomial(full, coeffs)


def poly_to_gram(p: Polynomial) -> np.ndarray:
    """Canonical symmetric Gram representative of a monomial polynomial.

    Each coefficient of exponent gamma is split equally across all ordered
    pairs (alpha, beta) of half-degree exponents with alpha + beta = gamma.
    The result G satisfies gram_to_poly(G) == p up to zero padding.
    """
    _require_monomial(p.basis, "poly_to_gram")
    delta = half_degree(p.degree)
    basis_half = make_basis(p.dimension, delta, "monomial")
    idx = basis_half.indices
    s = len(basis_half)

    pair_slots: dict[MultiIndex, list[tuple[int, int]]] = {}
    for i in range(s):
        for j in range(s):
            gamma = tuple(a + b for a, b in zip(idx[i], idx[j]))
            pair_slots.setdefault(gamma, []).append((i, j))

    G = np.zeros((s, s))
    pos = p.basis.index_position
    for gamma, slots in pair_slots.items():
        c = p.coeffs[pos[gamma]] if gamma in pos else 0.0
        if c == 0.0:
            continue
        share = c / len(slots)
        for i, j in slots:
            G[i, j] += share
    return G


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def poly_to_dict(p: Polynomial) -> dict:
    """JSON-ready dict; floats round-trip exactly through json (repr printing)."""
    out: dict = {
        "dimension": p.dimension,
        "degree": p.degree,
        "kind": p.basis.kind,
        "coeffs": [float(c) for c in p.coeffs],
    }
    if p.basis.box is not None:
        out["box"] = {
            "lower": list(p.basis.box.lower),
            "upper": list(p.basis.box.upper),
        }
    return out


def poly_from_dict(data: dict) -> Polynomial:
    kind = data["kind"]
    box = None
    if "box" in data and data["box"] is not None:
        box = BoxDomain(lower=tuple(data["box"]["lower"]), upper=tuple(data["box"]["upper"]))
    basis = make_basis(int(data["dimension"]), int(data["degree"]), kind, box)
    return Polynomial(basis, np.asarray(data["coeffs"], dtype=float))
