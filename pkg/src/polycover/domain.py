"""Axis-aligned box domains used as bounding sets for fitting and integration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box given by per-axis lower and upper bounds.

    The box plays two roles: it bounds the region on which nonnegativity of a
    fitted polynomial is enforced, and it is the integration domain for the
    closed-form Lebesgue moments that drive the fit objective.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if len(lower) == 0 or len(lower) != len(upper):
            raise ValueError("lower and upper must have the same nonzero length")
        if not all(np.isfinite(v) for v in lower + upper):
            raise ValueError("box bounds must be finite")
        if any(lo >= up for lo, up in zip(lower, upper)):
            raise ValueError("each lower bound must be strictly below its upper bound")

    @classmethod
    def symmetric(cls, dimension: int, half_width: float = 1.0) -> "BoxDomain":
        """Centered box [-half_width, half_width]^dimension."""
        if dimension < 1:
            raise ValueError("dimension must be at least 1")
        if half_width <= 0:
            raise ValueError("half_width must be positive")
        return cls(lower=(-half_width,) * dimension, upper=(half_width,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def lower_array(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=float)

    @property
    def upper_array(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float)

    @property
    def widths(self) -> np.ndarray:
        return self.upper_array - self.lower_array

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower_array + self.upper_array)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, points: np.ndarray, atol: float = 0.0) -> np.ndarray:
        """Boolean mask of which points lie in the box (boundary included)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dimension:
            raise ValueError(
                f"points have dimension {pts.shape[1]}, box has {self.dimension}"
            )
        lo = self.lower_array - atol
        up = self.upper_array + atol
        return np.all((pts >= lo) & (pts <= up), axis=1)

    def contains_all(self, points: np.ndarray, atol: float = 0.0) -> bool:
        return bool(np.all(self.contains(points, atol=atol)))

    def affine_to_unit(self, points: np.ndarray) -> np.ndarray:
        """Map points affinely onto [-1, 1]^n, axis by axis."""
        pts = np.asarray(points, dtype=float)
        return (2.0 * pts - (self.lower_array + self.upper_array)) / self.widths

    def inflate(self, factor: float) -> "BoxDomain":
        """Scale the box about its center; factor 1.0 is the identity."""
        if not np.isfinite(factor) or factor <= 0:
            raise ValueError("inflation factor must be positive and finite")
        if factor == 1.0:
            return self
        c = self.center
        half = 0.5 * factor * self.widths
        return BoxDomain(lower=tuple(c - half), upper=tuple(c + half))
