"""
Flat model spaces: the unit torus R^n / Z^n and Euclidean R^n.

On both spaces the exponential map at x is translation, exp_x(v) = x + v
(reduced mod 1 on the torus), so exp_x is an isometry on balls of radius
below 1/4 and the distortion constants of a Riemannian chart are exactly 1.
All methods accept a single point of shape (n,) or a batch of shape (N, n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

SpaceKind = Literal["torus", "euclidean"]

TORUS_CHART_RADIUS = 0.25


@dataclass(frozen=True)
class ModelSpace:
    kind: SpaceKind
    dim: int

    def __post_init__(self):
        if self.kind not in ("torus", "euclidean"):
            raise ValueError(f"Unknown model space kind: {self.kind!r}")
        if self.dim < 1:
            raise ValueError(f"Dimension must be positive, got {self.dim}")

    @classmethod
    def torus(cls, dim: int) -> "ModelSpace":
        return cls("torus", dim)

    @classmethod
    def euclidean(cls, dim: int) -> "ModelSpace":
        return cls("euclidean", dim)

    @property
    def is_torus(self) -> bool:
        return self.kind == "torus"

    @property
    def chart_radius(self) -> float:
        """Radius r on which exp_x is an isometric chart."""
        return TORUS_CHART_RADIUS if self.is_torus else float("inf")

    def reduce(self, x: np.ndarray) -> np.ndarray:
        """Canonical representative of a point (coordinates in [0, 1) on the torus)."""
        x = np.asarray(x, dtype=float)
        if not self.is_torus:
            return x
        y = x - np.floor(x)
        # floor can leave 1.0 behind for tiny negative inputs
        return np.where(y >= 1.0, 0.0, y)

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Shortest vector v with y = exp_x(v), i.e. exp_x^{-1}(y)."""
        v = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        if self.is_torus:
            v = v - np.round(v)
        return v

    def exp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """
        Move from x along the tangent vector v.

        Args:
            x: Base point, shape (n,) or (N, n)
            v: Tangent vector(s), broadcast against x

        Returns:
            exp_x(v), reduced into the fundamental domain on the torus
        """
        return self.reduce(np.asarray(x, dtype=float) + np.asarray(v, dtype=float))

    def log(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """
        Inverse of exp at x.

        Args:
            x: Base point
            y: Target point(s)

        Returns:
            The shortest v with exp_x(v) = y
        """
        return self.displacement(x, y)

    def dist(self, x: np.ndarray, y: np.ndarray) -> np.ndarray | float:
        d = np.linalg.norm(self.displacement(x, y), axis=-1)
        return float(d) if np.ndim(d) == 0 else d
