"""
Seeded deterministic point sampling.

Sampled suprema replace the sup over the whole space: a scrambled Halton
cover of the space plus samples concentrated on the balls and spheres where
glued maps switch between their pieces.  Halton prefixes are nested, so a
larger count always contains the samples of a smaller one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm, qmc

from .space import ModelSpace

_CLIP = 1e-12


@dataclass(frozen=True, eq=False)
class FocusRegion:
    """Centers with a fill radius and the sphere radii worth sampling around them."""
    centers: np.ndarray = field(repr=False)
    ball_radius: float
    shell_radii: tuple[float, ...] = ()


@dataclass(frozen=True)
class PointSampler:
    seed: int = 0

    def _halton(self, dim: int, count: int, salt: int) -> np.ndarray:
        engine = qmc.Halton(d=dim, scramble=True, seed=np.random.default_rng([self.seed, salt]))
        return np.clip(engine.random(count), _CLIP, 1.0 - _CLIP)

    def unit_vectors(self, dim: int, count: int, salt: int = 1) -> np.ndarray:
        g = norm.ppf(self._halton(dim, count, salt))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def sphere(self, dim: int, radius: float, count: int, salt: int = 2) -> np.ndarray:
        return radius * self.unit_vectors(dim, count, salt)

    def ball(self, dim: int, radius: float, count: int, salt: int = 3) -> np.ndarray:
        u = self._halton(dim + 1, count, salt)
        directions = norm.ppf(u[:, 1:])
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = radius * u[:, :1] ** (1.0 / dim)
        return radii * directions

    def cover(self, space: ModelSpace, count: int, salt: int = 4) -> np.ndarray:
        """Low-discrepancy cover of the torus, or of the cube [-1, 1]^n in Euclidean space."""
        u = self._halton(space.dim, count, salt)
        return u if space.is_torus else 2.0 * u - 1.0

    def points(self, space: ModelSpace, count: int, focus: FocusRegion | None = None) -> np.ndarray:
        """Global cover plus, for each focus center, a filled ball and one sphere per shell radius."""
        chunks = [self.cover(space, count)]
        if focus is not None:
            for i, c in enumerate(np.atleast_2d(focus.centers)):
                chunks.append(space.exp(c, self.ball(space.dim, focus.ball_radius, count, salt=10 + i)))
                for j, r in enumerate(focus.shell_radii):
                    chunks.append(space.exp(c, self.sphere(space.dim, r, count, salt=1000 + 100 * i + j)))
        return np.vstack(chunks)
