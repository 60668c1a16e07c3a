"""
Concrete discrete dynamical systems on the flat model spaces.

A DiscreteSystem bundles a map f, its inverse and its Jacobian Df.  Maps act
on the last axis, so both single points (n,) and batches (N, n) are accepted;
the Jacobian is evaluated at a single point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidOrbitError
from .logger_config import logger
from .space import ModelSpace

PointMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    space: ModelSpace
    name: str
    forward: PointMap = field(repr=False)
    backward: PointMap = field(repr=False)
    derivative: PointMap = field(repr=False)
    # Global matrix of linear systems (integer for toral automorphisms)
    matrix: np.ndarray | None = field(default=None, repr=False)
    # True when f is affine on every chart ball around its cycle points
    is_linear: bool = False

    @property
    def dim(self) -> int:
        return self.space.dim

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(np.asarray(x, dtype=float))

    def inverse(self, x: np.ndarray) -> np.ndarray:
        return self.backward(np.asarray(x, dtype=float))

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.derivative(np.asarray(x, dtype=float)), dtype=float)

    @property
    def integer_matrix(self) -> np.ndarray | None:
        """The integer matrix of a toral automorphism, None for any other system."""
        if self.matrix is None or not self.space.is_torus:
            return None
        rounded = np.rint(self.matrix)
        if not np.array_equal(rounded, self.matrix):
            return None
        return rounded.astype(np.int64)


def iterate(system: DiscreteSystem, x: np.ndarray, k: int) -> np.ndarray:
    """Return f^k(x); negative k uses the inverse map."""
    y = system.space.reduce(np.asarray(x, dtype=float))
    step = system.__call__ if k >= 0 else system.inverse
    for _ in range(abs(int(k))):
        y = step(y)
    return y


def toral_automorphism(matrix: Sequence[Sequence[int]] | np.ndarray, name: str | None = None) -> DiscreteSystem:
    """Linear automorphism x -> Mx mod 1 of the torus for an integer matrix with det = +-1."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"Toral automorphism needs a square matrix, got shape {M.shape}")
    if not np.array_equal(np.rint(M), M):
        raise ValueError("Toral automorphism needs an integer matrix")
    det = round(float(np.linalg.det(M)))
    if abs(det) != 1:
        raise ValueError(f"Toral automorphism needs det = +-1, got {det}")
    M_inv = np.rint(np.linalg.inv(M))
    space = ModelSpace.torus(M.shape[0])

    def forward(x):
        return space.reduce(x @ M.T)

    def backward(x):
        return space.reduce(x @ M_inv.T)

    def derivative(x):
        return M.copy()

    return DiscreteSystem(
        space=space,
        name=name or f"toral{M.astype(int).tolist()}",
        forward=forward,
        backward=backward,
        derivative=derivative,
        matrix=M,
        is_linear=True,
    )


def cat_map() -> DiscreteSystem:
    """Arnold's cat map with matrix rows (2, 1), (1, 1)."""
    return toral_automorphism([[2, 1], [1, 1]], name="cat")


def perturbed_cat_map(kappa: float) -> DiscreteSystem:
    """
    Cat map composed with the periodic shear g(x, y) = (x + kappa*(1 - cos 2*pi*y)/(2*pi), y).

    The origin stays fixed and Df(0) equals the cat matrix, while the local
    conjugate at the origin picks up a quadratic remainder.
    """
    M = np.array([[2.0, 1.0], [1.0, 1.0]])
    M_inv = np.array([[1.0, -1.0], [-1.0, 2.0]])
    space = ModelSpace.torus(2)
    two_pi = 2.0 * np.pi

    def shift(y):
        return kappa * (1.0 - np.cos(two_pi * y)) / two_pi

    def forward(x):
        sheared = np.array(x, dtype=float, copy=True)
        sheared[..., 0] = sheared[..., 0] + shift(sheared[..., 1])
        return space.reduce(sheared @ M.T)

    def backward(x):
        z = space.reduce(x @ M_inv.T)
        z[..., 0] = z[..., 0] - shift(z[..., 1])
        return space.reduce(z)

    def derivative(x):
        shear = np.array([[1.0, kappa * np.sin(two_pi * x[1])], [0.0, 1.0]])
        return M @ shear

    return DiscreteSystem(
        space=space,
        name=f"perturbed-cat(kappa={kappa})",
        forward=forward,
        backward=backward,
        derivative=derivative,
    )


def linear_system(matrix: Sequence[Sequence[float]] | np.ndarray, name: str | None = None) -> DiscreteSystem:
    """Invertible linear map x -> Ax of Euclidean space."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"Linear system needs a square matrix, got shape {A.shape}")
    A_inv = np.linalg.inv(A)
    space = ModelSpace.euclidean(A.shape[0])
    return DiscreteSystem(
        space=space,
        name=name or "linear",
        forward=lambda x: x @ A.T,
        backward=lambda x: x @ A_inv.T,
        derivative=lambda x: A.copy(),
        matrix=A,
        is_linear=True,
    )


def planar_rotation(angle: float) -> DiscreteSystem:
    """
    Rotation of the Euclidean plane about the origin.

    Args:
        angle: Rotation angle in radians

    Returns:
        Linear system whose fixed point 0 is nonhyperbolic
    """
    c, s = np.cos(angle), np.sin(angle)
    return linear_system([[c, -s], [s, c]], name=f"rotation({angle:g})")


def cycle_model(points: Sequence[Sequence[float]] | np.ndarray,
                matrices: Sequence[np.ndarray]) -> DiscreteSystem:
    """
    Piecewise-affine Euclidean map carrying the cycle p_0 -> p_1 -> ... -> p_0.

    On the Voronoi cell of p_j the map is x -> p_{j+1} + A_j (x - p_j).  It is
    invertible on the union of balls around the cycle small enough that images
    stay in the cell of the image point, which is where the model is used.
    """
    P = np.asarray(points, dtype=float)
    As = [np.asarray(A, dtype=float) for A in matrices]
    m, n = P.shape
    if len(As) != m or any(A.shape != (n, n) for A in As):
        raise InvalidOrbitError("cycle_model needs one n x n matrix per cycle point")
    if m == 1:
        return linear_system(As[0], name="linear-cycle") if np.allclose(P[0], 0.0) else _shifted_fixed_point(P[0], As[0])
    inverses = [np.linalg.inv(A) for A in As]
    space = ModelSpace.euclidean(n)

    def nearest(x):
        d = np.linalg.norm(x[..., None, :] - P, axis=-1)
        return np.argmin(d, axis=-1)

    def forward(x):
        idx = nearest(x)
        out = np.empty_like(x)
        for j in range(m):
            mask = idx == j
            if np.any(mask):
                out[mask] = P[(j + 1) % m] + (x[mask] - P[j]) @ As[j].T
        return out

    def backward(y):
        idx = nearest(y)
        out = np.empty_like(y)
        for j_next in range(m):
            mask = idx == j_next
            if np.any(mask):
                j = (j_next - 1) % m
                out[mask] = P[j] + (y[mask] - P[j_next]) @ inverses[j].T
        return out

    def derivative(x):
        return As[int(nearest(x))].copy()

    logger.debug(f"Built piecewise-affine cycle model with period {m} in dimension {n}")
    return DiscreteSystem(
        space=space,
        name=f"cycle-model(m={m})",
        forward=lambda x: _batched(forward, x),
        backward=lambda x: _batched(backward, x),
        derivative=derivative,
        is_linear=True,
    )


def _shifted_fixed_point(p: np.ndarray, A: np.ndarray) -> DiscreteSystem:
    A_inv = np.linalg.inv(A)
    space = ModelSpace.euclidean(len(p))
    return DiscreteSystem(
        space=space,
        name="affine-fixed-point",
        forward=lambda x: p + (x - p) @ A.T,
        backward=lambda x: p + (x - p) @ A_inv.T,
        derivative=lambda x: A.copy(),
        is_linear=True,
    )


def _batched(fn: PointMap, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return fn(x[None, :])[0]
    return fn(x)
