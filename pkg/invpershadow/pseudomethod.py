"""
Pseudomethods of classes Theta_s and Theta_t, their defects, and pseudotrajectories.

A Theta_s d-pseudomethod is a family of continuous maps Psi_k with
dist(Psi_k(x), f(x)) <= d; its pseudotrajectories satisfy x_{k+1} = Psi_k(x_k).
A Theta_t d-pseudomethod satisfies dist(Psi_{k+1}(x), f(Psi_k(x))) <= d and
generates x_k = Psi_k(x_0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.optimize import root

from .errors import BackwardGenerationError
from .logger_config import logger
from .orbits import PeriodicOrbit
from .reports import write_csv
from .sampling import FocusRegion, PointSampler
from .systems import DiscreteSystem, iterate

MethodMap = Callable[[int, np.ndarray], np.ndarray]
MethodClass = Literal["theta_s", "theta_t"]

RESIDUAL_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class PseudomethodS:
    system: DiscreteSystem = field(repr=False)
    maps: MethodMap = field(repr=False)
    period: int
    claimed_defect: float
    name: str = "pseudomethod"
    # where the maps switch between pieces; used to place adversarial samples
    focus: FocusRegion | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.period < 1:
            raise ValueError(f"k-period must be positive, got {self.period}")
        if self.claimed_defect < 0:
            raise ValueError(f"Defect must be non-negative, got {self.claimed_defect}")

    def __call__(self, k: int, x: np.ndarray) -> np.ndarray:
        return self.maps(k % self.period, np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class PseudomethodT:
    system: DiscreteSystem = field(repr=False)
    maps: MethodMap = field(repr=False)
    claimed_defect: float
    name: str = "pseudomethod-t"
    focus: FocusRegion | None = field(default=None, repr=False)

    def __call__(self, k: int, x: np.ndarray) -> np.ndarray:
        return self.maps(k, np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class Pseudotrajectory:
    window: tuple[int, int]
    points: np.ndarray = field(repr=False)
    method: PseudomethodS | PseudomethodT = field(repr=False)
    method_class: MethodClass
    # x_0 of a Theta_t trajectory; its stored points are Psi_k(x_0)
    origin: np.ndarray | None = field(default=None, repr=False)

    @property
    def indices(self) -> range:
        return range(self.window[0], self.window[1] + 1)

    def point(self, k: int) -> np.ndarray:
        if not self.window[0] <= k <= self.window[1]:
            raise IndexError(f"index {k} outside window {self.window}")
        return self.points[k - self.window[0]]

    def residual(self) -> float:
        """Largest violation of the generating relation over the window."""
        space = self.method.system.space
        if self.method_class == "theta_s":
            worst = 0.0
            for k in range(self.window[0], self.window[1]):
                worst = max(worst, space.dist(self.method(k, self.point(k)), self.point(k + 1)))
            return worst
        if self.origin is None:
            raise ValueError("Theta_t trajectory has no recorded x_0")
        return max(space.dist(self.method(k, self.origin), self.point(k)) for k in self.indices)


# --- Constructors ------------------------------------------------------------

def exact_method(system: DiscreteSystem) -> PseudomethodS:
    """
    The zero-defect method Psi_k = f.

    Args:
        system: Map f whose iterates the method reproduces

    Returns:
        PseudomethodS with k-period 1 and claimed defect 0
    """
    return PseudomethodS(system, lambda k, x: system(x), period=1, claimed_defect=0.0, name="exact")


def drift_method(system: DiscreteSystem, offset: Sequence[float]) -> PseudomethodS:
    """Psi_k(x) = exp_{f(x)}(offset) for every k."""
    offset = np.asarray(offset, dtype=float)
    return PseudomethodS(
        system,
        lambda k, x: system.space.exp(system(x), offset),
        period=1,
        claimed_defect=float(np.linalg.norm(offset)),
        name="drift",
    )


def family_method(system: DiscreteSystem, maps: Sequence[Callable[[np.ndarray], np.ndarray]],
                  claimed_defect: float, name: str, focus: FocusRegion | None = None) -> PseudomethodS:
    """k-periodic method Psi_k = maps[k mod P], e.g. the glued maps of an adversary."""
    maps = tuple(maps)
    return PseudomethodS(system, lambda k, x: maps[k](x), period=len(maps),
                         claimed_defect=claimed_defect, name=name, focus=focus)


def exact_method_t(system: DiscreteSystem) -> PseudomethodT:
    return PseudomethodT(system, lambda k, x: iterate(system, x, k), claimed_defect=0.0, name="exact-t")


def drift_method_t(system: DiscreteSystem, offset: Sequence[float]) -> PseudomethodT:
    """Psi_k(x) = f^k(x) + k*offset (mod 1 on the torus)."""
    offset = np.asarray(offset, dtype=float)
    return PseudomethodT(
        system,
        lambda k, x: system.space.exp(iterate(system, x, k), k * offset),
        claimed_defect=float(np.linalg.norm(offset)),
        name="drift-t",
    )


def single_defect_method_t(system: DiscreteSystem, index: int, offset: Sequence[float]) -> PseudomethodT:
    """Psi_k = f^k except at k = index, where the image is shifted by `offset`."""
    offset = np.asarray(offset, dtype=float)

    def maps(k, x):
        y = iterate(system, x, k)
        return system.space.exp(y, offset) if k == index else y

    return PseudomethodT(system, maps, claimed_defect=float(np.linalg.norm(offset)), name="single-defect-t")


def constant_method_t(system: DiscreteSystem, values: Sequence[Sequence[float]]) -> PseudomethodT:
    """Constant maps Psi_k(x) = c_{k mod P}; the defect is max_k dist(c_{k+1}, f(c_k))."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    P = len(values)
    space = system.space
    defect = max(space.dist(values[(k + 1) % P], system(values[k])) for k in range(P))

    def maps(k, x):
        c = values[k % P]
        return np.broadcast_to(c, np.shape(x)).copy()

    return PseudomethodT(system, maps, claimed_defect=float(defect), name="constant-t")


# --- Defects -----------------------------------------------------------------

def measure_defect_s(method: PseudomethodS, sampler: PointSampler, count: int) -> float:
    """Sampled sup over one k-period of dist(Psi_k(x), f(x)); a lower bound on the true defect."""
    if count < 1:
        raise ValueError("count must be at least 1")
    space = method.system.space
    X = sampler.points(space, count, method.focus)
    fX = method.system(X)
    worst = 0.0
    for k in range(method.period):
        worst = max(worst, float(np.max(space.dist(method(k, X), fX))))
    logger.debug(f"Measured Theta_s defect of {method.name}: {worst:.6e} over {len(X)} points x {method.period} maps")
    return worst


def measure_defect_t(method: PseudomethodT, sampler: PointSampler, count: int,
                     window: tuple[int, int] = (0, 8)) -> float:
    """Sampled sup of dist(Psi_{k+1}(x), f(Psi_k(x))) for k in [window[0], window[1])."""
    if count < 1:
        raise ValueError("count must be at least 1")
    space = method.system.space
    X = sampler.points(space, count, method.focus)
    worst = 0.0
    current = method(window[0], X)
    for k in range(window[0], window[1]):
        following = method(k + 1, X)
        worst = max(worst, float(np.max(space.dist(following, method.system(current)))))
        current = following
    logger.debug(f"Measured Theta_t defect of {method.name}: {worst:.6e}")
    return worst


# --- Generation --------------------------------------------------------------

def preimage(method: PseudomethodS, k: int, target: np.ndarray) -> np.ndarray:
    """
    Solve Psi_k(x) = target near f^{-1}(target).

    Args:
        method: Theta_s pseudomethod to invert
        k: Index of the map Psi_k
        target: Point x_{k+1} of the model space

    Returns:
        The point x with Psi_k(x) = target

    Raises:
        BackwardGenerationError: If the root finder leaves a residual above 1e-12
    """
    space = method.system.space
    guess = method.system.inverse(target)

    def residual(v):
        return space.displacement(target, method(k, space.exp(guess, v)))

    solution = root(residual, np.zeros(space.dim), method="hybr", options={"xtol": 1e-15})
    x = space.exp(guess, solution.x)
    error = space.dist(method(k, x), target)
    if error > RESIDUAL_TOLERANCE:
        logger.error(f"Backward step {k} of {method.name} failed: residual {error:.3e}")
        raise BackwardGenerationError(
            f"Psi_{k} is not invertible near the required point (residual {error:.3e}); use a forward-only window"
        )
    return x


def generate_s(method: PseudomethodS, x0: np.ndarray, window: tuple[int, int]) -> Pseudotrajectory:
    """
    Generate x_{k+1} = Psi_k(x_k) over [k_min, k_max]; backward points by local inversion.

    Args:
        method: Theta_s pseudomethod
        x0: Starting point, reduced into the model space
        window: (k_min, k_max) containing 0

    Returns:
        Pseudotrajectory holding x_{k_min}..x_{k_max}
    """
    k_min, k_max = window
    if not k_min <= 0 <= k_max:
        raise ValueError(f"window {window} must contain 0")
    space = method.system.space
    points = {0: space.reduce(np.asarray(x0, dtype=float))}
    for k in range(0, k_max):
        points[k + 1] = method(k, points[k])
    for k in range(-1, k_min - 1, -1):
        points[k] = preimage(method, k, points[k + 1])
    ordered = np.array([points[k] for k in range(k_min, k_max + 1)])
    return Pseudotrajectory((k_min, k_max), ordered, method, "theta_s")


def generate_t(method: PseudomethodT, x0: np.ndarray, window: tuple[int, int]) -> Pseudotrajectory:
    """
    Generate x_k = Psi_k(x_0) over the window.

    Args:
        method: Theta_t pseudomethod
        x0: Point every Psi_k is applied to
        window: (k_min, k_max) containing 0

    Returns:
        Pseudotrajectory that records x0 as its origin
    """
    k_min, k_max = window
    if not k_min <= 0 <= k_max:
        raise ValueError(f"window {window} must contain 0")
    x0 = np.asarray(x0, dtype=float)
    ordered = np.array([method(k, x0) for k in range(k_min, k_max + 1)])
    return Pseudotrajectory((k_min, k_max), ordered, method, "theta_t", origin=x0)


# --- Shadowing distance ------------------------------------------------------

def distance_profile(traj: Pseudotrajectory, orbit: PeriodicOrbit) -> np.ndarray:
    space = orbit.space
    return np.array([space.dist(traj.point(k), orbit.point(k)) for k in traj.indices])


def shadowing_distance(traj: Pseudotrajectory, orbit: PeriodicOrbit) -> float:
    """max over the window of dist(x_k, f^k(p))."""
    return float(np.max(distance_profile(traj, orbit)))


def write_trajectory_csv(path: str | Path, traj: Pseudotrajectory, orbit: PeriodicOrbit) -> Path:
    """Columns k, x_1..x_n, dist_to_orbit."""
    n = orbit.dim
    header = ["k", *(f"x_{i + 1}" for i in range(n)), "dist_to_orbit"]
    distances = distance_profile(traj, orbit)
    rows = [[k, *traj.point(k), dist] for k, dist in zip(traj.indices, distances)]
    return write_csv(path, header, rows)
