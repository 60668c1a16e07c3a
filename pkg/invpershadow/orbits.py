"""
Periodic orbits, rational orbit enumeration and local conjugates.

The local conjugate at the k-th cycle point is the system read in charts,
F_k = exp^{-1}_{p_{k+1}} o f o exp_{p_k}, split as F_k(v) = A_k v + phi_k(v).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ChartDomainError, InvalidOrbitError, NotToralAutomorphismError
from .logger_config import logger
from .systems import DiscreteSystem

CLOSURE_TOLERANCE = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    system: DiscreteSystem = field(repr=False)
    points: np.ndarray = field(repr=False)
    jacobians: np.ndarray = field(repr=False)
    period: int
    fundamental_period: int
    chart_radius: float

    @property
    def base(self) -> np.ndarray:
        return self.points[0]

    @property
    def dim(self) -> int:
        return self.system.dim

    @property
    def space(self):
        return self.system.space

    def point(self, k: int) -> np.ndarray:
        return self.points[k % self.period]

    def jacobian(self, k: int) -> np.ndarray:
        return self.jacobians[k % self.period]

    @property
    def distinct_points(self) -> np.ndarray:
        return self.points[: self.fundamental_period]

    def monodromy(self) -> np.ndarray:
        """B = A_{m-1} ... A_0 = Df^m(p)."""
        B = np.eye(self.dim)
        for A in self.jacobians:
            B = A @ B
        return B

    def jacobian_product(self, start: int, steps: int) -> np.ndarray:
        """A_{start+steps-1} ... A_start."""
        P = np.eye(self.dim)
        for i in range(start, start + steps):
            P = self.jacobian(i) @ P
        return P

    @classmethod
    def from_base(cls, system: DiscreteSystem, base: np.ndarray, period: int) -> "PeriodicOrbit":
        """Build the orbit of `base`, validating that f^period(base) = base."""
        if period < 1:
            raise InvalidOrbitError(f"Period must be positive, got {period}")
        space = system.space
        points = [space.reduce(np.asarray(base, dtype=float))]
        for _ in range(period - 1):
            points.append(system(points[-1]))
        closure = space.dist(system(points[-1]), points[0])
        if closure > CLOSURE_TOLERANCE:
            raise InvalidOrbitError(
                f"Point {points[0].tolist()} is not {period}-periodic for {system.name} (closure error {closure:.3e})"
            )
        m0 = next(j for j in range(1, period + 1)
                  if period % j == 0 and space.dist(points[j % period], points[0]) <= CLOSURE_TOLERANCE)
        return cls._assemble(system, np.array(points), period, m0)

    @classmethod
    def _assemble(cls, system: DiscreteSystem, points: np.ndarray, period: int, m0: int) -> "PeriodicOrbit":
        jacobians = np.array([system.jacobian(p) for p in points])
        return cls(
            system=system,
            points=_frozen(points),
            jacobians=_frozen(jacobians),
            period=period,
            fundamental_period=m0,
            chart_radius=_chart_radius(system, points[:m0]),
        )


def _chart_radius(system: DiscreteSystem, distinct: np.ndarray) -> float:
    # half the isometric chart radius: 1/8 on the torus, unbounded in Euclidean space
    radius = 0.5 * system.space.chart_radius
    for i, j in itertools.combinations(range(len(distinct)), 2):
        radius = min(radius, 0.5 * system.space.dist(distinct[i], distinct[j]))
    return float(radius)


def find_rational_periodic_orbit(system: DiscreteSystem, denominator: int) -> list[PeriodicOrbit]:
    """
    Enumerate every cycle among the grid points with coordinates in {0, 1/q, ..., (q-1)/q}.

    An integer automorphism permutes the grid, so every grid point is periodic;
    each cycle is reported once, based at its lexicographically smallest point,
    with m = m0.
    """
    M = system.integer_matrix
    if M is None:
        raise NotToralAutomorphismError(f"{system.name} is not an integer toral automorphism")
    q = int(denominator)
    if q < 1:
        raise ValueError(f"Denominator must be positive, got {denominator}")
    n = system.dim
    logger.info(f"Enumerating rational orbits of {system.name} with denominator {q} ({q ** n} grid points)")

    seen: set[tuple[int, ...]] = set()
    orbits: list[PeriodicOrbit] = []
    for start in itertools.product(range(q), repeat=n):
        if start in seen:
            continue
        cycle = [start]
        current = np.array(start, dtype=np.int64)
        while True:
            current = (M @ current) % q
            key = tuple(int(c) for c in current)
            if key == start:
                break
            cycle.append(key)
        seen.update(cycle)
        points = np.array(cycle, dtype=float) / q
        orbits.append(PeriodicOrbit._assemble(system, points, len(cycle), len(cycle)))

    logger.info(f"Found {len(orbits)} orbits with periods {[o.period for o in orbits]}")
    return orbits


@dataclass(frozen=True, eq=False)
class LocalConjugate:
    orbit: PeriodicOrbit = field(repr=False)
    index: int

    @property
    def matrix(self) -> np.ndarray:
        return self.orbit.jacobian(self.index)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        norms = np.linalg.norm(v, axis=-1)
        if np.any(norms > self.orbit.chart_radius):
            raise ChartDomainError(
                f"|v| = {float(np.max(norms)):.3e} exceeds chart radius {self.orbit.chart_radius:.3e}"
            )
        space = self.orbit.space
        x = space.exp(self.orbit.point(self.index), v)
        return space.log(self.orbit.point(self.index + 1), self.orbit.system(x))

    def remainder(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return self(v) - v @ self.matrix.T


def local_conjugate(orbit: PeriodicOrbit, k: int) -> LocalConjugate:
    """
    The map F_k = exp^{-1}_{p_{k+1}} o f o exp_{p_k} on the chart ball at p_k.

    Args:
        orbit: Periodic orbit p_0..p_{m-1}
        k: Orbit index, taken mod the period

    Returns:
        LocalConjugate with linear part A_k; raises ChartDomainError outside the chart ball
    """
    return LocalConjugate(orbit=orbit, index=k % orbit.period)


def remainder(conjugate: LocalConjugate, v: np.ndarray) -> np.ndarray:
    """phi_k(v) = F_k(v) - A_k v."""
    return conjugate.remainder(v)


# --- Orbit records -----------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def export_orbits(orbits: Iterable[PeriodicOrbit]) -> str:
    """Serialize orbits as line-oriented text records with 17 significant digits."""
    lines: list[str] = []
    for orbit in orbits:
        lines.append("orbit")
        lines.append(f"dimension {orbit.dim}")
        lines.append(f"period {orbit.period}")
        lines.append(f"fundamental_period {orbit.fundamental_period}")
        lines.append(f"chart_radius {_fmt(orbit.chart_radius)}")
        for k, p in enumerate(orbit.points):
            lines.append(f"point {k} " + " ".join(_fmt(c) for c in p))
        for k, A in enumerate(orbit.jacobians):
            lines.append(f"jacobian {k} " + " ".join(_fmt(c) for c in A.ravel()))
        lines.append("end")
    return "\n".join(lines) + "\n"


def import_orbits(text: str, system: DiscreteSystem) -> list[PeriodicOrbit]:
    """Parse orbit records and re-validate each against `system`."""
    orbits: list[PeriodicOrbit] = []
    record: dict | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "orbit":
                record = {"points": {}, "jacobians": {}}
            elif head == "end":
                orbits.append(_orbit_from_record(record, system))
                record = None
            elif head in ("dimension", "period", "fundamental_period"):
                record[head] = int(rest[0])
            elif head == "chart_radius":
                record[head] = float(rest[0])
            elif head in ("point", "jacobian"):
                record[head + "s"][int(rest[0])] = np.array([float(c) for c in rest[1:]])
            else:
                raise ValueError(f"unknown record key {head!r}")
        except (TypeError, IndexError, KeyError, ValueError) as e:
            logger.error(f"Orbit record parse error at line {lineno}: {e}")
            raise InvalidOrbitError(f"line {lineno}: {e}") from e
    if record is not None:
        raise InvalidOrbitError("unterminated orbit record")
    return orbits


def _orbit_from_record(record: dict, system: DiscreteSystem) -> PeriodicOrbit:
    n, m = record["dimension"], record["period"]
    if n != system.dim:
        raise InvalidOrbitError(f"record dimension {n} does not match system dimension {system.dim}")
    points = np.array([record["points"][k] for k in range(m)])
    jacobians = np.array([record["jacobians"][k].reshape(n, n) for k in range(m)])
    orbit = PeriodicOrbit.from_base(system, points[0], m)
    if orbit.fundamental_period != record["fundamental_period"]:
        raise InvalidOrbitError("fundamental period does not match the system")
    if not np.allclose(orbit.jacobians, jacobians, rtol=1e-12, atol=1e-12):
        raise InvalidOrbitError("recorded Jacobians do not match the system")
    return orbit
