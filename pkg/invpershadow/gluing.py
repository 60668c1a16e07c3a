"""
Gluing of locally defined maps into globally continuous pseudomethod maps.

A local map psi acts in the charts of the cycle balls: psi(j, V) takes tangent
vectors V at p_j to tangent vectors at p_{j+1}.  The glued map agrees with psi
on the inner balls of radius rho_in, with f outside the outer balls of radius
rho_out, and interpolates through a smoothstep bump in between:

    linear mode:    Psi = exp_{p_{j+1}}((1 - beta) psi + beta A_j v)
    nonlinear mode: Psi = exp_{p_{j+1}}((1 - beta) psi + beta F_j(v))

with (rho_in, rho_out) = (eps/2, eps) in linear mode and (Cd/2, Cd) in nonlinear mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal

import numpy as np

from .errors import GluingPreconditionError, RemainderBoundError
from .logger_config import logger
from .orbits import PeriodicOrbit, local_conjugate
from .reports import write_summary
from .sampling import PointSampler

LocalMap = Callable[[int, np.ndarray], np.ndarray]
GluingMode = Literal["linear", "nonlinear"]

# relative slack on sampled bounds that hold with equality in exact arithmetic
BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class BumpFunction:
    """C^1 smoothstep profile: 0 up to rho_in, 1 from rho_out on."""
    rho_in: float
    rho_out: float

    def __post_init__(self):
        if not 0.0 <= self.rho_in < self.rho_out:
            raise GluingPreconditionError(f"Bump radii must satisfy 0 <= rho_in < rho_out, got {self.rho_in}, {self.rho_out}")

    def __call__(self, t: np.ndarray) -> np.ndarray:
        u = np.clip((np.asarray(t, dtype=float) - self.rho_in) / (self.rho_out - self.rho_in), 0.0, 1.0)
        return u * u * (3.0 - 2.0 * u)

    @property
    def max_slope(self) -> float:
        return 1.5 / (self.rho_out - self.rho_in)


@dataclass(frozen=True, eq=False)
class GluingSpec:
    orbit: PeriodicOrbit = field(repr=False)
    local_map: LocalMap = field(repr=False)
    mode: GluingMode
    b: float
    d: float
    eps: float | None = None
    C: float | None = None

    @classmethod
    def linear(cls, orbit: PeriodicOrbit, local_map: LocalMap, b: float, d: float, eps: float) -> "GluingSpec":
        return cls(orbit, local_map, "linear", b=b, d=d, eps=eps)

    @classmethod
    def nonlinear(cls, orbit: PeriodicOrbit, local_map: LocalMap, b: float, d: float, C: float) -> "GluingSpec":
        return cls(orbit, local_map, "nonlinear", b=b, d=d, C=C)

    @property
    def rho_in(self) -> float:
        return self.eps / 2.0 if self.mode == "linear" else self.C * self.d / 2.0

    @property
    def rho_out(self) -> float:
        return self.eps if self.mode == "linear" else self.C * self.d

    @property
    def cond1_bound(self) -> float:
        """Allowed deviation of psi from the linearization on the b-balls."""
        return self.d if self.mode == "linear" else self.d / 2.0

    @property
    def bump(self) -> BumpFunction:
        return BumpFunction(self.rho_in, self.rho_out)

    def validate_radii(self) -> None:
        orbit = self.orbit
        if orbit.period != orbit.fundamental_period:
            raise GluingPreconditionError("Gluing needs an orbit whose period equals its fundamental period")
        if not 0.0 < self.b <= orbit.chart_radius:
            raise GluingPreconditionError(f"b = {self.b:.6g} must lie in (0, chart radius {orbit.chart_radius:.6g}]")
        if self.d <= 0.0:
            raise GluingPreconditionError(f"d must be positive, got {self.d}")
        if self.mode == "linear":
            if self.eps is None or not self.eps < self.b / 2.0:
                raise GluingPreconditionError(f"Linear gluing needs eps < b/2 (eps={self.eps}, b={self.b:.6g})")
            if not self.d < self.eps / 2.0:
                raise GluingPreconditionError(f"Linear gluing needs d < eps/2 (d={self.d:.6g}, eps={self.eps:.6g})")
        else:
            if self.C is None or self.C <= 0.0:
                raise GluingPreconditionError(f"Nonlinear gluing needs a positive C, got {self.C}")
            if not self.C * self.d < self.b / 2.0:
                raise GluingPreconditionError(
                    f"Nonlinear gluing needs Cd < b/2 (Cd={self.C * self.d:.6g}, b={self.b:.6g})"
                )


@dataclass(frozen=True)
class Cond1Result:
    passed: bool
    max_deviation: float
    bound: float
    # (ball index, tangent vector, excess) of the worst violation
    witness: tuple[int, np.ndarray, float] | None = None


def _ball_samples(sampler: PointSampler, dim: int, radii: tuple[float, ...], count: int, j: int) -> np.ndarray:
    chunks = [sampler.ball(dim, radii[0], count, salt=50 + j)]
    for i, r in enumerate(radii):
        chunks.append(sampler.sphere(dim, r, count, salt=5000 + 100 * j + i))
    return np.vstack(chunks)


def check_cond1(spec: GluingSpec, sampler: PointSampler, count: int) -> Cond1Result:
    """Sample |psi(j, v) - A_j v| over the b-balls and compare with the cond1 bound."""
    if count < 1:
        raise ValueError("count must be at least 1")
    orbit = spec.orbit
    bound = spec.cond1_bound
    tolerance = bound * (1.0 + BOUND_SLACK)
    worst = 0.0
    witness = None
    for j in range(orbit.period):
        V = _ball_samples(sampler, orbit.dim, (spec.b, spec.rho_in, spec.rho_out), count, j)
        deviation = np.linalg.norm(spec.local_map(j, V) - V @ orbit.jacobian(j).T, axis=-1)
        i = int(np.argmax(deviation))
        if deviation[i] > worst:
            worst = float(deviation[i])
            if worst > tolerance:
                witness = (j, V[i].copy(), worst - bound)
    result = Cond1Result(passed=witness is None, max_deviation=worst, bound=bound, witness=witness)
    logger.debug(f"cond1 check: max deviation {worst:.6e} vs bound {bound:.6e} -> {'pass' if result.passed else 'fail'}")
    return result


@dataclass(frozen=True, eq=False)
class GluedMap:
    """The continuous global map Psi of a validated GluingSpec."""
    spec: GluingSpec = field(repr=False)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        orbit = self.spec.orbit
        space = orbit.space
        bump = self.spec.bump
        out = np.array(orbit.system(X), dtype=float, copy=True)
        for j in range(orbit.period):
            V = space.log(orbit.point(j), X)
            r = np.linalg.norm(V, axis=-1)
            inside = r < bump.rho_out
            if not np.any(inside):
                continue
            Vj = V[inside]
            beta = bump(r[inside])[:, None]
            local = self.spec.local_map(j, Vj)
            if self.spec.mode == "linear":
                target = Vj @ orbit.jacobian(j).T
            else:
                target = space.log(orbit.point(j + 1), out[inside])
            out[inside] = space.exp(orbit.point(j + 1), (1.0 - beta) * local + beta * target)
        return out[0] if single else out


def glue_linear(spec: GluingSpec, sampler: PointSampler | None = None, count: int = 512) -> GluedMap:
    """
    Linear-mode gluing: blend psi into the linearization of a linear system.

    Args:
        spec: Linear-mode GluingSpec with radii eps < b/2 and d < eps/2
        sampler: Sampler for the cond1 check, seeded default when omitted
        count: Sampled points per b-ball

    Returns:
        GluedMap equal to psi on B(eps/2) and to f outside B(eps), defect at most d
    """
    if spec.mode != "linear":
        raise GluingPreconditionError("glue_linear needs a linear-mode GluingSpec")
    spec.validate_radii()
    if not spec.orbit.system.is_linear:
        raise GluingPreconditionError(f"{spec.orbit.system.name} is not linear on the cycle balls; use glue_nonlinear")
    _require_cond1(spec, sampler or PointSampler(), count)
    logger.info(f"Glued linear map: rho_in={spec.rho_in:.6g}, rho_out={spec.rho_out:.6g}, d={spec.d:.6g}")
    return GluedMap(spec)


def glue_nonlinear(spec: GluingSpec, sampler: PointSampler | None = None, count: int = 512) -> GluedMap:
    """Nonlinear-mode gluing: blend psi into F_j itself, defect bound d on the b-balls."""
    if spec.mode != "nonlinear":
        raise GluingPreconditionError("glue_nonlinear needs a nonlinear-mode GluingSpec")
    spec.validate_radii()
    sampler = sampler or PointSampler()
    worst = max_remainder(spec.orbit, spec.rho_out, sampler, count)
    if worst > spec.d / 2.0 * (1.0 + BOUND_SLACK):
        logger.error(f"Remainder {worst:.6e} exceeds d/2 = {spec.d / 2:.6e} on radius Cd")
        raise RemainderBoundError(
            f"sup |phi| = {worst:.6e} on radius Cd = {spec.rho_out:.6e} exceeds d/2 = {spec.d / 2:.6e}; d must shrink"
        )
    _require_cond1(spec, sampler, count)
    logger.info(f"Glued nonlinear map: C={spec.C:g}, rho_in={spec.rho_in:.6g}, rho_out={spec.rho_out:.6g}, d={spec.d:.6g}")
    return GluedMap(spec)


def _require_cond1(spec: GluingSpec, sampler: PointSampler, count: int) -> None:
    result = check_cond1(spec, sampler, count)
    if not result.passed:
        j, v, excess = result.witness
        logger.error(f"cond1 violated on ball {j} at {v.tolist()} by {excess:.3e}")
        raise GluingPreconditionError(f"cond1 violated on ball {j} at v={v.tolist()} (excess {excess:.3e})")


def max_remainder(orbit: PeriodicOrbit, radius: float, sampler: PointSampler, count: int) -> float:
    """Sampled sup of |phi_j(v)| over |v| <= radius and all cycle balls."""
    worst = 0.0
    for j in range(orbit.period):
        V = _ball_samples(sampler, orbit.dim, (radius, radius / 2.0), count, j)
        worst = max(worst, float(np.max(np.linalg.norm(local_conjugate(orbit, j).remainder(V), axis=-1))))
    return worst


# --- Admissible defects ------------------------------------------------------

def admissible_defect_linear(b: float, eps: float) -> float:
    """Supremum of the d accepted by linear-mode gluing; depends on (b, eps) only."""
    if not 0.0 < eps < b / 2.0:
        raise GluingPreconditionError(f"Linear-mode gluing needs 0 < eps < b/2 (eps={eps}, b={b})")
    return eps / 2.0


def admissible_defect_nonlinear(orbit: PeriodicOrbit, b: float, C: float,
                                sampler: PointSampler | None = None, count: int = 512) -> float:
    """
    Largest d (up to halving) accepted by nonlinear-mode gluing for this orbit: Cd < b/2 and
    the sampled remainder stays below d/2 on radius Cd.  Depends on (b, C, system) only.
    """
    if b <= 0.0 or C <= 0.0:
        raise GluingPreconditionError(f"Nonlinear-mode gluing needs positive b and C (b={b}, C={C})")
    sampler = sampler or PointSampler()
    d = b / (2.0 * C) * (1.0 - 1e-9)
    for _ in range(200):
        if max_remainder(orbit, C * d, sampler, count) <= d / 2.0:
            logger.debug(f"Admissible nonlinear defect for b={b:g}, C={C:g}: {d:.6e}")
            return d
        d /= 2.0
    raise RemainderBoundError(f"No admissible d found for b={b}, C={C}")


# --- Random local maps -------------------------------------------------------

def random_local_map(orbit: PeriodicOrbit, bound: float, rng: np.random.Generator) -> LocalMap:
    """
    A smooth psi(j, v) = A_j v + bound*(c_j + s_j sin(omega_j . v + phase_j)) with
    |c_j| + |s_j| < 1, hence |psi - A_j v| < bound on every ball.
    """
    n, m = orbit.dim, orbit.period
    offsets, swings, freqs, phases = [], [], [], []
    for _ in range(m):
        c, s = rng.normal(size=n), rng.normal(size=n)
        split = rng.uniform(0.1, 0.9)
        offsets.append(split * 0.999 * c / np.linalg.norm(c))
        swings.append((1.0 - split) * 0.999 * s / np.linalg.norm(s))
        freqs.append(rng.normal(scale=20.0, size=n))
        phases.append(rng.uniform(0.0, 2.0 * np.pi))
    jacobians = [orbit.jacobian(j) for j in range(m)]

    def psi(j: int, V: np.ndarray) -> np.ndarray:
        V = np.asarray(V, dtype=float)
        wave = np.sin(V @ freqs[j] + phases[j])[..., None]
        return V @ jacobians[j].T + bound * (offsets[j] + wave * swings[j])

    return psi


def linear_local_map(orbit: PeriodicOrbit, offset: np.ndarray | None = None) -> LocalMap:
    """psi(j, v) = A_j v + offset."""
    shift = np.zeros(orbit.dim) if offset is None else np.asarray(offset, dtype=float)

    def psi(j: int, V: np.ndarray) -> np.ndarray:
        return np.asarray(V, dtype=float) @ orbit.jacobian(j).T + shift

    return psi


# --- Reports -----------------------------------------------------------------

@dataclass(frozen=True)
class GluingReport:
    mode: GluingMode
    d: float
    rho_in: float
    rho_out: float
    sample_count: int
    sup_defect: float
    inner_identity_error: float
    outer_identity_error: float
    passed: bool

    def as_fields(self) -> dict:
        return {
            "mode": self.mode,
            "d": self.d,
            "rho_in": self.rho_in,
            "rho_out": self.rho_out,
            "sample_count": self.sample_count,
            "sup_defect": self.sup_defect,
            "inner_identity_error": self.inner_identity_error,
            "outer_identity_error": self.outer_identity_error,
            "passed": self.passed,
        }


def gluing_report(glued: GluedMap, sampler: PointSampler, count: int) -> GluingReport:
    """
    Sampled sup |Psi - f| over a global cover and the ring radii, plus the
    region identities at 0.99 rho_in (Psi = psi) and 1.01 rho_out (Psi = f).
    """
    spec = glued.spec
    orbit = spec.orbit
    space = orbit.space
    rho_in, rho_out = spec.rho_in, spec.rho_out
    ring = (rho_in, 0.5 * (rho_in + rho_out), rho_out)

    global_points = [sampler.cover(space, count)]
    inner_error = outer_error = 0.0
    for j in range(orbit.period):
        p = orbit.point(j)
        global_points.append(space.exp(p, _ball_samples(sampler, orbit.dim, (spec.b, *ring), count, j)))

        X_in = space.exp(p, sampler.sphere(orbit.dim, 0.99 * rho_in, count, salt=7000 + j))
        expected = space.exp(orbit.point(j + 1), spec.local_map(j, space.log(p, X_in)))
        inner_error = max(inner_error, float(np.max(space.dist(glued(X_in), expected))))

        X_out = space.exp(p, sampler.sphere(orbit.dim, 1.01 * rho_out, count, salt=8000 + j))
        outer_error = max(outer_error, float(np.max(space.dist(glued(X_out), orbit.system(X_out)))))

    X = np.vstack(global_points)
    sup_defect = float(np.max(space.dist(glued(X), orbit.system(X))))
    passed = sup_defect <= spec.d + 1e-12 and inner_error <= 1e-15 and outer_error == 0.0
    report = GluingReport(spec.mode, spec.d, rho_in, rho_out, len(X), sup_defect, inner_error, outer_error, passed)
    logger.info(f"Gluing report: sup defect {sup_defect:.6e} (d={spec.d:.6e}), "
                f"identities {inner_error:.1e}/{outer_error:.1e} -> {'PASS' if passed else 'FAIL'}")
    return report


def write_gluing_report(path: str | Path, report: GluingReport, deterministic: bool = True) -> Path:
    return write_summary(path, report.as_fields(), deterministic)
