"""
Drift adversary along a modulus-one rotation block.

The model carries the cycle p_0 -> ... -> p_{m-1} -> p_0 with Jacobians
A_j = blockdiag(r_j Rot(chi), B_j), r_0 ... r_{m-1} = 1 and cos(nu chi) = 1,
so Dh^m(p_0) has a root of unity of degree nu on the rotation plane.  The
k-th map adds a rotating drift of size d r_0...r_k / (2 R^m) on the active
ball; over one super-period m nu the rotation returns to the identity and the
drifts telescope into a straight push of m nu d / (2 R^m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import AdversarySpecError
from ..gluing import GluingSpec, glue_linear
from ..logger_config import logger
from ..orbits import PeriodicOrbit
from ..pseudomethod import PseudomethodS, family_method
from ..sampling import PointSampler
from ..systems import DiscreteSystem, cycle_model
from .common import TraceRow, chart_trajectory, focus_for

SPEC_TOLERANCE = 1e-14
IDENTITY_TOLERANCE = 1e-10


def rotation(chi: float) -> np.ndarray:
    c, s = math.cos(chi), math.sin(chi)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class RotationDriftSpec:
    m: int = 1
    nu: int = 1
    chi: float = 2.0 * math.pi
    radii: tuple[float, ...] = (1.0,)
    # one scalar bottom block per cycle point, or none
    bottom: tuple[float, ...] = ()
    # chart scale a; the gluing ball is a / max |A_j|
    a: float = 1.0
    spacing: float = 10.0

    def __post_init__(self):
        if self.m < 1 or self.nu < 1:
            raise AdversarySpecError(f"m and nu must be positive, got m={self.m}, nu={self.nu}")
        if len(self.radii) != self.m or any(r <= 0 for r in self.radii):
            raise AdversarySpecError(f"Need {self.m} positive radius factors, got {self.radii}")
        if abs(math.prod(self.radii) - 1.0) > SPEC_TOLERANCE:
            raise AdversarySpecError(f"Radius factors must multiply to 1, got {math.prod(self.radii)!r}")
        if abs(math.cos(self.nu * self.chi) - 1.0) > SPEC_TOLERANCE:
            raise AdversarySpecError(f"cos(nu*chi) must equal 1, got {math.cos(self.nu * self.chi)!r}")
        if self.bottom and len(self.bottom) != self.m:
            raise AdversarySpecError(f"Need {self.m} bottom factors or none, got {self.bottom}")
        if any(b == 0 for b in self.bottom):
            raise AdversarySpecError("Bottom blocks must be invertible")
        if self.a <= 0 or (self.m > 1 and self.a > self.spacing / 2.0):
            raise AdversarySpecError(f"Chart scale a={self.a} must lie in (0, spacing/2]")

    @property
    def dim(self) -> int:
        return 2 + (1 if self.bottom else 0)

    @property
    def R(self) -> float:
        return 2.0 * max(self.radii)

    def matrix(self, j: int) -> np.ndarray:
        A = np.zeros((self.dim, self.dim))
        A[:2, :2] = self.radii[j % self.m] * rotation(self.chi)
        if self.bottom:
            A[2, 2] = self.bottom[j % self.m]
        return A

    @property
    def a_bar(self) -> float:
        return self.a / max(float(np.linalg.norm(self.matrix(j), 2)) for j in range(self.m))

    @property
    def eps0(self) -> float:
        return self.a_bar / 3.0

    @property
    def eps(self) -> float:
        return self.eps0 / 10.0

    @property
    def super_period(self) -> int:
        return self.m * self.nu

    @property
    def default_d(self) -> float:
        return self.eps / (6.0 * self.super_period)

    def radius_product(self, k: int) -> float:
        """r_0 r_1 ... r_k with indices mod m; 1 for k = -1."""
        return math.prod(self.radii[i % self.m] for i in range(k + 1))

    def drift(self, k: int, d: float) -> np.ndarray:
        v = np.zeros(self.dim)
        scale = d * self.radius_product(k) / (2.0 * self.R ** self.m)
        v[0], v[1] = scale * math.cos((k + 1) * self.chi), scale * math.sin((k + 1) * self.chi)
        return v

    def as_fields(self) -> dict:
        return {"lemma": 2, "m": self.m, "nu": self.nu, "chi": self.chi, "radii": self.radii,
                "bottom": self.bottom, "a": self.a, "R": self.R, "a_bar": self.a_bar,
                "eps0": self.eps0, "eps": self.eps}


@dataclass(frozen=True, eq=False)
class Lemma2Model:
    spec: RotationDriftSpec
    system: DiscreteSystem = field(repr=False)
    orbit: PeriodicOrbit = field(repr=False)


def build_lemma2_model(spec: RotationDriftSpec) -> Lemma2Model:
    """Piecewise-affine model whose local conjugates are the block maps A_j."""
    points = np.zeros((spec.m, spec.dim))
    points[:, 0] = spec.spacing * np.arange(spec.m)
    system = cycle_model(points, [spec.matrix(j) for j in range(spec.m)])
    orbit = PeriodicOrbit.from_base(system, points[0], spec.m)
    top = orbit.monodromy()[:2, :2]
    logger.info(f"Rotation model: m={spec.m}, nu={spec.nu}, chi={spec.chi:.6g}, "
                f"rotation-plane moduli {np.abs(np.linalg.eigvals(top)).tolist()}")
    return Lemma2Model(spec, system, orbit)


def build_lemma2_adversary(model: Lemma2Model, d: float | None = None,
                           sampler: PointSampler | None = None, count: int = 256) -> PseudomethodS:
    """Glued maps Psi_k, k = 0..m nu - 1, drifting on the ball k mod m."""
    spec, orbit = model.spec, model.orbit
    d = spec.default_d if d is None else d
    if not spec.super_period * d < spec.eps / 3.0:
        raise AdversarySpecError(f"Need m*nu*d < eps/3 (m*nu*d = {spec.super_period * d:.6g}, eps/3 = {spec.eps / 3:.6g})")
    maps = []
    for k in range(spec.super_period):
        active, drift = k % spec.m, spec.drift(k, d)

        def psi(j, V, active=active, drift=drift):
            image = np.asarray(V, dtype=float) @ spec.matrix(j).T
            return image + drift if j == active else image

        maps.append(glue_linear(GluingSpec.linear(orbit, psi, b=spec.a_bar, d=d, eps=spec.eps0), sampler, count))
    logger.info(f"Built rotation drift adversary: period {spec.super_period}, d = {d:.6g}")
    return family_method(model.system, maps, claimed_defect=2.0 * d, name="rotation-drift",
                         focus=focus_for(orbit, spec.eps0 / 2.0, spec.eps0))


@dataclass(frozen=True)
class Lemma2Report:
    d: float
    drift_per_cycle: float
    threshold: float
    predicted_cycle: int
    observed_cycle: int
    identity_error: float
    trials: int
    exited: int
    within_one_cycle: int
    left_inner_early: int
    passed: bool
    trace: tuple[TraceRow, ...] = field(repr=False, default=())

    def as_fields(self) -> dict:
        return {"d": self.d, "drift_per_cycle": self.drift_per_cycle, "threshold": self.threshold,
                "predicted_cycle": self.predicted_cycle, "observed_cycle": self.observed_cycle,
                "identity_error": self.identity_error, "trials": self.trials, "exited": self.exited,
                "within_one_cycle": self.within_one_cycle, "left_inner_early": self.left_inner_early,
                "passed": self.passed}


def _first_cycle_above(norms: np.ndarray, threshold: float) -> int:
    """First cycle index k >= 1 with norms[k] > threshold, -1 if none."""
    hits = np.nonzero(norms[1:] > threshold)[0]
    return int(hits[0]) + 1 if hits.size else -1


def verify_lemma2_divergence(adversary: PseudomethodS, model: Lemma2Model, d: float,
                             trials: int = 100, sampler: PointSampler | None = None) -> Lemma2Report:
    """
    Compose the glued maps from q = 0 and from sampled |q| <= 2 eps, compare the
    rotation-plane component with z_K = P_{K-1} e^{iK chi}(q_12 + K c), c = d/(2R^m),
    and locate the first super-period where it exceeds 3 eps.
    """
    spec, orbit = model.spec, model.orbit
    sampler = sampler or PointSampler()
    period = spec.super_period
    c = d / (2.0 * spec.R ** spec.m)
    threshold = 3.0 * spec.eps
    cycles = math.ceil(5.0 * spec.eps / (period * c)) + 2
    steps = cycles * period

    starts = np.vstack([np.zeros(spec.dim), sampler.ball(spec.dim, 2.0 * spec.eps, trials, salt=21)])
    traj = chart_trajectory(adversary, orbit, starts, steps)
    norms = np.linalg.norm(traj, axis=-1)
    inner = np.maximum.accumulate(norms, axis=0) < spec.eps0 / 2.0

    z = traj[..., 0] + 1j * traj[..., 1]
    q12 = z[0]
    K = np.arange(steps + 1)
    products = np.array([spec.radius_product(k - 1) for k in K])
    closed = products[:, None] * np.exp(1j * K * spec.chi)[:, None] * (q12[None, :] + K[:, None] * c)
    identity_error = float(np.max(np.abs(z - closed)[inner], initial=0.0))

    boundary = np.abs(z[::period])
    predicted_norms = np.abs(q12[None, :] + (np.arange(cycles + 1) * period * c)[:, None])
    exited = within = left_early = 0
    observed0 = predicted0 = -1
    for i in range(len(starts)):
        observed = _first_cycle_above(boundary[:, i], threshold)
        predicted = _first_cycle_above(predicted_norms[:, i], threshold)
        if i == 0:
            observed0, predicted0 = observed, predicted
        if observed < 0:
            continue
        exited += 1
        within += abs(observed - predicted) <= 1
        left_early += not bool(inner[observed * period - 1, i])

    trace = tuple(
        TraceRow(int(k), float(abs(z[k, 0])), float(products[k] * k * c), bool(inner[k, 0]))
        for k in range(steps + 1)
    )
    total = len(starts)
    passed = identity_error <= IDENTITY_TOLERANCE and exited == total and within == total
    if left_early:
        logger.warning(f"{left_early} trajectories left the inner gluing region before crossing 3*eps")
    logger.info(f"Rotation drift verification: predicted cycle {predicted0}, observed {observed0}, "
                f"identity error {identity_error:.2e}, exited {exited}/{total} -> {'PASS' if passed else 'FAIL'}")
    return Lemma2Report(d, period * c, threshold, predicted0, observed0, identity_error, total, exited,
                        within, left_early, passed, trace)
