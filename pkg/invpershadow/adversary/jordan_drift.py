"""
Drift adversary along the last block of a Jordan chain with an isometric diagonal.

H_1 is the real 2l x 2l block with Q = [[cos t, sin t], [-sin t, cos t]] on the
diagonal and identity blocks on the superdiagonal.  The k-th local map adds
(d/2) Q^k w on the coordinates (2l-1, 2l), which Q only rotates, so the drift
accumulates to (kd/2) Q^{k-1} w and every trajectory leaves the 4Ld ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from ..errors import AdversarySpecError
from ..gluing import GluingSpec, glue_nonlinear
from ..logger_config import logger
from ..orbits import PeriodicOrbit
from ..pseudomethod import PseudomethodS, family_method
from ..sampling import PointSampler
from ..systems import linear_system
from .common import TraceRow, chart_trajectory, focus_for

IDENTITY_TOLERANCE = 1e-12
# relative slack on the exit radius; |q_k| = 4Ld up to rounding is not an exit
EXIT_SLACK = 1e-9
# longest exact k-period detected for Q^k w
MAX_DETECTED_PERIOD = 64


@dataclass(frozen=True)
class JordanDriftSpec:
    l: int = 1
    theta: float = math.pi / 2.0
    w: tuple[float, float] = (1.0, 0.0)
    L: int = 10
    r_bar: float = 4.0
    # diagonal entries of an optional hyperbolic block H_2
    tail: tuple[float, ...] = ()

    def __post_init__(self):
        if self.l < 1:
            raise AdversarySpecError(f"Block count l must be positive, got {self.l}")
        if self.L < 1 or int(self.L) != self.L:
            raise AdversarySpecError(f"L must be a positive integer, got {self.L}")
        if len(self.w) != 2 or abs(math.hypot(*self.w) - 1.0) > 1e-12:
            raise AdversarySpecError(f"w must be a two-dimensional unit vector, got {self.w}")
        if any(abs(abs(t) - 1.0) <= 1e-9 for t in self.tail):
            raise AdversarySpecError(f"Tail entries must be hyperbolic, got {self.tail}")
        if self.r_bar <= 0:
            raise AdversarySpecError(f"r_bar must be positive, got {self.r_bar}")

    @property
    def dim(self) -> int:
        return 2 * self.l + len(self.tail)

    @property
    def Q(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, s], [-s, c]])

    @property
    def H1(self) -> np.ndarray:
        H = np.kron(np.eye(self.l), self.Q)
        for i in range(self.l - 1):
            H[2 * i:2 * i + 2, 2 * i + 2:2 * i + 4] = np.eye(2)
        return H

    @property
    def matrix(self) -> np.ndarray:
        return block_diag(self.H1, np.diag(self.tail)) if self.tail else self.H1

    @property
    def C(self) -> float:
        return 20.0 * self.L

    @property
    def drift_slice(self) -> slice:
        """Zero-based coordinates (2l-2, 2l-1) of the last Jordan block."""
        return slice(2 * self.l - 2, 2 * self.l)

    def max_d(self) -> float:
        return self.r_bar / (200.0 * self.L)

    def rotated_w(self, k: int) -> np.ndarray:
        return np.linalg.matrix_power(self.Q, k) @ np.asarray(self.w, dtype=float)

    def method_period(self) -> int:
        """Smallest P with Q^P w = w, or 20L + 1 maps when Q has no short period."""
        w = np.asarray(self.w, dtype=float)
        for P in range(1, MAX_DETECTED_PERIOD + 1):
            if np.allclose(self.rotated_w(P), w, rtol=0.0, atol=1e-12):
                return P
        return 20 * self.L + 1

    def as_fields(self) -> dict:
        return {"lemma": 3, "l": self.l, "theta": self.theta, "w": self.w, "L": self.L,
                "r_bar": self.r_bar, "tail": self.tail, "C": self.C}


def build_lemma3_model(spec: JordanDriftSpec) -> PeriodicOrbit:
    """The linear map A = blockdiag(H_1, H_2) of Euclidean space with its fixed point 0."""
    system = linear_system(spec.matrix, name=f"jordan(l={spec.l}, theta={spec.theta:.6g})")
    return PeriodicOrbit.from_base(system, np.zeros(spec.dim), 1)


def build_lemma3_adversary(spec: JordanDriftSpec, d: float, orbit: PeriodicOrbit | None = None,
                           sampler: PointSampler | None = None, count: int = 128) -> PseudomethodS:
    """Glued maps Phi_k that equal psi_k(y) = Ay + (d/2) Q^k w on B(10Ld) and F outside B(20Ld)."""
    if not 20.0 * spec.L * d < spec.r_bar / 10.0:
        raise AdversarySpecError(f"Need 20Ld < r_bar/10 (20Ld = {20 * spec.L * d:.6g}, r_bar/10 = {spec.r_bar / 10:.6g})")
    orbit = orbit or build_lemma3_model(spec)
    A = spec.matrix
    sl = spec.drift_slice
    maps = []
    for k in range(spec.method_period()):
        drift = np.zeros(spec.dim)
        drift[sl] = 0.5 * d * spec.rotated_w(k)

        def psi(j, V, drift=drift):
            return np.asarray(V, dtype=float) @ A.T + drift

        maps.append(glue_nonlinear(GluingSpec.nonlinear(orbit, psi, b=spec.r_bar, d=d, C=spec.C), sampler, count))
    logger.info(f"Built Jordan drift adversary: l={spec.l}, theta={spec.theta:.6g}, L={spec.L}, "
                f"d={d:.6g}, {len(maps)} maps")
    rho_in = spec.C * d / 2.0
    return family_method(orbit.system, maps, claimed_defect=2.0 * d, name="jordan-drift",
                         focus=focus_for(orbit, rho_in, 2.0 * rho_in))


@dataclass(frozen=True)
class Lemma3Report:
    d: float
    exit_radius: float
    horizon: int
    exit_step_zero: int
    max_exit_step: int
    trials: int
    exited: int
    identity_error: float
    lower_bound_violations: int
    passed: bool
    trace: tuple[TraceRow, ...] = field(repr=False, default=())

    def as_fields(self) -> dict:
        return {"d": self.d, "exit_radius": self.exit_radius, "horizon": self.horizon,
                "exit_step_zero": self.exit_step_zero, "max_exit_step": self.max_exit_step,
                "trials": self.trials, "exited": self.exited, "identity_error": self.identity_error,
                "lower_bound_violations": self.lower_bound_violations, "passed": self.passed}


def adversarial_start(spec: JordanDriftSpec, d: float) -> np.ndarray:
    """|q| = 4Ld with Q pr q = -4Ld w, which delays the exit the longest."""
    q = np.zeros(spec.dim)
    q[spec.drift_slice] = -4.0 * spec.L * d * (spec.Q.T @ np.asarray(spec.w, dtype=float))
    return q


def verify_lemma3_divergence(adversary: PseudomethodS, spec: JordanDriftSpec, d: float,
                             trials: int = 100, orbit: PeriodicOrbit | None = None,
                             sampler: PointSampler | None = None) -> Lemma3Report:
    """
    Compose the glued maps from q = 0, the adversarial start and `trials` samples
    of the 4Ld ball; check pr q_k = Q^k pr q + (kd/2) Q^{k-1} w inside the 10Ld
    region and report the first step where |q_k| > 4Ld.
    """
    orbit = orbit or build_lemma3_model(spec)
    sampler = sampler or PointSampler()
    L = spec.L
    radius = 4.0 * L * d
    horizon = 20 * L
    sl = spec.drift_slice

    starts = np.vstack([np.zeros(spec.dim), adversarial_start(spec, d),
                        sampler.ball(spec.dim, radius, trials, salt=31)])
    traj = chart_trajectory(adversary, orbit, starts, horizon)
    norms = np.linalg.norm(traj, axis=-1)
    inner = np.maximum.accumulate(norms, axis=0) < spec.C * d / 2.0

    pr0 = starts[:, sl]
    Q = spec.Q
    w = np.asarray(spec.w, dtype=float)
    identity_error = 0.0
    violations = 0
    trace = []
    for k in range(horizon + 1):
        Qk = np.linalg.matrix_power(Q, k)
        drift = 0.5 * k * d * (np.linalg.matrix_power(Q, k - 1) @ w) if k else np.zeros(2)
        expected = pr0 @ Qk.T + drift
        pr = traj[k][:, sl]
        if np.any(inner[k]):
            identity_error = max(identity_error, float(np.max(np.linalg.norm(pr - expected, axis=-1)[inner[k]])))
        pr_norm = np.linalg.norm(pr, axis=-1)
        lower = 0.5 * k * d - np.linalg.norm(pr0, axis=-1)
        violations += int(np.sum(inner[k] & (pr_norm < lower - 1e-15)))
        trace.append(TraceRow(k, float(pr_norm[0]), float(lower[0]), bool(inner[k, 0])))

    outside = norms[1:] > radius * (1.0 + EXIT_SLACK)
    exit_steps = np.where(outside.any(axis=0), outside.argmax(axis=0) + 1, -1)
    exited = int(np.sum(exit_steps > 0))
    passed = exited == len(starts) and identity_error <= IDENTITY_TOLERANCE and violations == 0
    logger.info(f"Jordan drift verification: exit from 0 at step {exit_steps[0]}, latest exit "
                f"{int(exit_steps.max())} <= {horizon}, identity error {identity_error:.2e} -> {'PASS' if passed else 'FAIL'}")
    return Lemma3Report(d, radius, horizon, int(exit_steps[0]), int(exit_steps.max()), len(starts), exited,
                        identity_error, violations, passed, tuple(trace))
