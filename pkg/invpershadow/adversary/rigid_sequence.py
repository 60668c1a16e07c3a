"""
Push-through adversary at a hyperbolic periodic orbit.

From a unit vector e_0 in U(p) the sequence a_0 = tau, a_{i+1} = a_i |A_i e_i| - 1,
e_{i+1} = A_i e_i / |A_i e_i| with a_m = 0 defines w_i = a_i e_i on the first
period, followed by w_m = B^{-n} tau e_0 and n periods of the linear flow back
to w_0.  The glued maps carry w_0 d through {w_k d} exactly, and any other
start separates from it at the hyperbolic rate, so the only shadowing
trajectory has |w_k| d on the orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import AdversarySpecError, BackwardGenerationError
from ..gluing import GluingSpec, admissible_defect_nonlinear, glue_nonlinear
from ..logger_config import logger
from ..orbits import PeriodicOrbit, local_conjugate
from ..pseudomethod import PseudomethodS, family_method, preimage
from ..sampling import PointSampler
from ..shadowing import HyperbolicSplitting, compute_splitting
from .common import TraceRow, chart_trajectory, focus_for

UNSTABLE_ANGLE_TOLERANCE = 1e-8
PUSH_THROUGH_TOLERANCE = 1e-10
MAX_BACKWARD_PERIODS = 10_000


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Lemma4Sequence:
    orbit: PeriodicOrbit = field(repr=False)
    splitting: HyperbolicSplitting = field(repr=False)
    e: np.ndarray = field(repr=False)         # e_0..e_m
    stretches: np.ndarray = field(repr=False)  # |A_i e_i|, i < m
    a: np.ndarray = field(repr=False)          # a_0..a_m
    tau: float
    n: int
    w: np.ndarray = field(repr=False)          # w_0..w_{m(n+1)}, last equals w_0
    N: float
    L: int
    eps1: float
    eps2: float

    @property
    def period(self) -> int:
        return self.orbit.period

    @property
    def method_period(self) -> int:
        return self.orbit.period * (self.n + 1)

    @property
    def B(self) -> np.ndarray:
        return self.orbit.monodromy()

    def w_at(self, k: int) -> np.ndarray:
        return self.w[k % self.method_period]

    @property
    def default_d(self) -> float:
        return self.eps2 / (400.0 * self.N)

    def as_fields(self) -> dict:
        return {"lemma": 4, "period": self.period, "tau": self.tau, "n": self.n, "N": self.N, "L": self.L,
                "eps1": self.eps1, "eps2": self.eps2, "a_m": float(self.a[-1]),
                "max_a": float(np.max(np.abs(self.a[:-1])))}


def closed_form_tau(stretches: np.ndarray) -> float:
    """tau = (1 + sum_{j=1}^{m-1} prod_{i=j}^{m-1} s_i) / prod_{i=0}^{m-1} s_i."""
    m = len(stretches)
    numerator = 1.0 + sum(math.prod(stretches[j:]) for j in range(1, m))
    return numerator / math.prod(stretches)


def build_lemma4_sequence(orbit: PeriodicOrbit, e0: np.ndarray | None = None, L: int = 1,
                          splitting: HyperbolicSplitting | None = None) -> Lemma4Sequence:
    splitting = splitting or compute_splitting(orbit)
    m = orbit.period
    U0 = splitting.unstable[0]
    if U0.shape[1] == 0:
        raise AdversarySpecError("The orbit has a trivial unstable subspace")
    if e0 is None:
        e0 = _dominant_unstable_direction(orbit, U0)
    e0 = np.asarray(e0, dtype=float)
    if abs(np.linalg.norm(e0) - 1.0) > 1e-12:
        raise AdversarySpecError(f"e_0 must be a unit vector, |e_0| = {np.linalg.norm(e0)!r}")
    off_subspace = float(np.linalg.norm(e0 - U0 @ (U0.T @ e0)))
    if off_subspace > UNSTABLE_ANGLE_TOLERANCE:
        raise AdversarySpecError(f"e_0 is not in U(p): angle {off_subspace:.3e}")

    e = [e0]
    stretches = []
    for i in range(m):
        image = orbit.jacobian(i) @ e[-1]
        stretches.append(float(np.linalg.norm(image)))
        e.append(image / stretches[-1])
    tau = closed_form_tau(np.array(stretches))
    a = [tau]
    for i in range(m):
        a.append(a[-1] * stretches[i] - 1.0)

    B = orbit.monodromy()
    n, pulled = 1, np.linalg.solve(B, tau * e0)
    while np.linalg.norm(pulled) >= 1.0:
        n += 1
        pulled = np.linalg.solve(B, pulled)
        if n > MAX_BACKWARD_PERIODS:
            raise AdversarySpecError("B^{-n} tau e_0 does not contract; e_0 is not unstable")

    w = [a[i] * e[i] for i in range(m)]
    w.append(pulled)
    for i in range(m * n):
        w.append(orbit.jacobian(i) @ w[-1])

    N = float(max(math.floor(max(np.linalg.norm(v) for v in w)) + 1, 20 * L + 1))
    eps1 = orbit.chart_radius
    eps2 = eps1 / max(1.0, max(float(np.linalg.norm(orbit.jacobian(j), 2)) for j in range(m)))
    logger.info(f"Push-through sequence: m={m}, tau={tau:.12g}, n={n}, N={N:g}, a_m={a[-1]:.3e}")
    return Lemma4Sequence(orbit, splitting, _frozen(e), _frozen(stretches), _frozen(a), tau, n,
                          _frozen(w), N, int(L), float(eps1), float(eps2))


def _dominant_unstable_direction(orbit: PeriodicOrbit, U0: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eig(orbit.monodromy())
    i = int(np.argmax(np.abs(values)))
    if abs(values[i].imag) < 1e-12:
        v = np.real(vectors[:, i])
    else:
        v = U0[:, 0]
    return v / np.linalg.norm(v)


def lemma4_local_map(seq: Lemma4Sequence, k: int, d: float):
    """psi_k in the charts: the push-through maps on ball k mod m, F_l on the others."""
    orbit = seq.orbit
    m = seq.period
    active = k % m
    if k < m - 1:
        shift = -d * seq.e[k + 1]
    elif k == m - 1:
        shift = -d * seq.e[m] + d * seq.w[m]
    else:
        shift = np.zeros(orbit.dim)

    def psi(j, V):
        V = np.asarray(V, dtype=float)
        if j == active:
            return V @ orbit.jacobian(j).T + shift
        return local_conjugate(orbit, j)(V)

    return psi


def build_lemma4_adversary(seq: Lemma4Sequence, d: float | None = None,
                           sampler: PointSampler | None = None, count: int = 256) -> PseudomethodS:
    """
    Glued maps Phi_k, k = 0..m(n+1)-1, with defect budget 4d and C = 25N, so that
    Phi_k = psi_k on B(50Nd) and Phi_k = F outside B(100Nd).
    """
    d = seq.default_d if d is None else d
    if not 200.0 * seq.N * d < seq.eps2:
        raise AdversarySpecError(f"Need 200Nd < eps2 (200Nd = {200 * seq.N * d:.6g}, eps2 = {seq.eps2:.6g})")
    budget, C = 4.0 * d, 25.0 * seq.N
    admissible = admissible_defect_nonlinear(seq.orbit, seq.eps2, C, sampler)
    if not budget <= admissible:
        raise AdversarySpecError(f"Defect budget 4d = {budget:.6g} exceeds the admissible {admissible:.6g}")
    maps = [
        glue_nonlinear(GluingSpec.nonlinear(seq.orbit, lemma4_local_map(seq, k, d), b=seq.eps2, d=budget, C=C),
                       sampler, count)
        for k in range(seq.method_period)
    ]
    logger.info(f"Built push-through adversary: period {seq.method_period}, d = {d:.6g}")
    return family_method(seq.orbit.system, maps, claimed_defect=8.0 * d, name="push-through",
                         focus=focus_for(seq.orbit, 50.0 * seq.N * d, 100.0 * seq.N * d))


@dataclass(frozen=True)
class Lemma4Report:
    d: float
    a_m: float
    min_a: float
    push_through_error: float
    backward_error: float
    composed_form_error: float
    forward_trials: int
    forward_exits: int
    backward_trials: int
    backward_exits: int
    surviving_max_norm: float
    max_a: float
    witness: bool
    passed: bool
    trace: tuple[TraceRow, ...] = field(repr=False, default=())

    def as_fields(self) -> dict:
        return {"d": self.d, "a_m": self.a_m, "min_a": self.min_a,
                "push_through_error": self.push_through_error, "backward_error": self.backward_error,
                "composed_form_error": self.composed_form_error,
                "forward_exits": f"{self.forward_exits}/{self.forward_trials}",
                "backward_exits": f"{self.backward_exits}/{self.backward_trials}",
                "surviving_max_norm": self.surviving_max_norm, "max_a": self.max_a,
                "witness": self.witness, "passed": self.passed}


def _backward_chart_trajectory(method: PseudomethodS, orbit: PeriodicOrbit, q: np.ndarray,
                               steps: int, stop_norm: float | None = None) -> list[np.ndarray]:
    """v_0, v_{-1}, ... by inverting Psi_{-1}, Psi_{-2}, ...; stops after the first |v| > stop_norm."""
    space = orbit.space
    x = space.exp(orbit.point(0), q)
    out = [space.log(orbit.point(0), x)]
    for k in range(-1, -steps - 1, -1):
        x = preimage(method, k, x)
        out.append(space.log(orbit.point(k), x))
        if stop_norm is not None and np.linalg.norm(out[-1]) > stop_norm:
            break
    return out


def exit_horizon(seq: Lemma4Sequence, delta: float, d: float, backward: bool = False) -> int:
    """Periods until a deviation delta along the extremal direction exceeds 2Nd."""
    moduli = np.abs(np.linalg.eigvals(seq.B))
    rate = 1.0 / float(np.min(moduli)) if backward else float(np.max(moduli))
    return math.ceil(math.log(2.0 * seq.N * d / delta) / math.log(rate))


def verify_lemma4_rigidity(adversary: PseudomethodS, seq: Lemma4Sequence, d: float, trials: int = 20,
                           delta: float = 1e-8, sampler: PointSampler | None = None) -> Lemma4Report:
    """
    Check the push-through identities, the composed form A_{k-1}...A_0(q - w_0 d) + w_k d
    on sampled starts, and that every start other than w_0 d separates by more
    than 2Nd forwards (unstable offsets) or backwards (stable offsets).
    """
    orbit = seq.orbit
    sampler = sampler or PointSampler()
    m, P, N = seq.period, seq.method_period, seq.N
    splitting = seq.splitting
    w0d = seq.w[0] * d
    inner = 50.0 * N * d
    exit_norm = 2.0 * N * d

    forward = chart_trajectory(adversary, orbit, w0d, P)[:, 0, :]
    push_error = max(float(np.linalg.norm(forward[k] - seq.w_at(k) * d)) for k in range(P + 1))
    try:
        backward = _backward_chart_trajectory(adversary, orbit, w0d, P)
        back_error = max(float(np.linalg.norm(backward[k] - seq.w_at(-k) * d)) for k in range(P + 1))
    except BackwardGenerationError as e:
        logger.error(f"Backward push-through failed: {e}")
        back_error = float("inf")

    # generic offsets in the 16Ld ball
    offsets = sampler.ball(orbit.dim, 16.0 * seq.L * d, trials, salt=41)
    s_dim = splitting.stable_dim
    u_dir = seq.e[0]
    rate = float(np.max(np.abs(np.linalg.eigvals(seq.B))))
    smallest_unstable = min(float(np.linalg.norm(_unstable_part(splitting, o))) for o in offsets)
    horizon = m * (math.ceil(math.log(4.0 * N * d / max(min(smallest_unstable, delta), 1e-300)) / math.log(rate)) + 2)
    starts = np.vstack([w0d + delta * u_dir, w0d + offsets])
    traj = chart_trajectory(adversary, orbit, starts, horizon)
    deviation = np.linalg.norm(traj - np.array([seq.w_at(k) * d for k in range(horizon + 1)])[:, None, :], axis=-1)
    inside = np.maximum.accumulate(np.linalg.norm(traj, axis=-1), axis=0) < inner

    composed_error = 0.0
    linear = np.eye(orbit.dim)
    for k in range(horizon + 1):
        if k:
            linear = orbit.jacobian(k - 1) @ linear
        predicted = (starts - w0d) @ linear.T + seq.w_at(k) * d
        mask = inside[k]
        if np.any(mask):
            composed_error = max(composed_error, float(np.max(np.linalg.norm(traj[k] - predicted, axis=-1)[mask])))
    forward_exits = int(np.sum((deviation > exit_norm).any(axis=0)))

    # stable-side offsets separate backwards
    backward_exits = 0
    backward_trials = 0
    if s_dim:
        stable_dirs = sampler.unit_vectors(s_dim, max(1, trials // 4), salt=43) @ splitting.stable[0].T
        back_horizon = m * (exit_horizon(seq, 8.0 * seq.L * d, d, backward=True) + 2)
        for direction in stable_dirs:
            backward_trials += 1
            try:
                path = _backward_chart_trajectory(adversary, orbit, w0d + 8.0 * seq.L * d * direction,
                                                  back_horizon, stop_norm=exit_norm + N * d)
            except BackwardGenerationError as e:
                logger.warning(f"Backward composition stopped: {e}")
                continue
            if any(np.linalg.norm(v - seq.w_at(-k) * d) > exit_norm for k, v in enumerate(path)):
                backward_exits += 1

    surviving = max(float(np.linalg.norm(v)) for v in forward)
    max_a = float(np.max(np.abs(seq.a[:-1])))
    witness = max_a > 16.0 * seq.L

    trace = tuple(
        TraceRow(k, float(deviation[k, 0]), float(delta * np.linalg.norm(orbit.jacobian_product(0, k) @ u_dir)),
                 bool(inside[k, 0]))
        for k in range(horizon + 1)
    )
    a_m_ok = abs(seq.a[-1]) <= 1e-10 * max(1.0, seq.tau)
    passed = (
        a_m_ok and bool(np.all(seq.a[:-1] > 0))
        and push_error <= PUSH_THROUGH_TOLERANCE and back_error <= PUSH_THROUGH_TOLERANCE
        and composed_error <= PUSH_THROUGH_TOLERANCE
        and forward_exits == len(starts) and backward_exits == backward_trials
        and surviving <= N * d
    )
    logger.info(f"Push-through verification: a_m={seq.a[-1]:.2e}, push error {push_error:.2e}, "
                f"forward exits {forward_exits}/{len(starts)}, backward exits {backward_exits}/{backward_trials}, "
                f"max |a_k| = {max_a:.4g} -> {'PASS' if passed else 'FAIL'}")
    return Lemma4Report(d, float(seq.a[-1]), float(np.min(seq.a[:-1])), push_error, back_error, composed_error,
                        len(starts), forward_exits, backward_trials, backward_exits, surviving, max_a,
                        witness, passed, trace)


def _unstable_part(splitting: HyperbolicSplitting, v: np.ndarray) -> np.ndarray:
    coords = np.linalg.solve(splitting.basis(0), v)
    return splitting.unstable[0] @ coords[splitting.stable_dim:]