"""
Hyperbolic splittings along periodic orbits and the Perron shadowing solver.

Given a hyperbolic periodic orbit and a k-periodic d-pseudomethod, the solver
writes x_k = exp_{p_k}(v_k) and solves v_{k+1} = A_k v_k + g_k(v_k) for a
periodic sequence {v_k} over a window W.  The linear part is inverted by the
Perron operator in splitting coordinates: stable components are accumulated
forward, unstable components backward, each with exact periodic closure.
The nonlinear part is handled by fixed-point iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, Field
from scipy.linalg import schur, subspace_angles

from . import config
from .errors import ChartDomainError, NonConvergenceError, NonhyperbolicOrbitError
from .logger_config import logger
from .orbits import PeriodicOrbit
from .pseudomethod import PseudomethodS, Pseudotrajectory, shadowing_distance
from .sampling import PointSampler

HYPERBOLICITY_TOLERANCE = 1e-9
CLUSTER_TOLERANCE = 1e-6
RESIDUAL_TOLERANCE = 1e-12


# --- Classification ----------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    hyperbolic: bool
    moduli: tuple[float, ...]
    witness_modulus: float | None = None


def clustered_moduli(eigenvalues: np.ndarray) -> np.ndarray:
    """
    Eigenvalue moduli with each cluster of nearly equal eigenvalues replaced by
    the geometric mean of its moduli, which is stable under the splitting of
    defective eigenvalues by rounding.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    clusters: list[list[int]] = []
    for i, z in enumerate(eigenvalues):
        for cluster in clusters:
            if any(abs(z - eigenvalues[j]) < CLUSTER_TOLERANCE for j in cluster):
                cluster.append(i)
                break
        else:
            clusters.append([i])
    moduli = np.abs(eigenvalues)
    out = np.empty(len(eigenvalues))
    for cluster in clusters:
        out[cluster] = math.exp(float(np.mean(np.log(moduli[cluster]))))
    return out


def classify_periodic_point(orbit: PeriodicOrbit) -> Classification:
    """Hyperbolic iff no eigenvalue of B = A_{m-1}...A_0 has modulus within 1e-9 of 1."""
    moduli = np.sort(clustered_moduli(np.linalg.eigvals(orbit.monodromy())))
    gaps = np.abs(moduli - 1.0)
    i = int(np.argmin(gaps))
    if gaps[i] <= HYPERBOLICITY_TOLERANCE:
        logger.info(f"Orbit of period {orbit.period} is nonhyperbolic (modulus {moduli[i]:.12g})")
        return Classification(False, tuple(float(x) for x in moduli), float(moduli[i]))
    return Classification(True, tuple(float(x) for x in moduli))


# --- Splitting ---------------------------------------------------------------

def _orthonormal(M: np.ndarray) -> np.ndarray:
    if M.shape[1] == 0:
        return M
    q, _ = np.linalg.qr(M)
    return q


@dataclass(frozen=True, eq=False)
class HyperbolicSplitting:
    orbit: PeriodicOrbit = field(repr=False)
    stable: tuple[np.ndarray, ...] = field(repr=False)
    unstable: tuple[np.ndarray, ...] = field(repr=False)
    C: float
    lam: float

    @property
    def stable_dim(self) -> int:
        return self.stable[0].shape[1]

    def basis(self, k: int) -> np.ndarray:
        """E_k = [S(p_k) U(p_k)], columns orthonormal within each block."""
        k %= self.orbit.period
        return np.hstack([self.stable[k], self.unstable[k]])

    def span_margin(self) -> float:
        """Smallest singular value of E_k over the orbit."""
        return min(float(np.linalg.svd(self.basis(k), compute_uv=False)[-1]) for k in range(self.orbit.period))

    def invariance_error(self) -> float:
        """Largest subspace angle between A_k S(p_k) and S(p_{k+1}), and likewise for U."""
        worst = 0.0
        for k in range(self.orbit.period):
            A = self.orbit.jacobian(k)
            k1 = (k + 1) % self.orbit.period
            for bases in (self.stable, self.unstable):
                if bases[k].shape[1]:
                    worst = max(worst, float(np.max(subspace_angles(A @ bases[k], bases[k1]))))
        return worst


def _fit_constant(orbit: PeriodicOrbit, S0: np.ndarray, U0: np.ndarray, lam: float, horizon: int) -> float:
    worst = 1.0
    for j in range(horizon + 1):
        scale = lam ** j
        if S0.shape[1]:
            worst = max(worst, np.linalg.norm(orbit.jacobian_product(0, j) @ S0, 2) / scale)
        if U0.shape[1]:
            back = np.linalg.solve(orbit.jacobian_product(-j, j), U0)
            worst = max(worst, np.linalg.norm(back, 2) / scale)
    return float(worst)


def _round_up_tenth(c: float) -> float:
    return max(1.0, math.ceil(10.0 * (c - 1e-9)) / 10.0)


def compute_splitting(orbit: PeriodicOrbit) -> HyperbolicSplitting:
    """
    Stable and unstable subspaces from the Schur form of the monodromy matrix,
    propagated along the orbit with QR re-orthonormalisation.
    """
    verdict = classify_periodic_point(orbit)
    if not verdict.hyperbolic:
        raise NonhyperbolicOrbitError(
            f"Orbit through {orbit.base.tolist()} has an eigenvalue of modulus {verdict.witness_modulus:.12g}",
            witness_modulus=verdict.witness_modulus,
        )
    B = orbit.monodromy()
    n, m = orbit.dim, orbit.period
    _, Zs, s_dim = schur(B, output="real", sort="iuc")
    _, Zu, u_dim = schur(B, output="real", sort="ouc")
    if s_dim + u_dim != n:
        raise NonhyperbolicOrbitError("Schur ordering failed to separate the spectrum", witness_modulus=None)

    stable = [_orthonormal(Zs[:, :s_dim])]
    unstable = [_orthonormal(Zu[:, :u_dim])]
    for k in range(m - 1):
        A = orbit.jacobian(k)
        stable.append(_orthonormal(A @ stable[-1]))
        unstable.append(_orthonormal(A @ unstable[-1]))

    moduli = np.array(verdict.moduli)
    contraction = max(float(np.max(moduli[moduli < 1.0], initial=0.0)),
                      float(np.max(1.0 / moduli[moduli > 1.0], initial=0.0)))
    lam = contraction ** (1.0 / m)
    C = _round_up_tenth(_fit_constant(orbit, stable[0], unstable[0], lam, 3 * m))
    logger.info(f"Splitting along period-{m} orbit: dim S = {s_dim}, dim U = {u_dim}, C = {C:g}, lambda = {lam:.10f}")
    return HyperbolicSplitting(orbit, tuple(stable), tuple(unstable), C=C, lam=lam)


def uniform_constants(orbits: list[PeriodicOrbit]) -> tuple[float, float]:
    """Componentwise maxima of the per-orbit (C, lambda)."""
    if not orbits:
        raise ValueError("uniform_constants needs at least one orbit")
    splittings = [compute_splitting(o) for o in orbits]
    C = max(s.C for s in splittings)
    lam = max(s.lam for s in splittings)
    logger.info(f"Uniform constants over {len(orbits)} orbits: C = {C:g}, lambda = {lam:.10f}")
    return C, lam


# --- Parameters --------------------------------------------------------------

class ShadowingParams(BaseModel):
    """Lipschitz constant L, admissible defect d0 and solver controls."""
    L: float = Field(..., ge=1.0)
    d0: float = Field(..., gt=0.0)
    max_iterations: int = Field(default=config.SOLVER_MAX_ITERATIONS, ge=1)
    tolerance: float = Field(default=config.SOLVER_TOLERANCE, gt=0.0)
    # sampled points per chart ball when checking the defect near the orbit
    defect_samples: int = Field(default=256, ge=1)


def defect_near_orbit(method: PseudomethodS, orbit: PeriodicOrbit, sampler: PointSampler, count: int) -> float:
    """
    Sampled sup of dist(Psi_k(x), f(x)) over one k-period, for x in the chart balls of the orbit.

    Args:
        method: Theta_s pseudomethod to check
        orbit: Periodic orbit whose balls of radius min(chart radius, 1) are sampled
        sampler: Seeded point sampler
        count: Points per ball

    Returns:
        The largest sampled defect, cycle points included
    """
    space = orbit.space
    radius = min(orbit.chart_radius, 1.0)
    centers = orbit.distinct_points
    X = np.vstack([centers] + [space.exp(c, sampler.ball(orbit.dim, radius, count, salt=60 + i))
                               for i, c in enumerate(centers)])
    fX = orbit.system(X)
    return max(float(np.max(space.dist(method(k, X), fX))) for k in range(method.period))


def lipschitz_bound(C: float, lam: float) -> float:
    return 2.0 * C * (1.0 + lam) / (1.0 - lam)


def estimate_lipschitz_constant(orbit: PeriodicOrbit, splitting: HyperbolicSplitting | None = None) -> ShadowingParams:
    """L = 2C(1+lambda)/(1-lambda); d0 = gluing-safe radius / (4L)."""
    splitting = splitting or compute_splitting(orbit)
    L = lipschitz_bound(splitting.C, splitting.lam)
    b = min(orbit.chart_radius, 1.0)
    stretch = max(1.0, max(float(np.linalg.norm(orbit.jacobian(k), 2)) for k in range(orbit.period)))
    d0 = b / stretch / (4.0 * L)
    logger.debug(f"Lipschitz estimate: L = {L:.6g}, d0 = {d0:.6g}")
    return ShadowingParams(L=L, d0=d0)


# --- Solver ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ShadowingSolution:
    trajectory: Pseudotrajectory
    iterations: int
    residual: float
    sup_distance: float
    # sup over the middle half of the window
    interior_sup_distance: float


class PerronShadowingSolver:
    """Fixed-point iteration of the Perron operator along one hyperbolic orbit."""

    def __init__(self, orbit: PeriodicOrbit, splitting: HyperbolicSplitting | None = None,
                 params: ShadowingParams | None = None, sampler: PointSampler | None = None):
        self.orbit = orbit
        self.sampler = sampler or PointSampler(seed=config.MASTER_SEED)
        self.splitting = splitting or compute_splitting(orbit)
        self.params = params or estimate_lipschitz_constant(orbit, self.splitting)
        m, s = orbit.period, self.splitting.stable_dim
        self._s = s
        self._E = [self.splitting.basis(k) for k in range(m)]
        self._E_inv = [np.linalg.inv(E) for E in self._E]
        self._Ds, self._Du, self._A_split = [], [], []
        for k in range(m):
            D = self._E_inv[(k + 1) % m] @ orbit.jacobian(k) @ self._E[k]
            Ds, Du = D[:s, :s], D[s:, s:]
            block = np.zeros_like(D)
            block[:s, :s], block[s:, s:] = Ds, Du
            self._Ds.append(Ds)
            self._Du.append(Du)
            # A_k with the rounding-level cross terms between S and U removed
            self._A_split.append(self._E[(k + 1) % m] @ block @ self._E_inv[k])

    def perron(self, h: np.ndarray) -> np.ndarray:
        """The periodic solution of v_{k+1} = A_k v_k + h_k, k = 0..W-1, v_W = v_0."""
        W, n = h.shape
        m, s = self.orbit.period, self._s
        c = np.array([self._E_inv[(k + 1) % m] @ h[k] for k in range(W)])
        hs, hu = c[:, :s], c[:, s:]
        stable = np.zeros((W + 1, s))
        unstable = np.zeros((W + 1, n - s))

        if s:
            monodromy = np.eye(s)
            for k in range(W):
                stable[k + 1] = self._Ds[k % m] @ stable[k] + hs[k]
                monodromy = self._Ds[k % m] @ monodromy
            stable[0] = np.linalg.solve(np.eye(s) - monodromy, stable[W])
            for k in range(W):
                stable[k + 1] = self._Ds[k % m] @ stable[k] + hs[k]

        if n - s:
            u = n - s
            inverse_monodromy = np.eye(u)
            for k in range(W - 1, -1, -1):
                unstable[k] = np.linalg.solve(self._Du[k % m], unstable[k + 1] - hu[k])
                inverse_monodromy = np.linalg.solve(self._Du[k % m], inverse_monodromy)
            unstable[W] = np.linalg.solve(np.eye(u) - inverse_monodromy, unstable[0])
            for k in range(W - 1, -1, -1):
                unstable[k] = np.linalg.solve(self._Du[k % m], unstable[k + 1] - hu[k])

        return np.array([self._E[k % m] @ np.concatenate([stable[k], unstable[k]]) for k in range(W)])

    def _chart_images(self, method: PseudomethodS, v: np.ndarray) -> np.ndarray:
        """G_k(v_k) = exp^{-1}_{p_{k+1}} Psi_k(exp_{p_k}(v_k))."""
        space = self.orbit.space
        out = np.empty_like(v)
        for k in range(len(v)):
            x = space.exp(self.orbit.point(k), v[k])
            out[k] = space.log(self.orbit.point(k + 1), method(k, x))
        return out

    def solve(self, method: PseudomethodS, window: int | tuple[int, int] | None = None) -> ShadowingSolution:
        orbit, params = self.orbit, self.params
        W = _window_length(window, orbit.period, method.period)
        try:
            measured = defect_near_orbit(method, orbit, self.sampler, params.defect_samples)
        except ChartDomainError as e:
            raise NonConvergenceError(f"chart domain violated while measuring the defect: {e}") from e
        if measured > method.claimed_defect * (1.0 + 1e-9):
            logger.warning(f"Measured defect {measured:.6e} of {method.name} exceeds its claimed {method.claimed_defect:.6e}")
        defect = max(measured, method.claimed_defect)
        if defect > params.d0:
            logger.error(f"Defect {defect:.3e} of {method.name} exceeds d0 = {params.d0:.3e}")
            raise NonConvergenceError(
                f"defect {defect:.3e} exceeds d0 = {params.d0:.3e}; the Perron iteration is not a contraction",
                iterations=0,
            )
        logger.info(f"Shadowing {method.name} along period-{orbit.period} orbit over window {W}")

        v = np.zeros((W, orbit.dim))
        increment = float("inf")
        for iteration in range(1, params.max_iterations + 1):
            if np.max(np.linalg.norm(v, axis=-1)) > orbit.chart_radius:
                raise NonConvergenceError("iterate left the chart balls around the orbit", iteration, increment)
            try:
                images = self._chart_images(method, v)
            except ChartDomainError as e:
                raise NonConvergenceError(f"chart domain violated: {e}", iteration, increment) from e
            h = images - np.array([self._A_split[k % orbit.period] @ v[k] for k in range(W)])
            v_next = self.perron(h)
            increment = float(np.max(np.abs(v_next - v)))
            v = v_next
            logger.debug(f"Perron iteration {iteration}: increment {increment:.3e}")
            if increment < params.tolerance:
                break
        else:
            logger.error(f"Perron iteration stalled at increment {increment:.3e} after {params.max_iterations} steps")
            raise NonConvergenceError(
                f"no convergence within {params.max_iterations} iterations", params.max_iterations, increment
            )

        space = orbit.space
        points = np.array([space.exp(orbit.point(k), v[k]) for k in range(W)] + [space.exp(orbit.point(0), v[0])])
        trajectory = Pseudotrajectory((0, W), points, method, "theta_s")
        residual = trajectory.residual()
        if residual > RESIDUAL_TOLERANCE:
            raise NonConvergenceError(f"converged sequence has residual {residual:.3e}", iteration, increment)
        quarter = W // 4
        interior = max(space.dist(points[k], orbit.point(k)) for k in range(quarter, W - quarter + 1))
        solution = ShadowingSolution(trajectory, iteration, residual, shadowing_distance(trajectory, orbit), interior)
        logger.info(f"Converged in {iteration} iterations: sup distance {solution.sup_distance:.6e}, "
                    f"interior {interior:.6e}, residual {residual:.1e}")
        return solution


def _window_length(window: int | tuple[int, int] | None, m: int, P: int) -> int:
    base = math.lcm(m, P)
    if window is None:
        return base * 4
    if isinstance(window, tuple):
        if window[0] != 0:
            raise ValueError(f"Shadowing windows start at 0, got {window}")
        window = window[1]
    if window < 1 or window % base:
        raise ValueError(f"Window {window} must be a positive multiple of lcm(m, P) = {base}")
    return int(window)


def find_shadowing_trajectory(orbit: PeriodicOrbit, method: PseudomethodS,
                              splitting: HyperbolicSplitting | None = None,
                              params: ShadowingParams | None = None,
                              window: int | tuple[int, int] | None = None) -> Pseudotrajectory:
    return PerronShadowingSolver(orbit, splitting, params).solve(method, window).trajectory


def sampled_decay_ratio(splitting: HyperbolicSplitting, sampler: PointSampler, count: int = 64) -> float:
    """max over sampled unit v in S(p) of |Df^j v| / (C lam^j |v|), j = 0..3m; mirrored for U."""
    orbit = splitting.orbit
    worst = 0.0
    for basis, forward in ((splitting.stable[0], True), (splitting.unstable[0], False)):
        dim = basis.shape[1]
        if not dim:
            continue
        vectors = sampler.unit_vectors(dim, count, salt=77 if forward else 78) @ basis.T
        for j in range(3 * orbit.period + 1):
            if forward:
                images = vectors @ orbit.jacobian_product(0, j).T
            else:
                images = np.linalg.solve(orbit.jacobian_product(-j, j), vectors.T).T
            ratio = np.linalg.norm(images, axis=-1) / (splitting.C * splitting.lam ** j)
            worst = max(worst, float(np.max(ratio)))
    return worst
