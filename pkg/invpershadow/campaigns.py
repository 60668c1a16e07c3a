"""
Seeded random pseudomethods and concurrent shadowing campaigns.

A random d-pseudomethod perturbs f by a truncated trigonometric field per
method index, Psi_k(x) = f(x) + g_k(x), with integer frequencies and
coefficients drawn from the seeded generator.  Each g_k is scaled so that its
sup norm equals d: the grid maxima are refined with a local optimiser, so
sampled defects never exceed the claimed one.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import config
from .errors import NonConvergenceError
from .logger_config import logger
from .orbits import PeriodicOrbit
from .pseudomethod import PseudomethodS, exact_method
from .reports import write_csv
from .run_tracker import RunTracker
from .sampling import PointSampler
from .shadowing import PerronShadowingSolver
from .systems import DiscreteSystem

TRIG_TERMS = 4
GRID_SIDE = 128
# starts for the peak refinement when the grid has no neighbour structure
REFINE_STARTS = 16


@dataclass(frozen=True, eq=False)
class TrigField:
    frequencies: np.ndarray   # (terms, n) integers
    phases: np.ndarray        # (terms,)
    amplitudes: np.ndarray    # (terms, n)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        waves = np.sin(2.0 * np.pi * (x @ self.frequencies.T) + self.phases)
        return waves @ self.amplitudes

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Dg(x) for a single point, shape (n, n)."""
        slopes = 2.0 * np.pi * np.cos(2.0 * np.pi * (self.frequencies @ x) + self.phases)
        return (self.amplitudes * slopes[:, None]).T @ self.frequencies


def _normalisation_points(system: DiscreteSystem) -> np.ndarray:
    space = system.space
    if space.is_torus and space.dim == 2:
        axis = np.arange(GRID_SIDE) / GRID_SIDE
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])
    return PointSampler(seed=0).cover(space, GRID_SIDE * GRID_SIDE)


def _peak_candidates(system: DiscreteSystem, grid: np.ndarray, norms: np.ndarray) -> np.ndarray:
    """Grid points that beat their eight neighbours on the torus grid, else the best REFINE_STARTS."""
    space = system.space
    if space.is_torus and space.dim == 2 and len(grid) == GRID_SIDE * GRID_SIDE:
        values = norms.reshape(GRID_SIDE, GRID_SIDE)
        peak = np.ones_like(values, dtype=bool)
        for shift in [(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1) if (i, j) != (0, 0)]:
            peak &= values >= np.roll(values, shift, axis=(0, 1))
        return grid[peak.ravel()]
    return grid[np.argsort(norms)[-REFINE_STARTS:]]


def field_peak(field: TrigField, system: DiscreteSystem, grid: np.ndarray) -> float:
    """
    Sup norm of a trigonometric field.

    Args:
        field: Field g to measure
        system: System whose space the field lives on
        grid: Dense grid locating the candidate maxima

    Returns:
        The largest of the grid maximum and the refined local maxima
    """
    norms = np.linalg.norm(field(grid), axis=-1)
    best = float(np.max(norms))

    def objective(x):
        g = field(x)
        return -float(g @ g), -2.0 * field.jacobian(x).T @ g

    for start in _peak_candidates(system, grid, norms):
        result = minimize(objective, start, jac=True, method="L-BFGS-B",
                          options={"gtol": 1e-14, "ftol": 1e-16, "maxiter": 200})
        best = max(best, math.sqrt(max(-float(result.fun), 0.0)))
    return best


def random_trig_field(dim: int, rng: np.random.Generator) -> TrigField:
    frequencies = rng.integers(-1, 2, size=(TRIG_TERMS, dim))
    for t in range(TRIG_TERMS):
        while not np.any(frequencies[t]):
            frequencies[t] = rng.integers(-1, 2, size=dim)
    return TrigField(
        frequencies=frequencies.astype(float),
        phases=rng.uniform(0.0, 2.0 * np.pi, size=TRIG_TERMS),
        amplitudes=rng.normal(size=(TRIG_TERMS, dim)),
    )


def random_trig_method(system: DiscreteSystem, d: float, seed: int, method_period: int = 2,
                       master_seed: int = config.MASTER_SEED) -> PseudomethodS:
    """Seeded k-periodic d-pseudomethod Psi_k = f + g_k with sup |g_k| = d."""
    if d < 0:
        raise ValueError(f"d must be non-negative, got {d}")
    if d == 0:
        return exact_method(system)
    rng = np.random.default_rng([master_seed, seed])
    grid = _normalisation_points(system)
    fields = []
    for _ in range(method_period):
        field = random_trig_field(system.dim, rng)
        peak = field_peak(field, system, grid)
        fields.append(TrigField(field.frequencies, field.phases, field.amplitudes * (d / peak)))
    space = system.space

    def maps(k: int, x: np.ndarray) -> np.ndarray:
        return space.reduce(system(x) + fields[k](x))

    return PseudomethodS(system, maps, period=method_period, claimed_defect=d, name=f"trig(seed={seed}, d={d:.3e})")


# --- Campaigns ---------------------------------------------------------------

CAMPAIGN_HEADER = ["seed", "d", "sup_distance", "interior_sup_distance", "ratio", "iterations", "converged"]


@dataclass(frozen=True)
class CampaignRow:
    seed: int
    d: float
    sup_distance: float
    # sup over the middle half of the window, away from the periodic closure
    interior_sup_distance: float
    ratio: float
    iterations: int
    converged: bool
    residual: float = float("nan")

    def as_csv(self) -> list:
        return [self.seed, self.d, self.sup_distance, self.interior_sup_distance, self.ratio,
                self.iterations, self.converged]


@dataclass(frozen=True)
class CampaignResult:
    rows: tuple[CampaignRow, ...]
    bound: float

    @property
    def max_ratio(self) -> float:
        ratios = [r.ratio for r in self.rows if r.converged]
        return max(ratios) if ratios else float("nan")

    @property
    def max_interior_ratio(self) -> float:
        ratios = [r.interior_sup_distance / r.d for r in self.rows if r.converged and r.d > 0]
        return max(ratios) if ratios else float("nan")

    @property
    def passed(self) -> bool:
        return all(r.converged for r in self.rows) and not (self.max_ratio > self.bound)


def _solve_one(solver: PerronShadowingSolver, seed: int, d: float, method_period: int,
               window_periods: int, master_seed: int, tracker: RunTracker | None) -> CampaignRow:
    orbit = solver.orbit
    method = random_trig_method(orbit.system, d, seed, method_period, master_seed)
    window = math.lcm(orbit.period, method.period) * window_periods
    try:
        solution = solver.solve(method, window)
    except NonConvergenceError as e:
        logger.warning(f"Seed {seed}, d={d:.3e}: {e}")
        if tracker:
            tracker.log_run(seed, d, float("nan"), e.iterations, False, additional_context={"reason": str(e)})
        return CampaignRow(seed, d, float("nan"), float("nan"), float("nan"), e.iterations, False)
    ratio = solution.sup_distance / d if d > 0 else 0.0
    if tracker:
        tracker.log_run(seed, d, solution.sup_distance, solution.iterations, True,
                        additional_context={"interior_sup_distance": solution.interior_sup_distance,
                                            "residual": solution.residual})
    return CampaignRow(seed, d, solution.sup_distance, solution.interior_sup_distance, ratio,
                       solution.iterations, True, solution.residual)


def run_shadow_campaign(orbit: PeriodicOrbit, d_values: Sequence[float], seeds: Sequence[int],
                        method_period: int = 2, window_periods: int = 4,
                        workers: int = config.WORKERS, master_seed: int = config.MASTER_SEED,
                        tracker: RunTracker | None = None,
                        solver: PerronShadowingSolver | None = None,
                        bound: float | None = None) -> CampaignResult:
    """
    Solve one random pseudomethod per (d, seed); rows come back in (d, seed) order.
    The campaign passes when every run converges with sup/d <= bound (default: the estimated L).
    """
    solver = solver or PerronShadowingSolver(orbit)
    jobs = [(seed, d) for d in d_values for seed in seeds]
    logger.info(f"Shadow campaign: {len(jobs)} runs on period-{orbit.period} orbit with {workers} workers, "
                f"L = {solver.params.L:.6g}, d0 = {solver.params.d0:.6g}")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(
            lambda job: _solve_one(solver, job[0], job[1], method_period, window_periods, master_seed, tracker),
            jobs,
        ))
    result = CampaignResult(tuple(rows), solver.params.L if bound is None else bound)
    logger.info(f"Shadow campaign done: max ratio {result.max_ratio:.6g} (interior {result.max_interior_ratio:.6g}) "
                f"vs bound {result.bound:.6g} "
                f"-> {'PASS' if result.passed else 'FAIL'}")
    return result


def write_campaign_csv(path: str | Path, result: CampaignResult, preamble: dict | None = None,
                       deterministic: bool = True) -> Path:
    return write_csv(path, CAMPAIGN_HEADER, [row.as_csv() for row in result.rows], preamble, deterministic)
