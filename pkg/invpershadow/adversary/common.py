"""Shared plumbing for the adversary constructions: chart trajectories, focus regions, trace reports."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ..orbits import PeriodicOrbit
from ..pseudomethod import PseudomethodS
from ..reports import write_csv, write_summary
from ..sampling import FocusRegion

TRACE_HEADER = ["k", "pr_norm", "lower_bound", "inner_region"]


@dataclass(frozen=True)
class TraceRow:
    k: int
    pr_norm: float
    lower_bound: float
    inner_region: bool

    def as_csv(self) -> list:
        return [self.k, self.pr_norm, self.lower_bound, self.inner_region]


def chart_trajectory(method: PseudomethodS, orbit: PeriodicOrbit, starts: np.ndarray, steps: int) -> np.ndarray:
    """
    Iterate x_{k+1} = Psi_k(x_k) from x_0 = exp_{p_0}(q) for a batch of tangent
    vectors q and return v_k = exp^{-1}_{p_k}(x_k), shape (steps + 1, N, n).
    """
    space = orbit.space
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    x = space.exp(orbit.point(0), starts)
    out = np.empty((steps + 1, *starts.shape))
    out[0] = space.log(orbit.point(0), x)
    for k in range(steps):
        x = method(k, x)
        out[k + 1] = space.log(orbit.point(k + 1), x)
    return out


def focus_for(orbit: PeriodicOrbit, rho_in: float, rho_out: float) -> FocusRegion:
    """Sample the gluing balls and rings of every cycle point."""
    return FocusRegion(centers=orbit.distinct_points, ball_radius=rho_out, shell_radii=(rho_in, 0.5 * (rho_in + rho_out), rho_out))


def write_adversary_report(out_dir: str | Path, name: str, spec_fields: Mapping[str, Any],
                           summary: Mapping[str, Any], trace: Sequence[TraceRow],
                           deterministic: bool = True) -> tuple[Path, Path]:
    """Trace CSV with the construction parameters in its preamble, plus a pass/fail summary."""
    out_dir = Path(out_dir)
    csv_path = write_csv(out_dir / f"{name}_trace.csv", TRACE_HEADER, [row.as_csv() for row in trace],
                         preamble=spec_fields, deterministic=deterministic)
    summary_path = write_summary(out_dir / f"{name}_summary.txt", {**spec_fields, **summary}, deterministic)
    return csv_path, summary_path
