# Run Tracking Utility for shadowing and adversary campaigns
# Records one entry per solved (seed, d) pair and summarises the session

from typing import Any, Dict, Optional
import math
import threading

from .logger_config import logger


class RunTracker:
    def __init__(self, campaign_name: str, bound: Optional[float] = None):
        self.campaign_name = campaign_name
        self.bound = bound
        self.session_runs = []
        self._lock = threading.Lock()

    def run_id(self, seed: int, d: float) -> str:
        """Deterministic identifier of one campaign run"""
        return f"{self.campaign_name}_{seed}_{d:.3e}"

    def log_run(self, seed: int, d: float, sup_distance: float, iterations: int,
                converged: bool, additional_context: Optional[Dict] = None) -> Dict[str, Any]:
        """Log a single solved pseudomethod"""
        ratio = sup_distance / d if converged and d > 0 else float("nan")
        entry = {
            "run_id": self.run_id(seed, d),
            "seed": seed,
            "d": d,
            "sup_distance": sup_distance,
            "ratio": ratio,
            "iterations": iterations,
            "converged": converged,
        }
        if additional_context:
            entry["context"] = additional_context

        with self._lock:
            self.session_runs.append(entry)

        if converged:
            logger.info(
                f"RUN_TRACKING | {self.campaign_name} | "
                f"RUN: {entry['run_id']} | "
                f"SUP: {sup_distance:.6e} | "
                f"RATIO: {ratio:.4f} | "
                f"ITERATIONS: {iterations}"
            )
        else:
            reason = (additional_context or {}).get("reason", "unknown")
            logger.warning(f"RUN_TRACKING | {self.campaign_name} | RUN: {entry['run_id']} | NOT CONVERGED | {reason}")

        return entry

    def get_session_summary(self) -> Dict[str, Any]:
        """Summary of every run logged so far"""
        if not self.session_runs:
            return {"total_runs": 0, "converged_runs": 0, "max_ratio": 0.0, "passed": True}

        converged = [entry for entry in self.session_runs if entry["converged"]]
        ratios = [entry["ratio"] for entry in converged if not math.isnan(entry["ratio"])]
        max_ratio = max(ratios) if ratios else float("nan")
        passed = len(converged) == len(self.session_runs)
        if self.bound is not None and ratios:
            passed = passed and max_ratio <= self.bound

        return {
            "campaign": self.campaign_name,
            "total_runs": len(self.session_runs),
            "converged_runs": len(converged),
            "max_ratio": max_ratio,
            "max_iterations": max((entry["iterations"] for entry in converged), default=0),
            "bound": self.bound if self.bound is not None else float("nan"),
            "passed": passed,
        }

    def log_session_summary(self):
        """Log campaign summary"""
        summary = self.get_session_summary()

        logger.info(
            f"SESSION_SUMMARY | {self.campaign_name} | "
            f"RUNS: {summary['total_runs']} | "
            f"CONVERGED: {summary['converged_runs']} | "
            f"MAX_RATIO: {summary['max_ratio']:.4f} | "
            f"PASSED: {summary['passed']}"
        )


# Global run trackers for each campaign
_run_trackers: Dict[str, RunTracker] = {}


def get_run_tracker(campaign_name: str, bound: Optional[float] = None) -> RunTracker:
    """Get or create run tracker for a campaign"""
    if campaign_name not in _run_trackers:
        _run_trackers[campaign_name] = RunTracker(campaign_name, bound)
    return _run_trackers[campaign_name]


def log_all_session_summaries():
    """Log session summaries for all active run trackers"""
    for tracker in _run_trackers.values():
        tracker.log_session_summary()
