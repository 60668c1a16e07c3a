"""
Command-line harness: list orbits, build and verify adversaries, run
shadowing campaigns, check gluing and report hyperbolicity constants.

Exit status: 0 when every verification passes, 1 when a verification fails,
2 on configuration or precondition errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .adversary import (
    JordanDriftSpec,
    RotationDriftSpec,
    build_lemma2_adversary,
    build_lemma2_model,
    build_lemma3_adversary,
    build_lemma3_model,
    build_lemma4_adversary,
    build_lemma4_sequence,
    verify_lemma2_divergence,
    verify_lemma3_divergence,
    verify_lemma4_rigidity,
    write_adversary_report,
)
from .campaigns import run_shadow_campaign, write_campaign_csv
from .errors import ConfigError, InvPerShadowError, NonhyperbolicOrbitError
from .experiment_config import ExperimentConfig, load_config
from .gluing import (
    GluingSpec,
    admissible_defect_nonlinear,
    glue_linear,
    glue_nonlinear,
    gluing_report,
    random_local_map,
)
from .logger_config import logger
from .orbits import PeriodicOrbit, export_orbits, find_rational_periodic_orbit
from .pseudomethod import measure_defect_s
from .reports import write_csv, write_summary
from .run_tracker import get_run_tracker, log_all_session_summaries
from .sampling import PointSampler
from .shadowing import (
    classify_periodic_point,
    compute_splitting,
    estimate_lipschitz_constant,
    sampled_decay_ratio,
    uniform_constants,
)
from .systems import (
    DiscreteSystem,
    cat_map,
    linear_system,
    perturbed_cat_map,
    planar_rotation,
    toral_automorphism,
)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG_ERROR = 2

DECAY_SLACK = 1e-12


# --- Systems and orbits ------------------------------------------------------

def build_system(cfg: ExperimentConfig) -> DiscreteSystem:
    if cfg.system == "cat":
        return cat_map()
    if cfg.system == "toral":
        try:
            return toral_automorphism(cfg.matrix_rows())
        except ConfigError:
            raise
        except ValueError as e:
            raise cfg.error("matrix", str(e)) from e
    if cfg.system == "perturbed-cat":
        return perturbed_cat_map(cfg.kappa)
    if cfg.system == "rotation":
        return planar_rotation(cfg.angle)
    return linear_system(cfg.matrix_rows())


def list_orbits(system: DiscreteSystem, cfg: ExperimentConfig) -> list[PeriodicOrbit]:
    """Rational cycles of integer automorphisms; the fixed point at the origin otherwise."""
    if system.integer_matrix is not None:
        return find_rational_periodic_orbit(system, cfg.denominator)
    return [PeriodicOrbit.from_base(system, np.zeros(system.dim), 1)]


def select_orbit(system: DiscreteSystem, cfg: ExperimentConfig) -> PeriodicOrbit:
    orbits = list_orbits(system, cfg)
    if cfg.orbit_index >= len(orbits):
        raise cfg.error("orbit_index", f"only {len(orbits)} orbits with denominator {cfg.denominator}")
    return orbits[cfg.orbit_index]


def _moduli(orbit: PeriodicOrbit) -> list[float]:
    return sorted(float(v) for v in np.abs(np.linalg.eigvals(orbit.monodromy())))


# --- Subcommands -------------------------------------------------------------

ORBITS_HEADER = ["index", "base", "period", "fundamental_period", "moduli", "hyperbolic"]


def cmd_orbits(cfg: ExperimentConfig, out_dir: Path, deterministic: bool) -> int:
    system = build_system(cfg)
    orbits = list_orbits(system, cfg)
    rows = []
    for i, orbit in enumerate(orbits):
        classification = classify_periodic_point(orbit)
        rows.append([i, orbit.base.tolist(), orbit.period, orbit.fundamental_period,
                     _moduli(orbit), classification.hyperbolic])
    write_csv(out_dir / "orbits.csv", ORBITS_HEADER, rows,
              preamble={"system": system.name, "denominator": cfg.denominator}, deterministic=deterministic)
    (out_dir / "orbits.txt").write_text(export_orbits(orbits), newline="\n")
    logger.info(f"Listed {len(orbits)} orbits of {system.name}")
    return EXIT_OK


def cmd_adversary(cfg: ExperimentConfig, out_dir: Path, deterministic: bool) -> int:
    if cfg.lemma is None:
        raise cfg.error("lemma", "the adversary command needs lemma = 2, 3 or 4")
    sampler = PointSampler(seed=cfg.seed)

    if cfg.lemma == 2:
        spec = RotationDriftSpec(m=len(cfg.radii), nu=cfg.nu, chi=cfg.chi, radii=tuple(cfg.radii),
                                 bottom=tuple(cfg.bottom))
        model = build_lemma2_model(spec)
        d = spec.default_d if cfg.d is None else cfg.d
        adversary = build_lemma2_adversary(model, d, sampler)
        report = verify_lemma2_divergence(adversary, model, d, cfg.trials, sampler)
        spec_fields = spec.as_fields()
    elif cfg.lemma == 3:
        spec = JordanDriftSpec(l=cfg.l, theta=cfg.theta, w=tuple(cfg.w), L=cfg.L, r_bar=cfg.r_bar,
                               tail=tuple(cfg.tail))
        d = spec.max_d() / 2.0 if cfg.d is None else cfg.d
        orbit = build_lemma3_model(spec)
        adversary = build_lemma3_adversary(spec, d, orbit, sampler)
        report = verify_lemma3_divergence(adversary, spec, d, cfg.trials, orbit, sampler)
        spec_fields = spec.as_fields()
    else:
        orbit = select_orbit(build_system(cfg), cfg)
        e0 = None if cfg.e0 is None else np.asarray(cfg.e0, dtype=float)
        seq = build_lemma4_sequence(orbit, e0, L=cfg.L)
        d = seq.default_d if cfg.d is None else cfg.d
        adversary = build_lemma4_adversary(seq, d, sampler)
        report = verify_lemma4_rigidity(adversary, seq, d, cfg.trials, cfg.delta, sampler)
        spec_fields = seq.as_fields()

    measured = measure_defect_s(adversary, sampler, cfg.samples)
    defect_ok = measured <= adversary.claimed_defect
    passed = report.passed and defect_ok
    summary = {**report.as_fields(), "measured_defect": measured,
               "claimed_defect": adversary.claimed_defect, "defect_within_claim": defect_ok,
               "verification_passed": passed}
    write_adversary_report(out_dir, f"lemma{cfg.lemma}", spec_fields, summary, report.trace, deterministic)
    logger.info(f"Adversary for lemma {cfg.lemma}: measured defect {measured:.6e} "
                f"(claimed {adversary.claimed_defect:.6e}) -> {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_VERIFICATION_FAILED


def cmd_shadow(cfg: ExperimentConfig, out_dir: Path, deterministic: bool) -> int:
    orbit = select_orbit(build_system(cfg), cfg)
    classification = classify_periodic_point(orbit)
    if not classification.hyperbolic:
        raise NonhyperbolicOrbitError(
            f"orbit {cfg.orbit_index} has an eigenvalue of modulus {classification.witness_modulus:.12g}; "
            "shadowing campaigns need a hyperbolic orbit",
            classification.witness_modulus,
        )
    tracker = get_run_tracker(f"shadow-{orbit.system.name}", bound=float(cfg.L))
    result = run_shadow_campaign(orbit, cfg.d_values, range(cfg.seeds), cfg.method_period,
                                 cfg.window_periods, cfg.workers, cfg.seed, tracker, bound=float(cfg.L))
    preamble = {"system": orbit.system.name, "period": orbit.period, "method_period": cfg.method_period,
                "window_periods": cfg.window_periods, "master_seed": cfg.seed}
    write_campaign_csv(out_dir / "shadow.csv", result, preamble, deterministic)
    write_summary(out_dir / "shadow_summary.txt",
                  {**preamble, "runs": len(result.rows),
                   "converged": sum(row.converged for row in result.rows),
                   "max_ratio": result.max_ratio, "max_interior_ratio": result.max_interior_ratio,
                   "bound": result.bound, "passed": result.passed},
                  deterministic)
    return EXIT_OK if result.passed else EXIT_VERIFICATION_FAILED


GLUE_HEADER = ["index", "period", "mode", "d", "rho_in", "rho_out", "sample_count",
               "sup_defect", "inner_identity_error", "outer_identity_error", "passed"]


def cmd_glue_check(cfg: ExperimentConfig, out_dir: Path, deterministic: bool) -> int:
    """Glue `psi_count` random local maps across the orbits with denominator up to `denominator`."""
    system = build_system(cfg)
    orbits = []
    if system.integer_matrix is not None:
        for q in range(1, cfg.denominator + 1):
            orbits.extend(find_rational_periodic_orbit(system, q))
    else:
        orbits.append(PeriodicOrbit.from_base(system, np.zeros(system.dim), 1))
    sampler = PointSampler(seed=cfg.seed)
    rows = []
    for i in range(cfg.psi_count):
        orbit = orbits[i % len(orbits)]
        rng = np.random.default_rng([cfg.seed, i])
        b = min(orbit.chart_radius, 1.0)
        if system.is_linear:
            eps = b / 4.0
            d = eps / 4.0 if cfg.d is None else cfg.d
            glued = glue_linear(GluingSpec.linear(orbit, random_local_map(orbit, d, rng), b, d, eps), sampler)
        else:
            C = 100.0
            admissible = admissible_defect_nonlinear(orbit, b, C, sampler)
            d = admissible / 2.0 if cfg.d is None else cfg.d
            psi = random_local_map(orbit, d / 2.0, rng)
            glued = glue_nonlinear(GluingSpec.nonlinear(orbit, psi, b, d, C), sampler)
        report = gluing_report(glued, sampler, cfg.samples)
        rows.append([i, orbit.period, report.mode, report.d, report.rho_in, report.rho_out, report.sample_count,
                     report.sup_defect, report.inner_identity_error, report.outer_identity_error, report.passed])
    passed = all(row[-1] for row in rows)
    write_csv(out_dir / "glue_check.csv", GLUE_HEADER, rows,
              preamble={"system": system.name, "orbits": len(orbits), "psi_count": cfg.psi_count},
              deterministic=deterministic)
    logger.info(f"Gluing check: {sum(row[-1] for row in rows)}/{len(rows)} passed")
    return EXIT_OK if passed else EXIT_VERIFICATION_FAILED


HYPCONST_HEADER = ["index", "period", "hyperbolic", "stable_dim", "C", "lambda", "L", "d0",
                   "span_margin", "invariance_error", "decay_ratio"]


def cmd_hypconst(cfg: ExperimentConfig, out_dir: Path, deterministic: bool) -> int:
    system = build_system(cfg)
    orbits = list_orbits(system, cfg)
    sampler = PointSampler(seed=cfg.seed)
    rows, hyperbolic_orbits, passed = [], [], True
    nan = float("nan")
    for i, orbit in enumerate(orbits):
        if not classify_periodic_point(orbit).hyperbolic:
            rows.append([i, orbit.period, False, -1, nan, nan, nan, nan, nan, nan, nan])
            continue
        splitting = compute_splitting(orbit)
        params = estimate_lipschitz_constant(orbit, splitting)
        ratio = sampled_decay_ratio(splitting, sampler)
        passed = passed and ratio <= 1.0 + DECAY_SLACK
        hyperbolic_orbits.append(orbit)
        rows.append([i, orbit.period, True, splitting.stable_dim, splitting.C, splitting.lam, params.L, params.d0,
                     splitting.span_margin(), splitting.invariance_error(), ratio])
    fields = {"system": system.name, "orbits": len(orbits), "hyperbolic": len(hyperbolic_orbits)}
    if hyperbolic_orbits:
        C, lam = uniform_constants(hyperbolic_orbits)
        fields.update({"uniform_C": C, "uniform_lambda": lam})
    write_csv(out_dir / "hypconst.csv", HYPCONST_HEADER, rows, preamble=fields, deterministic=deterministic)
    return EXIT_OK if passed else EXIT_VERIFICATION_FAILED


COMMANDS: dict[str, Callable[[ExperimentConfig, Path, bool], int]] = {
    "orbits": cmd_orbits,
    "adversary": cmd_adversary,
    "shadow": cmd_shadow,
    "glue-check": cmd_glue_check,
    "hypconst": cmd_hypconst,
}


# --- Entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invpershadow",
                                     description="Inverse periodic shadowing laboratory.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", type=Path, help="experiment file with one 'key = value' per line")
        sub.add_argument("--out", type=Path, default=Path("results"), help="output directory")
        sub.add_argument("--seed", type=int, help="master seed, overrides the config")
        sub.add_argument("--deterministic", action="store_true",
                         help="omit timestamps so repeated runs give byte-identical reports")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        args.out.mkdir(parents=True, exist_ok=True)
        logger.info(f"Running '{args.command}' with seed {cfg.seed}, output to {args.out}")
        status = COMMANDS[args.command](cfg, args.out, args.deterministic)
    except (ConfigError, ValueError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except InvPerShadowError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VERIFICATION_FAILED
    finally:
        log_all_session_summaries()
    logger.info(f"'{args.command}' finished with exit status {status}")
    return status


__all__ = ["main", "build_parser", "build_system", "list_orbits", "select_orbit",
           "cmd_orbits", "cmd_adversary", "cmd_shadow", "cmd_glue_check", "cmd_hypconst"]
