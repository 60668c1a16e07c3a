"""Full-size runs of the gluing, adversary and campaign checks; deselect with -m "not slow"."""

import inspect
import math

import numpy as np
import pytest

from invpershadow.adversary import (
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
)
from invpershadow.campaigns import run_shadow_campaign
from invpershadow.cli import main
from invpershadow.gluing import (
    GluingSpec,
    admissible_defect_linear,
    admissible_defect_nonlinear,
    glue_linear,
    glue_nonlinear,
    gluing_report,
    random_local_map,
)
from invpershadow.orbits import PeriodicOrbit, find_rational_periodic_orbit
from invpershadow.sampling import PointSampler
from invpershadow.systems import perturbed_cat_map

pytestmark = pytest.mark.slow

PSI_COUNT = 50
REPORT_SAMPLES = 10_000


@pytest.fixture
def small_denominator_orbits(cat):
    orbits = {}
    for q in (1, 2, 3):
        for orbit in find_rational_periodic_orbit(cat, q):
            orbits.setdefault(tuple(np.round(orbit.point(0), 12)), orbit)
    return list(orbits.values())


def test_fifty_random_local_maps_glue_within_d(small_denominator_orbits, sampler):
    assert len(small_denominator_orbits) == 4
    for i in range(PSI_COUNT):
        orbit = small_denominator_orbits[i % len(small_denominator_orbits)]
        b = orbit.chart_radius
        eps = b / 4
        d = eps / 4
        psi = random_local_map(orbit, d, np.random.default_rng(i))
        glued = glue_linear(GluingSpec.linear(orbit, psi, b=b, d=d, eps=eps), sampler, 128)
        report = gluing_report(glued, sampler, REPORT_SAMPLES)
        assert report.passed, f"psi {i} on the period-{orbit.period} orbit"
        assert report.sup_defect <= d
        assert report.sample_count >= REPORT_SAMPLES


@pytest.mark.parametrize("seed", range(5))
def test_glued_map_is_lipschitz_across_the_outer_sphere(cat_three_cycle, seed):
    orbit = cat_three_cycle
    space = orbit.space
    b = orbit.chart_radius
    eps, d = b / 4, b / 16
    psi = random_local_map(orbit, d, np.random.default_rng(seed))
    glued = glue_linear(GluingSpec.linear(orbit, psi, b=b, d=d, eps=eps), PointSampler(seed), 128)
    K = glued.spec.bump.max_slope
    rho_out = glued.spec.rho_out
    directions = PointSampler(seed).unit_vectors(orbit.dim, 256)
    for relative_gap in (1e-3, 1e-6):
        gap = 2 * relative_gap * rho_out
        for j in range(orbit.period):
            A_norm = np.linalg.norm(orbit.jacobian(j), 2)
            inner = space.exp(orbit.point(j), (1 - relative_gap) * rho_out * directions)
            outer = space.exp(orbit.point(j), (1 + relative_gap) * rho_out * directions)
            jump = np.max(space.dist(glued(inner), glued(outer)))
            # |Psi(x) - f(x)| <= (1 - beta)|psi - A v| and 1 - beta falls at most K per unit radius
            assert jump <= (A_norm + K * d) * gap * (1 + 1e-9) + 1e-15


def test_admissible_defects_take_no_local_map():
    assert list(inspect.signature(admissible_defect_linear).parameters) == ["b", "eps"]
    assert list(inspect.signature(admissible_defect_nonlinear).parameters) == ["orbit", "b", "C", "sampler", "count"]


def test_one_admissible_defect_serves_every_local_map(sampler):
    orbit = PeriodicOrbit.from_base(perturbed_cat_map(0.05), np.zeros(2), 1)
    b, C = orbit.chart_radius, 100.0
    d = admissible_defect_nonlinear(orbit, b, C, sampler, 128)
    for seed in range(10):
        psi = random_local_map(orbit, d / 2, np.random.default_rng(100 + seed))
        glued = glue_nonlinear(GluingSpec.nonlinear(orbit, psi, b=b, d=d, C=C), sampler, 128)
        report = gluing_report(glued, sampler, 1024)
        assert report.passed
        assert report.sup_defect <= d * (1 + 1e-12)


def test_admissible_linear_defect_serves_every_local_map(cat_three_cycle, sampler):
    b = cat_three_cycle.chart_radius
    eps = b / 4
    d = 0.999 * admissible_defect_linear(b, eps)
    for seed in range(10):
        psi = random_local_map(cat_three_cycle, d, np.random.default_rng(200 + seed))
        glued = glue_linear(GluingSpec.linear(cat_three_cycle, psi, b=b, d=d, eps=eps), sampler, 128)
        assert gluing_report(glued, sampler, 1024).passed


def test_push_through_on_every_denominator_three_orbit(cat, sampler):
    orbits = find_rational_periodic_orbit(cat, 3)
    assert sorted(o.period for o in orbits) == [1, 4, 4]
    for orbit in orbits:
        seq = build_lemma4_sequence(orbit, L=1)
        d = seq.default_d
        adversary = build_lemma4_adversary(seq, d, sampler, count=64)
        report = verify_lemma4_rigidity(adversary, seq, d, trials=10, sampler=sampler)
        assert report.passed, f"period-{orbit.period} orbit at {orbit.point(0).tolist()}"
        assert not report.witness


def test_jordan_chain_of_length_two_with_irrational_angle(sampler):
    spec = JordanDriftSpec(l=2, theta=1.0, L=10)
    orbit = build_lemma3_model(spec)
    adversary = build_lemma3_adversary(spec, 1e-3, orbit, sampler, count=64)
    report = verify_lemma3_divergence(adversary, spec, 1e-3, trials=100, orbit=orbit, sampler=sampler)
    assert report.passed
    assert report.exited == report.trials
    assert report.max_exit_step <= 20 * spec.L


def test_rotation_drift_with_a_contracting_bottom_block(sampler):
    spec = RotationDriftSpec(bottom=(0.5,))
    model = build_lemma2_model(spec)
    adversary = build_lemma2_adversary(model, sampler=sampler, count=64)
    report = verify_lemma2_divergence(adversary, model, spec.default_d, trials=20, sampler=sampler)
    assert report.passed


@pytest.mark.parametrize("orbit_fixture", ["cat_fixed_point", "cat_three_cycle"])
def test_two_hundred_seed_campaign(orbit_fixture, request):
    orbit = request.getfixturevalue(orbit_fixture)
    result = run_shadow_campaign(orbit, [1e-3], range(200), workers=4, bound=10.0)
    assert len(result.rows) == 200
    assert result.passed
    assert result.max_ratio <= 10.0
    assert not math.isnan(result.max_interior_ratio)


@pytest.mark.parametrize("command, text, outputs", [
    ("orbits", "denominator = 3\n", ["orbits.csv", "orbits.txt"]),
    ("adversary", "lemma = 2\ntrials = 20\nsamples = 256\n", ["lemma2_trace.csv", "lemma2_summary.txt"]),
    ("adversary", "lemma = 4\nsystem = cat\nL = 1\ntrials = 10\nsamples = 256\n",
     ["lemma4_trace.csv", "lemma4_summary.txt"]),
    ("shadow", "seeds = 20\nd_values = 1e-4, 5e-5\nworkers = 4\n", ["shadow.csv", "shadow_summary.txt"]),
    ("glue-check", "system = cat\ndenominator = 3\npsi_count = 8\nsamples = 256\n", ["glue_check.csv"]),
])
def test_repeated_runs_are_byte_identical(tmp_path, command, text, outputs):
    config = tmp_path / "run.cfg"
    config.write_text(text)
    runs = []
    for name in ("first", "second"):
        out = tmp_path / name
        assert main([command, "--config", str(config), "--out", str(out), "--deterministic"]) == 0
        runs.append([(out / f).read_bytes() for f in outputs])
    assert runs[0] == runs[1]
