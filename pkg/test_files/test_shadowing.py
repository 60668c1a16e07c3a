import math

import numpy as np
import pytest

from invpershadow.adversary import JordanDriftSpec, build_lemma3_model
from invpershadow.campaigns import random_trig_method
from invpershadow.errors import NonConvergenceError, NonhyperbolicOrbitError
from invpershadow.orbits import PeriodicOrbit
from invpershadow.pseudomethod import drift_method, exact_method, family_method
from invpershadow.sampling import PointSampler
from invpershadow.shadowing import (
    PerronShadowingSolver,
    ShadowingParams,
    classify_periodic_point,
    clustered_moduli,
    compute_splitting,
    defect_near_orbit,
    estimate_lipschitz_constant,
    find_shadowing_trajectory,
    lipschitz_bound,
    sampled_decay_ratio,
    uniform_constants,
)
from invpershadow.systems import linear_system, planar_rotation

GOLDEN_CONTRACTION = (3.0 - math.sqrt(5.0)) / 2.0


def test_cat_fixed_point_is_hyperbolic(cat_fixed_point):
    verdict = classify_periodic_point(cat_fixed_point)
    assert verdict.hyperbolic
    np.testing.assert_allclose(verdict.moduli, [GOLDEN_CONTRACTION, 1.0 / GOLDEN_CONTRACTION], rtol=1e-12)


def test_rotation_is_nonhyperbolic():
    orbit = PeriodicOrbit.from_base(planar_rotation(np.pi / 2), np.zeros(2), 1)
    verdict = classify_periodic_point(orbit)
    assert not verdict.hyperbolic
    assert verdict.witness_modulus == pytest.approx(1.0)


def test_jordan_model_is_nonhyperbolic():
    assert not classify_periodic_point(build_lemma3_model(JordanDriftSpec(l=2))).hyperbolic


def test_defective_eigenvalues_are_clustered():
    moduli = clustered_moduli(np.array([1.0 + 1e-8, 1.0 - 1e-8, 3.0]))
    np.testing.assert_allclose(moduli, [1.0, 1.0, 3.0], atol=1e-15)


def test_cat_splitting_constants(cat_fixed_point):
    splitting = compute_splitting(cat_fixed_point)
    assert splitting.lam == pytest.approx(GOLDEN_CONTRACTION, abs=1e-9)
    assert splitting.C == 1.0
    assert splitting.stable_dim == 1


def test_orthogonal_saddle_constants(saddle):
    splitting = compute_splitting(saddle)
    assert splitting.C == 1.0
    assert splitting.lam == pytest.approx(0.5)
    assert lipschitz_bound(splitting.C, splitting.lam) == pytest.approx(6.0)
    assert estimate_lipschitz_constant(saddle, splitting).L == pytest.approx(6.0)


def test_strong_saddle_lipschitz_bound():
    orbit = PeriodicOrbit.from_base(linear_system(np.diag([10.0, 0.1])), np.zeros(2), 1)
    assert estimate_lipschitz_constant(orbit).L == pytest.approx(22.0 / 9.0)


def test_splitting_refuses_nonhyperbolic_orbits():
    orbit = PeriodicOrbit.from_base(planar_rotation(1.0), np.zeros(2), 1)
    with pytest.raises(NonhyperbolicOrbitError) as info:
        compute_splitting(orbit)
    assert info.value.witness_modulus == pytest.approx(1.0)


def test_three_cycle_splitting_is_invariant(cat_three_cycle, sampler):
    splitting = compute_splitting(cat_three_cycle)
    assert splitting.span_margin() > 1e-8
    assert splitting.invariance_error() < 1e-8
    assert sampled_decay_ratio(splitting, sampler) <= 1.0 + 1e-12


def test_uniform_constants(cat_fixed_point, cat_three_cycle):
    C, lam = uniform_constants([cat_fixed_point, cat_three_cycle])
    assert lam == pytest.approx(GOLDEN_CONTRACTION, abs=1e-9)
    assert C >= 1.0
    with pytest.raises(ValueError):
        uniform_constants([])


def test_params_validation():
    with pytest.raises(ValueError):
        ShadowingParams(L=0.5, d0=1.0)


def test_cat_d0(cat_fixed_point):
    params = estimate_lipschitz_constant(cat_fixed_point)
    stretch = (3.0 + math.sqrt(5.0)) / 2.0
    assert params.d0 == pytest.approx(0.125 / stretch / (4.0 * params.L))


def test_exact_method_is_shadowed_by_the_orbit(cat, cat_fixed_point):
    solution = PerronShadowingSolver(cat_fixed_point).solve(exact_method(cat))
    assert solution.sup_distance == 0.0
    assert solution.iterations == 1


def test_constant_drift_has_closed_form_shadow(cat, cat_fixed_point):
    # v = (I - A)^{-1} c with c = (1e-5, 0) gives v = (0, -1e-5)
    traj = find_shadowing_trajectory(cat_fixed_point, drift_method(cat, [1e-5, 0.0]))
    assert traj.residual() <= 1e-12
    np.testing.assert_allclose(cat.space.log(np.zeros(2), traj.point(0)), [0.0, -1e-5], atol=1e-14)


def test_shadow_distance_within_lipschitz_bound(cat, cat_three_cycle):
    solver = PerronShadowingSolver(cat_three_cycle)
    d = 1e-4
    solution = solver.solve(random_trig_method(cat, d, seed=11))
    assert solution.residual <= 1e-12
    assert solution.sup_distance <= solver.params.L * d


def test_halving_the_defect_halves_the_distance(cat, cat_fixed_point):
    solver = PerronShadowingSolver(cat_fixed_point)
    full = solver.solve(random_trig_method(cat, 1e-4, seed=4)).sup_distance
    half = solver.solve(random_trig_method(cat, 5e-5, seed=4)).sup_distance
    assert half / full == pytest.approx(0.5, rel=0.05)


def test_defect_above_d0_is_refused(cat, cat_fixed_point):
    with pytest.raises(NonConvergenceError):
        PerronShadowingSolver(cat_fixed_point).solve(drift_method(cat, [1e-2, 0.0]))


def test_window_must_be_a_multiple_of_both_periods(cat, cat_three_cycle):
    method = random_trig_method(cat, 1e-4, seed=1, method_period=2)
    with pytest.raises(ValueError, match="lcm"):
        PerronShadowingSolver(cat_three_cycle).solve(method, window=9)
    assert PerronShadowingSolver(cat_three_cycle).solve(method, window=(0, 12)).trajectory.window == (0, 12)


def test_defect_near_orbit_of_a_drift(cat, cat_three_cycle, sampler):
    method = drift_method(cat, [3e-4, 4e-4])
    assert defect_near_orbit(method, cat_three_cycle, sampler, 64) == pytest.approx(5e-4, rel=1e-9)


def test_understated_defect_is_measured_and_refused(cat, cat_fixed_point):
    method = family_method(cat, [lambda x: cat.space.exp(cat(x), np.array([1e-2, 0.0]))],
                           claimed_defect=1e-5, name="understated")
    with pytest.raises(NonConvergenceError, match="exceeds d0"):
        PerronShadowingSolver(cat_fixed_point, sampler=PointSampler(seed=2)).solve(method)


def test_interior_distance_is_bounded_by_the_sup(cat, cat_three_cycle):
    solution = PerronShadowingSolver(cat_three_cycle).solve(random_trig_method(cat, 1e-4, seed=8))
    assert 0.0 < solution.interior_sup_distance <= solution.sup_distance
