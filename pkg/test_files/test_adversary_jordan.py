import math

import numpy as np
import pytest

from invpershadow.adversary import (
    JordanDriftSpec,
    build_lemma3_adversary,
    build_lemma3_model,
    chart_trajectory,
    verify_lemma3_divergence,
)
from invpershadow.adversary.jordan_drift import adversarial_start
from invpershadow.errors import AdversarySpecError
from invpershadow.pseudomethod import measure_defect_s

D = 1e-3


def test_spec_validation():
    with pytest.raises(AdversarySpecError, match="unit vector"):
        JordanDriftSpec(w=(1.0, 1.0))
    with pytest.raises(AdversarySpecError, match="hyperbolic"):
        JordanDriftSpec(tail=(1.0,))
    with pytest.raises(AdversarySpecError):
        JordanDriftSpec(L=0)


def test_jordan_block_layout():
    spec = JordanDriftSpec(l=2, theta=math.pi / 2)
    H = spec.H1
    np.testing.assert_allclose(H[:2, :2], spec.Q)
    np.testing.assert_allclose(H[2:, 2:], spec.Q)
    np.testing.assert_array_equal(H[:2, 2:], np.eye(2))
    np.testing.assert_array_equal(H[2:, :2], np.zeros((2, 2)))
    assert JordanDriftSpec(l=2, tail=(3.0,)).matrix.shape == (5, 5)


def test_method_period():
    assert JordanDriftSpec(theta=math.pi / 2).method_period() == 4
    assert JordanDriftSpec(theta=1.0, L=10).method_period() == 201


def test_defect_must_fit_the_gluing_radius():
    spec = JordanDriftSpec(L=10)
    with pytest.raises(AdversarySpecError, match="r_bar/10"):
        build_lemma3_adversary(spec, 2e-3)


@pytest.mark.parametrize("l, theta", [(1, math.pi / 2), (2, math.pi / 2), (1, 1.0)])
def test_every_start_leaves_the_4Ld_ball(l, theta, sampler):
    spec = JordanDriftSpec(l=l, theta=theta, L=10)
    orbit = build_lemma3_model(spec)
    adversary = build_lemma3_adversary(spec, D, orbit, sampler, count=64)
    report = verify_lemma3_divergence(adversary, spec, D, trials=100, orbit=orbit, sampler=sampler)
    assert report.passed
    assert report.exited == report.trials
    assert report.max_exit_step <= 20 * spec.L
    assert report.identity_error <= 1e-12
    assert report.lower_bound_violations == 0


def test_exit_step_from_the_fixed_point(sampler):
    spec = JordanDriftSpec(l=1, theta=math.pi / 2, L=10)
    adversary = build_lemma3_adversary(spec, D, sampler=sampler, count=64)
    report = verify_lemma3_divergence(adversary, spec, D, trials=10, sampler=sampler)
    assert report.exit_step_zero == 8 * spec.L + 1


def test_adversarial_start_exits_by_16L_plus_one(sampler):
    spec = JordanDriftSpec(l=1, theta=math.pi / 2, L=10)
    orbit = build_lemma3_model(spec)
    adversary = build_lemma3_adversary(spec, D, orbit, sampler, count=64)
    q = adversarial_start(spec, D)
    assert np.linalg.norm(q) == pytest.approx(4 * spec.L * D)
    norms = np.linalg.norm(chart_trajectory(adversary, orbit, q, 20 * spec.L)[:, 0, :], axis=-1)
    first_exit = int(np.argmax(norms[1:] > 4 * spec.L * D)) + 1
    assert 16 * spec.L <= first_exit <= 16 * spec.L + 1


def test_measured_defect_within_claim(sampler):
    spec = JordanDriftSpec(l=1, theta=math.pi / 2, L=10)
    adversary = build_lemma3_adversary(spec, D, sampler=sampler, count=64)
    assert adversary.claimed_defect == pytest.approx(2 * D)
    assert measure_defect_s(adversary, sampler, 256) <= 2 * D
