import math

import numpy as np
import pytest

from invpershadow.adversary import (
    RotationDriftSpec,
    build_lemma2_adversary,
    build_lemma2_model,
    chart_trajectory,
    verify_lemma2_divergence,
    write_adversary_report,
)
from invpershadow.errors import AdversarySpecError
from invpershadow.pseudomethod import measure_defect_s
from invpershadow.shadowing import classify_periodic_point

TWO_CYCLE = dict(m=2, nu=2, chi=math.pi, radii=(1.25, 0.8))


def test_radius_product_must_be_one():
    with pytest.raises(AdversarySpecError, match="multiply to 1"):
        RotationDriftSpec(m=2, radii=(2.0, 0.3))


def test_rotation_order_must_divide_nu():
    with pytest.raises(AdversarySpecError, match="cos"):
        RotationDriftSpec(nu=3, chi=1.0)


def test_bottom_blocks_per_cycle_point():
    with pytest.raises(AdversarySpecError):
        RotationDriftSpec(bottom=(2.0, 3.0))
    assert RotationDriftSpec(bottom=(3.0,)).dim == 3


def test_two_cycle_model_has_unit_modulus_on_rotation_plane():
    model = build_lemma2_model(RotationDriftSpec(**TWO_CYCLE))
    top = model.orbit.monodromy()[:2, :2]
    np.testing.assert_allclose(np.abs(np.linalg.eigvals(top)), [1.0, 1.0], rtol=1e-12)
    assert not classify_periodic_point(model.orbit).hyperbolic


def test_default_d_respects_the_drift_budget():
    spec = RotationDriftSpec(**TWO_CYCLE)
    assert spec.super_period * spec.default_d < spec.eps / 3.0
    with pytest.raises(AdversarySpecError):
        build_lemma2_adversary(build_lemma2_model(spec), d=spec.eps)


def test_drift_telescopes_over_one_super_period(sampler):
    spec = RotationDriftSpec(**TWO_CYCLE)
    model = build_lemma2_model(spec)
    adversary = build_lemma2_adversary(model, sampler=sampler, count=64)
    starts = np.array([[0.0, 0.0], [0.2 * spec.eps, -0.1 * spec.eps]])
    traj = chart_trajectory(adversary, model.orbit, starts, spec.super_period)
    shift = traj[-1] - traj[0]
    np.testing.assert_allclose(shift[0], shift[1], atol=1e-12)
    assert np.linalg.norm(shift[0]) == pytest.approx(spec.super_period * spec.default_d / (2 * spec.R ** spec.m))


@pytest.mark.parametrize("params", [dict(), TWO_CYCLE, dict(chi=0.0)])
def test_every_trajectory_leaves_the_eps_ball(params, sampler):
    spec = RotationDriftSpec(**params)
    model = build_lemma2_model(spec)
    adversary = build_lemma2_adversary(model, sampler=sampler, count=64)
    report = verify_lemma2_divergence(adversary, model, spec.default_d, trials=20, sampler=sampler)
    assert report.passed
    assert report.identity_error <= 1e-10
    assert abs(report.observed_cycle - report.predicted_cycle) <= 1
    assert measure_defect_s(adversary, sampler, 128) <= adversary.claimed_defect


def test_report_files(tmp_path, sampler):
    spec = RotationDriftSpec()
    model = build_lemma2_model(spec)
    adversary = build_lemma2_adversary(model, sampler=sampler, count=64)
    report = verify_lemma2_divergence(adversary, model, spec.default_d, trials=5, sampler=sampler)
    csv_path, summary_path = write_adversary_report(tmp_path, "lemma2", spec.as_fields(), report.as_fields(),
                                                    report.trace)
    assert "k,pr_norm,lower_bound,inner_region" in csv_path.read_text()
    assert "passed: 1" in summary_path.read_text().splitlines()
