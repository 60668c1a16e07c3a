import numpy as np
import pytest

from invpershadow.campaigns import (
    CAMPAIGN_HEADER,
    _normalisation_points,
    field_peak,
    random_trig_field,
    random_trig_method,
    run_shadow_campaign,
    write_campaign_csv,
)
from invpershadow.reports import read_csv_body
from invpershadow.run_tracker import RunTracker
from invpershadow.sampling import PointSampler


def test_trig_method_defect_reaches_d_on_the_grid(cat):
    d = 1e-4
    method = random_trig_method(cat, d, seed=3)
    grid = _normalisation_points(cat)
    fX = cat(grid)
    for k in range(method.period):
        grid_max = np.max(cat.space.dist(method(k, grid), fX))
        assert grid_max <= d * (1 + 1e-12)
        assert grid_max >= d * (1 - 2e-3)


@pytest.mark.parametrize("seed", range(10))
def test_trig_method_defect_holds_off_the_grid(cat, seed):
    d = 1e-4
    method = random_trig_method(cat, d, seed=seed)
    X = PointSampler(3).cover(cat.space, 20000)
    fX = cat(X)
    for k in range(method.period):
        assert np.max(cat.space.dist(method(k, X), fX)) / d <= 1 + 1e-9


def test_field_peak_is_at_least_the_grid_maximum(cat):
    grid = _normalisation_points(cat)
    for seed in range(5):
        field = random_trig_field(2, np.random.default_rng(seed))
        grid_max = float(np.max(np.linalg.norm(field(grid), axis=-1)))
        peak = field_peak(field, cat, grid)
        assert peak >= grid_max
        assert peak <= grid_max * 1.01


def test_trig_method_is_seeded(cat):
    x = np.array([[0.1, 0.7], [0.4, 0.2]])
    a = random_trig_method(cat, 1e-4, seed=5)
    b = random_trig_method(cat, 1e-4, seed=5)
    c = random_trig_method(cat, 1e-4, seed=6)
    np.testing.assert_array_equal(a(0, x), b(0, x))
    assert not np.array_equal(a(0, x), c(0, x))


def test_zero_defect_gives_the_exact_method(cat):
    method = random_trig_method(cat, 0.0, seed=1)
    assert method.claimed_defect == 0.0
    assert method.name == "exact"
    with pytest.raises(ValueError):
        random_trig_method(cat, -1e-3, seed=1)


def test_campaign_ratios_stay_below_the_bound(cat_fixed_point):
    tracker = RunTracker("test-campaign", bound=10.0)
    result = run_shadow_campaign(cat_fixed_point, [1e-4], range(6), workers=3, tracker=tracker, bound=10.0)
    assert result.passed
    assert [row.seed for row in result.rows] == list(range(6))
    assert result.max_ratio <= 10.0
    assert tracker.get_session_summary()["converged_runs"] == 6


def test_campaign_rows_do_not_depend_on_worker_count(tmp_path, cat_three_cycle):
    serial = run_shadow_campaign(cat_three_cycle, [1e-4, 5e-5], range(3), workers=1)
    parallel = run_shadow_campaign(cat_three_cycle, [1e-4, 5e-5], range(3), workers=4)
    a = write_campaign_csv(tmp_path / "serial.csv", serial)
    b = write_campaign_csv(tmp_path / "parallel.csv", parallel)
    assert read_csv_body(a) == read_csv_body(b)
    assert [(row.d, row.seed) for row in serial.rows][:3] == [(1e-4, 0), (1e-4, 1), (1e-4, 2)]


def test_exact_campaign_has_zero_ratios(cat_fixed_point):
    result = run_shadow_campaign(cat_fixed_point, [0.0], range(3), workers=2)
    assert all(row.ratio == 0.0 for row in result.rows)
    assert result.passed


def test_defect_above_d0_fails_every_seed(cat_fixed_point):
    result = run_shadow_campaign(cat_fixed_point, [1e-2], range(3), workers=2, bound=10.0)
    assert not any(row.converged for row in result.rows)
    assert not result.passed


def test_campaign_csv_reports_the_interior_distance(tmp_path, cat_three_cycle):
    result = run_shadow_campaign(cat_three_cycle, [1e-4], range(4), workers=2)
    assert "interior_sup_distance" in CAMPAIGN_HEADER
    for row in result.rows:
        assert row.converged
        assert 0.0 <= row.interior_sup_distance <= row.sup_distance
    assert result.max_interior_ratio <= result.max_ratio
    path = write_campaign_csv(tmp_path / "shadow.csv", result)
    header, *body = read_csv_body(path).splitlines()
    column = header.split(",").index("interior_sup_distance")
    assert [float(line.split(",")[column]) for line in body] == [row.interior_sup_distance for row in result.rows]


def test_failed_runs_record_the_reason(cat_fixed_point):
    tracker = RunTracker("test-failure-reason")
    run_shadow_campaign(cat_fixed_point, [1e-2], range(2), workers=1, tracker=tracker)
    assert len(tracker.session_runs) == 2
    for entry in tracker.session_runs:
        assert not entry["converged"]
        assert "d0" in entry["context"]["reason"]
