import numpy as np
import pytest

from invpershadow.errors import ChartDomainError, InvalidOrbitError, NotToralAutomorphismError
from invpershadow.orbits import (
    PeriodicOrbit,
    export_orbits,
    find_rational_periodic_orbit,
    import_orbits,
    local_conjugate,
    remainder,
)
from invpershadow.systems import linear_system, perturbed_cat_map


def test_cat_fixed_point(cat):
    orbits = find_rational_periodic_orbit(cat, 1)
    assert len(orbits) == 1
    assert orbits[0].period == 1
    np.testing.assert_array_equal(orbits[0].base, [0.0, 0.0])


def test_cat_denominator_two_has_fixed_point_and_three_cycle(cat):
    orbits = find_rational_periodic_orbit(cat, 2)
    assert sorted(o.period for o in orbits) == [1, 3]
    cycle = next(o for o in orbits if o.period == 3)
    np.testing.assert_array_equal(cycle.base, [0.0, 0.5])
    assert cycle.fundamental_period == 3


def test_orbits_partition_the_grid(cat):
    orbits = find_rational_periodic_orbit(cat, 5)
    assert sum(o.period for o in orbits) == 25


def test_enumeration_needs_an_integer_automorphism():
    with pytest.raises(NotToralAutomorphismError):
        find_rational_periodic_orbit(perturbed_cat_map(0.1), 2)


def test_from_base_detects_fundamental_period(cat):
    orbit = PeriodicOrbit.from_base(cat, np.zeros(2), 3)
    assert orbit.period == 3
    assert orbit.fundamental_period == 1


def test_from_base_rejects_non_periodic_point(cat):
    with pytest.raises(InvalidOrbitError):
        PeriodicOrbit.from_base(cat, np.array([0.1, 0.2]), 1)


def test_monodromy_of_three_cycle(cat_three_cycle):
    B = cat_three_cycle.monodromy()
    np.testing.assert_allclose(B, np.linalg.matrix_power(np.array([[2.0, 1.0], [1.0, 1.0]]), 3))


def test_local_conjugate_of_linear_map_is_linear(cat_fixed_point):
    F = local_conjugate(cat_fixed_point, 0)
    v = np.array([0.01, -0.02])
    np.testing.assert_allclose(F(v), F.matrix @ v, atol=1e-15)
    assert np.linalg.norm(remainder(F, v)) < 1e-15


def test_local_conjugate_outside_chart_ball(cat_fixed_point):
    F = local_conjugate(cat_fixed_point, 0)
    with pytest.raises(ChartDomainError):
        F(np.array([0.2, 0.0]))


def test_perturbed_remainder_is_quadratic():
    orbit = PeriodicOrbit.from_base(perturbed_cat_map(0.05), np.zeros(2), 1)
    F = local_conjugate(orbit, 0)
    v = np.array([0.0, 1e-3])
    ratio = np.linalg.norm(F.remainder(v)) / np.linalg.norm(F.remainder(v / 2))
    assert ratio == pytest.approx(4.0, rel=1e-2)


def test_euclidean_fixed_point_has_unbounded_chart():
    orbit = PeriodicOrbit.from_base(linear_system(np.diag([2.0, 0.5])), np.zeros(2), 1)
    assert orbit.chart_radius == float("inf")


def test_orbit_records_survive_export_and_import(cat):
    orbits = find_rational_periodic_orbit(cat, 2)
    restored = import_orbits(export_orbits(orbits), cat)
    assert [o.period for o in restored] == [o.period for o in orbits]
    for a, b in zip(orbits, restored):
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.jacobians, b.jacobians)


def test_import_reports_the_bad_line(cat):
    text = "orbit\ndimension 2\nperiod one\n"
    with pytest.raises(InvalidOrbitError, match="line 3"):
        import_orbits(text, cat)


def test_import_revalidates_against_the_system(cat):
    text = export_orbits(find_rational_periodic_orbit(cat, 1)).replace("jacobian 0 2 1 1 1", "jacobian 0 3 1 1 1")
    with pytest.raises(InvalidOrbitError):
        import_orbits(text, cat)
