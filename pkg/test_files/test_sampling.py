import numpy as np

from invpershadow.sampling import FocusRegion, PointSampler
from invpershadow.space import ModelSpace


def test_sphere_samples_have_the_requested_radius(sampler):
    S = sampler.sphere(3, 0.25, 64)
    np.testing.assert_allclose(np.linalg.norm(S, axis=1), 0.25, rtol=1e-12)


def test_ball_samples_stay_inside(sampler):
    B = sampler.ball(2, 0.1, 256)
    assert B.shape == (256, 2)
    assert np.all(np.linalg.norm(B, axis=1) <= 0.1)


def test_torus_cover_lies_in_the_unit_cube(sampler):
    X = sampler.cover(ModelSpace.torus(2), 500)
    assert np.all((X >= 0.0) & (X < 1.0))


def test_euclidean_cover_spans_the_signed_cube(sampler):
    X = sampler.cover(ModelSpace.euclidean(2), 500)
    assert X.min() < -0.9 and X.max() > 0.9


def test_samples_are_deterministic_and_nested():
    space = ModelSpace.torus(2)
    a = PointSampler(seed=3).cover(space, 100)
    b = PointSampler(seed=3).cover(space, 200)
    np.testing.assert_array_equal(a, b[:100])
    assert not np.array_equal(a, PointSampler(seed=4).cover(space, 100))


def test_focus_region_adds_ball_and_shells(sampler):
    focus = FocusRegion(centers=np.array([[0.5, 0.5]]), ball_radius=0.01, shell_radii=(0.005, 0.01))
    X = sampler.points(ModelSpace.torus(2), 64, focus)
    assert X.shape == (64 * 4, 2)
    near = np.linalg.norm(X[64:] - 0.5, axis=1)
    assert np.all(near <= 0.01 + 1e-15)
