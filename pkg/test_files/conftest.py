import os
import sys

# Keep test runs off the rotating log file
os.environ.setdefault("INVPERSHADOW_LOG_TO_FILE", "0")
os.environ.setdefault("INVPERSHADOW_LOG_LEVEL", "WARNING")

# Add parent directory to path to import the package
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from invpershadow.orbits import PeriodicOrbit, find_rational_periodic_orbit
from invpershadow.sampling import PointSampler
from invpershadow.systems import cat_map, linear_system


@pytest.fixture
def cat():
    return cat_map()


@pytest.fixture
def cat_fixed_point(cat):
    return find_rational_periodic_orbit(cat, 1)[0]


@pytest.fixture
def cat_three_cycle(cat):
    return next(o for o in find_rational_periodic_orbit(cat, 2) if o.period == 3)


@pytest.fixture
def saddle():
    """Fixed point of diag(2, 1/2) in the plane."""
    return PeriodicOrbit.from_base(linear_system([[2.0, 0.0], [0.0, 0.5]]), np.zeros(2), 1)


@pytest.fixture
def sampler():
    return PointSampler(seed=7)
