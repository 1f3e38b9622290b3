import numpy as np
import pytest

from zermelo.randers import randers_from
from zermelo.riemannian import SpaceForm, affine_field


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def plane():
    return SpaceForm(2, 0.0, "cartesian")


@pytest.fixture
def half_wind(plane):
    """cartesian n=2 with the constant wind W = (1/2, 0)."""
    return randers_from(plane, affine_field(2, e=[0.5, 0.0]))


@pytest.fixture
def funk_disk(plane):
    """cartesian n=2 with W = -x/2 (k0 = 1/4)."""
    return randers_from(plane, affine_field(2, k0=0.25))
