import numpy as np
import pytest

from cominkowski import acceptance
from cominkowski.lamination import Cocycle, sample_boundary


@pytest.fixture(scope="session")
def octagon():
    return acceptance.octagon()


@pytest.fixture(scope="session")
def lam_a1(octagon):
    return acceptance.lamination([("a1", 1.0)])


@pytest.fixture(scope="session")
def tau_a1(lam_a1):
    return Cocycle.from_lamination(lam_a1)


@pytest.fixture(scope="session")
def b_a1(tau_a1):
    return sample_boundary(tau_a1, 2048)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_disk_points(rng, n, radius=0.9):
    r = radius * np.sqrt(rng.random(n))
    t = 2 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])
