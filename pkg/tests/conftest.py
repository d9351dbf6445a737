"""Shared fixtures: small discretizations that keep the suite fast."""

import math

import numpy as np
import pytest

from travwave.basis import RadialSpec, SphereSpec, TorusSpec


@pytest.fixture(scope="session")
def circle():
    """1-d torus of circumference 2*pi, the workhorse spec."""
    return TorusSpec(n=1, period=2 * math.pi, grid_points=64)


@pytest.fixture(scope="session")
def torus2():
    return TorusSpec(n=2, period=1.0, grid_points=16)


@pytest.fixture(scope="session")
def sphere2():
    return SphereSpec.for_degree(2, 8)


@pytest.fixture(scope="session")
def sphere3():
    return SphereSpec.for_degree(3, 6)


@pytest.fixture(scope="session")
def halfline_flat():
    """Flat half-line [0, 40] with unit cross-section weight."""
    return RadialSpec.uniform(40.0, 160, weight_fn=lambda r: np.ones_like(r))


@pytest.fixture(scope="session")
def halfline_quadratic():
    """Growing end A(r) = 1 + r^2 in ambient dimension 3."""
    return RadialSpec.uniform(
        40.0, 200, weight_fn=lambda r: 1.0 + r**2, dimension=3
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
