"""Rotation generator on spherical-harmonic eigenspaces: exact spectra."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from travwave.harmonic import (
    circular_vector_check,
    drift_spectrum,
    harmonic_space_dim,
    harmonic_subspace,
    kernel_dimensions,
    quadratic_form_report,
    semidefinite_scan,
)


def test_harmonic_space_dims_closed_form():
    for k in range(1, 8):
        assert harmonic_space_dim(2, k) == 2 * k + 1
        assert harmonic_space_dim(3, k) == (k + 1) ** 2
    # general two-binomial formula, spot-checked on S^4
    assert harmonic_space_dim(4, 2) == 14
    assert harmonic_space_dim(4, 3) == 30


@pytest.mark.parametrize("n,k", [(2, 1), (2, 4), (3, 2), (3, 5), (4, 3)])
def test_subspace_dimension_matches(n, k):
    sub = harmonic_subspace(n, k)
    assert sub.dim == harmonic_space_dim(n, k)
    assert sub.laplace_eigenvalue() == pytest.approx(k * (k + n - 1))


def test_drift_spectrum_is_integer_ladder():
    for n in (2, 3, 4):
        for k in (1, 2, 3, 4):
            js = drift_spectrum(harmonic_subspace(n, k), speed=1.0)
            rounded = np.round(js)
            assert np.max(np.abs(js - rounded)) < 1e-8
            assert np.min(rounded) == -k and np.max(rounded) == k


def test_drift_multiplicities_on_s3():
    # on S^3 the azimuthal value j occurs k + 1 - |j| times in degree k
    k = 4
    js = np.round(drift_spectrum(harmonic_subspace(3, k))).astype(int)
    for j in range(-k, k + 1):
        assert int(np.sum(js == j)) == k + 1 - abs(j)


def test_drift_spectrum_scales_with_speed():
    sub = harmonic_subspace(2, 3)
    assert np.allclose(drift_spectrum(sub, speed=2.5), 2.5 * drift_spectrum(sub))


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_circular_vector_is_exact_eigenvector(n, k):
    rep = circular_vector_check(harmonic_subspace(n, k), speed=1.3)
    assert rep.eigen_residual < 1e-10
    assert rep.harmonic_residual < 1e-10
    assert rep.membership_residual < 1e-10
    assert rep.eigenvalue == pytest.approx(1.3j * k)


def test_form_minimum_matches_prediction():
    for n in (2, 3, 4):
        for k in (1, 2, 3):
            for c in (0.0, 0.5, float(n - 1)):
                rep = quadratic_form_report(harmonic_subspace(n, k), c)
                assert rep.agreement() < 1e-10


def test_direct_assembly_cross_validates():
    sub = harmonic_subspace(3, 3)
    fast = quadratic_form_report(sub, 1.7)
    slow = quadratic_form_report(sub, 1.7, direct=True)
    assert abs(fast.min_eig - slow.min_eig) < 1e-8


def test_threshold_coupling_has_one_dimensional_kernel():
    # at coupling n - 1 the bottom touches zero exactly once per degree
    for n in (2, 3, 4):
        dims = kernel_dimensions(n, range(1, 5), float(n - 1))
        assert dims == {1: 1, 2: 1, 3: 1, 4: 1}


def test_below_threshold_is_definite():
    for n in (2, 3):
        for k in (1, 2, 3):
            rep = quadratic_form_report(harmonic_subspace(n, k), float(n - 1) - 0.25)
            assert rep.semidefinite and rep.min_eig > 0.0


def test_above_threshold_fails():
    for n in (2, 3):
        rep = quadratic_form_report(harmonic_subspace(n, 2), float(n - 1) + 0.5)
        assert not rep.semidefinite
        assert rep.min_eig == pytest.approx(-1.0)  # k(n-1) - ck at j = k


def test_scan_covers_grid_and_flags_correctly():
    reports = semidefinite_scan((2, 3), 4, (0.0, 1.0, 2.5))
    assert len(reports) == 2 * 4 * 3
    for rep in reports:
        assert rep.agreement() < 1e-10
        threshold = rep.sphere_dim - 1.0
        if rep.coupling <= threshold:
            assert rep.semidefinite
        elif rep.coupling > threshold + 1e-9 and rep.degree >= 1:
            assert not rep.semidefinite


@given(
    c=st.floats(min_value=0.0, max_value=3.0, allow_nan=False),
    k=st.integers(min_value=1, max_value=5),
)
@settings(max_examples=40, deadline=None)
def test_prediction_matches_for_arbitrary_coupling(c, k):
    rep = quadratic_form_report(harmonic_subspace(2, k), c)
    assert rep.agreement() < 1e-9
