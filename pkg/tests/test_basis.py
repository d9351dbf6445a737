"""Transforms, quadrature and norm identities on all three manifold families."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from travwave.basis import (
    BasisError,
    RadialSpec,
    SphereSpec,
    SpectralField,
    TorusSpec,
    constant_field,
    finite_difference_weights,
    from_grid,
    grad_norm_sq,
    inner,
    l2_norm_sq,
    mean_value,
    mode_field,
    norms,
    power_integral,
    random_band_limited,
    to_grid,
    unit_sphere_volume,
)


# ---------------------------------------------------------------------------
# Torus
# ---------------------------------------------------------------------------


def test_torus_roundtrip(circle, rng):
    coeffs = rng.standard_normal(circle.n_modes) + 1j * rng.standard_normal(circle.n_modes)
    back = circle.analyze(circle.synthesize(coeffs))
    assert np.max(np.abs(back - coeffs)) < 1e-12


def test_torus_parseval(circle, rng):
    u = random_band_limited(circle, rng)
    grid_l2 = circle.integrate(np.abs(to_grid(u)) ** 2).real
    assert abs(grid_l2 - l2_norm_sq(u)) < 1e-12 * max(1.0, grid_l2)


def test_torus_laplacian_eigenvalues():
    spec = TorusSpec(n=1, period=3.0, grid_points=16)
    m = spec.mode_numbers[:, 0]
    expected = (2 * math.pi * m / 3.0) ** 2
    assert np.allclose(spec.laplacian_eigs, expected, atol=1e-12)


def test_torus_metric_scale_volume_and_eigs():
    plain = TorusSpec(n=2, period=1.0, grid_points=8)
    scaled = TorusSpec(n=2, period=1.0, grid_points=8, metric_scale=4.0)
    assert math.isclose(scaled.volume(), 4.0 * plain.volume())
    assert np.allclose(scaled.laplacian_eigs, plain.laplacian_eigs / 4.0)


def test_mode_field_gradient_norm():
    # |grad e^(2 pi i m x / k)|^2 integrates to Vol * (2 pi m / k)^2
    spec = TorusSpec(n=1, period=2 * math.pi, grid_points=32)
    u = mode_field(spec, 3)  # m = 3
    m = spec.mode_numbers[3, 0]
    assert math.isclose(grad_norm_sq(u), spec.volume() * float(m) ** 2, rel_tol=1e-12)


def test_power_integral_constant():
    spec = TorusSpec(n=1, period=5.0, grid_points=16)
    u = constant_field(spec, 2.0)
    # integral |2|^4 over a circle of circumference 5
    assert math.isclose(power_integral(u, 3.0), 16.0 * 5.0, rel_tol=1e-12)


def test_mean_value_picks_zero_mode(circle, rng):
    u = random_band_limited(circle, rng)
    assert abs(mean_value(u) - u.coeffs[0]) < 1e-12


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=4, period=1.0, grid_points=16),
        dict(n=1, period=-1.0, grid_points=16),
        dict(n=1, period=1.0, grid_points=15),
        dict(n=1, period=1.0, grid_points=4),
        dict(n=1, period=1.0, grid_points=16, metric_scale=0.0),
    ],
)
def test_torus_rejects_bad_parameters(kwargs):
    with pytest.raises(BasisError):
        TorusSpec(**kwargs)


def test_field_length_mismatch(circle):
    with pytest.raises(BasisError):
        SpectralField(circle, np.zeros(circle.n_modes + 1))


def test_fields_on_different_bases_do_not_mix(circle, torus2):
    with pytest.raises(BasisError):
        _ = constant_field(circle) + constant_field(torus2)


@given(a=st.complex_numbers(max_magnitude=10), b=st.complex_numbers(max_magnitude=10))
@settings(max_examples=25, deadline=None)
def test_analyze_is_linear(a, b):
    spec = TorusSpec(n=1, period=1.0, grid_points=16)
    rng = np.random.default_rng(7)
    u = rng.standard_normal(spec.grid_shape) + 1j * rng.standard_normal(spec.grid_shape)
    v = rng.standard_normal(spec.grid_shape) + 1j * rng.standard_normal(spec.grid_shape)
    lhs = spec.analyze(a * u + b * v)
    rhs = a * spec.analyze(u) + b * spec.analyze(v)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * (1 + abs(a) + abs(b))


@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_norm_triple_positive_and_ordered(seed):
    spec = TorusSpec(n=1, period=1.0, grid_points=16)
    u = random_band_limited(spec, np.random.default_rng(seed))
    t = norms(u, 3.0)
    assert t.l2 >= 0 and t.lp1 >= 0
    # the H^1 norm dominates L^2 by construction
    assert t.h1 >= t.l2 - 1e-12


# ---------------------------------------------------------------------------
# Sphere
# ---------------------------------------------------------------------------


def test_sphere_mode_counts(sphere2, sphere3):
    L2, L3 = sphere2.max_degree, sphere3.max_degree
    assert sphere2.n_modes == (L2 + 1) ** 2
    assert sphere3.n_modes == (L3 + 1) * (L3 + 2) * (2 * L3 + 3) // 6


def test_sphere_constant_norm(sphere2, sphere3):
    for spec in (sphere2, sphere3):
        u = constant_field(spec, 1.5)
        assert math.isclose(l2_norm_sq(u), 1.5**2 * spec.volume(), rel_tol=1e-10)
        assert grad_norm_sq(u) < 1e-18


def test_sphere_roundtrip(sphere2, rng):
    coeffs = rng.standard_normal(sphere2.n_modes) + 1j * rng.standard_normal(sphere2.n_modes)
    u = SpectralField(sphere2, coeffs)
    v = from_grid(sphere2, to_grid(u))
    assert np.max(np.abs(v.coeffs - u.coeffs)) < 1e-10


def test_sphere_quadrature_is_orthonormal(sphere2, sphere3):
    """Distinct basis modes are L^2-orthogonal under the quadrature rule."""
    for spec in (sphere2, sphere3):
        picks = [0, 1, spec.n_modes // 2, spec.n_modes - 1]
        for i in picks:
            for j in picks:
                val = inner(mode_field(spec, i), mode_field(spec, j))
                want = 1.0 if i == j else 0.0
                assert abs(val - want) < 1e-10


def test_sphere_volume_matches_unit_sphere(sphere2, sphere3):
    assert math.isclose(sphere2.volume(), unit_sphere_volume(2), rel_tol=1e-12)
    assert math.isclose(sphere3.volume(), unit_sphere_volume(3), rel_tol=1e-12)
    assert math.isclose(unit_sphere_volume(2), 4 * math.pi, rel_tol=1e-12)
    assert math.isclose(unit_sphere_volume(3), 2 * math.pi**2, rel_tol=1e-12)


def test_sphere_rejects_bad_parameters():
    with pytest.raises(BasisError):
        SphereSpec.for_degree(4, 6)
    with pytest.raises(BasisError):
        SphereSpec(2, 6, quad_theta=3, quad_phi=40)  # grid too coarse for p_max


def test_sphere_power_integral_constant(sphere2):
    u = constant_field(sphere2, 2.0)
    assert math.isclose(power_integral(u, 2.0), 8.0 * 4 * math.pi, rel_tol=1e-10)


# ---------------------------------------------------------------------------
# Radial half-line
# ---------------------------------------------------------------------------


def test_fornberg_central_weights():
    w = finite_difference_weights(0.0, np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), 1)
    assert np.allclose(w, [1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12], atol=1e-13)


def test_radial_derivative_exact_on_quartics(halfline_flat):
    r, D = halfline_flat.grid, halfline_flat.first_derivative
    assert np.max(np.abs(D @ np.ones_like(r))) < 1e-10
    assert np.max(np.abs(D @ r - 1.0)) < 1e-10
    # five-point rule differentiates degree-4 polynomials exactly
    assert np.max(np.abs(D @ r**4 - 4 * r**3)) < 1e-7


def test_radial_derivative_fourth_order():
    errs = []
    for n in (101, 201):
        spec = RadialSpec.uniform(10.0, n, weight_fn=lambda r: np.ones_like(r))
        r = spec.grid
        err = np.max(np.abs(spec.first_derivative @ np.cos(r) + np.sin(r)))
        errs.append(err)
    assert errs[1] < errs[0] / 12.0  # ~16x for a 4th-order scheme


def test_radial_quadrature_and_measure(halfline_flat):
    spec = halfline_flat
    # trapezoid weights integrate 1 over [0, r_max]
    assert math.isclose(float(np.sum(spec.quad_weights)), spec.r_max, rel_tol=1e-12)
    assert np.all(spec.measure >= 0)
    u = constant_field(spec, 3.0)
    assert math.isclose(l2_norm_sq(u), 9.0 * spec.r_max, rel_tol=1e-12)


def test_radial_measure_includes_cross_section():
    spec = RadialSpec.uniform(
        5.0, 41, weight_fn=lambda r: np.ones_like(r), cross_section_volume=7.0
    )
    assert math.isclose(l2_norm_sq(constant_field(spec, 1.0)), 7.0 * 5.0, rel_tol=1e-12)


def test_radial_stiffness_symmetric_psd(halfline_quadratic, rng):
    K = halfline_quadratic.stiffness
    assert np.max(np.abs(K - K.T)) < 1e-10
    for _ in range(5):
        v = rng.standard_normal(K.shape[0])
        assert v @ K @ v > -1e-8 * (v @ v)


def test_radial_gradient_quadratic_form(halfline_flat):
    # |d/dr sin(pi r / r_max)|^2 * A dr with A = 1: value pi^2 / (2 r_max)
    spec = halfline_flat
    r = spec.grid
    u = SpectralField(spec, np.sin(math.pi * r / spec.r_max).astype(complex))
    exact = math.pi**2 / (2.0 * spec.r_max)
    assert math.isclose(grad_norm_sq(u), exact, rel_tol=1e-5)


def test_radial_rejects_nonpositive_weight():
    with pytest.raises(BasisError):
        RadialSpec.uniform(40.0, 64, weight_fn=lambda r: r**2, dimension=3)


def test_radial_synthesize_is_identity(halfline_flat, rng):
    vals = rng.standard_normal(halfline_flat.n_modes)
    assert np.allclose(halfline_flat.synthesize(vals), vals)
    assert np.allclose(halfline_flat.analyze(vals), vals)


def test_random_band_limited_honors_dirichlet(halfline_flat, rng):
    u = random_band_limited(halfline_flat, rng)
    assert abs(u.coeffs[-1]) == 0.0


def test_field_arithmetic(circle, rng):
    u = random_band_limited(circle, rng)
    v = random_band_limited(circle, rng)
    w = 2.0 * u - v + (-u)
    assert np.allclose(w.coeffs, u.coeffs - v.coeffs)
    before = u.coeffs.copy()
    _ = u + v
    assert np.array_equal(u.coeffs, before)  # arithmetic never mutates
