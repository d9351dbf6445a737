"""Drift operators, quadratic forms, energies and coercivity diagnostics."""

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from travwave.basis import (
    RadialSpec,
    SpectralField,
    TorusSpec,
    constant_field,
    inner,
    l2_norm_sq,
    mode_field,
    power_integral,
    random_band_limited,
)
from travwave.operators import (
    InvalidPerturbation,
    OperatorError,
    RadialCrossSectionFlow,
    SphereRotation,
    TorusTranslation,
    apply_killing,
    apply_laplacian,
    coercivity_check,
    combine_killing,
    drift_symbol,
    energy_gradient_schroedinger,
    energy_gradient_wave,
    energy_schroedinger,
    energy_wave,
    flow_regime,
    form_schroedinger,
    form_wave,
    killing_sup_on_grid,
    nonlinear_term,
    schroedinger_operator,
    speed_bound,
    wave_form_energy_identity_gap,
    wave_operator,
)


# ---------------------------------------------------------------------------
# Drift symbols and generators
# ---------------------------------------------------------------------------


def test_torus_drift_symbol_closed_form():
    spec = TorusSpec(n=1, period=3.0, grid_points=16)
    omega = drift_symbol(spec, TorusTranslation((0.7,)))
    expected = 2 * math.pi * spec.mode_numbers[:, 0] * 0.7 / 3.0
    assert np.allclose(omega, expected, atol=1e-13)


def test_torus_drift_symbol_two_dim(torus2):
    omega = drift_symbol(torus2, TorusTranslation((0.2, -0.5)))
    m = torus2.mode_numbers
    assert np.allclose(omega, 2 * math.pi * (0.2 * m[:, 0] - 0.5 * m[:, 1]))


def test_sphere_drift_symbol_integer_ladder(sphere2, sphere3):
    for spec in (sphere2, sphere3):
        omega = drift_symbol(spec, SphereRotation(0.7))
        steps = omega / 0.7
        assert np.max(np.abs(steps - np.round(steps))) < 1e-12
        assert math.isclose(np.max(steps), spec.max_degree)
    # multiplicity of the azimuthal number j on S^2 is L - |j| + 1
    L = sphere2.max_degree
    counts = Counter(int(round(s)) for s in drift_symbol(sphere2, SphereRotation(1.0)))
    for j in range(-L, L + 1):
        assert counts[j] == L - abs(j) + 1
    # and on S^3 it is the triangle number (L - |j| + 1)(L - |j| + 2)/2
    L = sphere3.max_degree
    counts = Counter(int(round(s)) for s in drift_symbol(sphere3, SphereRotation(1.0)))
    for j in range(-L, L + 1):
        assert counts[j] == (L - abs(j) + 1) * (L - abs(j) + 2) // 2


def test_radial_drift_is_zero(halfline_flat, rng):
    u = random_band_limited(halfline_flat, rng)
    Xu = apply_killing(u, RadialCrossSectionFlow(0.9))
    assert np.max(np.abs(Xu.coeffs)) == 0.0


def test_apply_killing_matches_symbol(circle, rng):
    X = TorusTranslation((0.3,))
    u = random_band_limited(circle, rng)
    lhs = apply_killing(u, X).coeffs
    assert np.allclose(lhs, 1j * drift_symbol(circle, X) * u.coeffs)


def test_apply_laplacian_plane_wave(circle):
    u = mode_field(circle, 5)
    m = circle.mode_numbers[5, 0]
    out = apply_laplacian(u)
    assert np.allclose(out.coeffs, float(m) ** 2 * u.coeffs)


def test_spec_killing_pairing_enforced(circle, sphere2):
    with pytest.raises(OperatorError):
        drift_symbol(circle, SphereRotation(1.0))
    with pytest.raises(OperatorError):
        drift_symbol(sphere2, TorusTranslation((1.0,)))
    with pytest.raises(OperatorError):
        drift_symbol(circle, TorusTranslation((1.0, 2.0)))  # wrong dimension
    with pytest.raises(OperatorError):
        drift_symbol(sphere2, SphereRotation(1.0, plane=(0, 1)))


def test_speed_bound_and_grid_sup(sphere2, sphere3, circle):
    assert math.isclose(speed_bound(circle, TorusTranslation((0.6,))), 0.6)
    assert math.isclose(speed_bound(sphere2, SphereRotation(-0.8)), 0.8)
    # |X| = speed sin(theta) on S^2 peaks at the equator
    assert math.isclose(killing_sup_on_grid(sphere2, SphereRotation(0.8)), 0.8, rel_tol=1e-9)
    assert math.isclose(killing_sup_on_grid(sphere3, SphereRotation(0.8)), 0.8, rel_tol=1e-9)
    scaled = TorusSpec(n=1, period=1.0, grid_points=16, metric_scale=4.0)
    assert math.isclose(speed_bound(scaled, TorusTranslation((0.6,))), 1.2)


@pytest.mark.parametrize(
    "speed,regime", [(0.5, "elliptic"), (1.0, "sonic"), (1.5, "supersonic")]
)
def test_flow_regime(circle, speed, regime):
    assert flow_regime(circle, TorusTranslation((speed,))) == regime


def test_combine_killing():
    X = combine_killing(TorusTranslation((0.3, 0.0)), TorusTranslation((1.0, -2.0)), 0.1)
    assert X.velocity == (0.4, -0.2)
    R = combine_killing(SphereRotation(0.5), SphereRotation(2.0), 0.25)
    assert math.isclose(R.speed, 1.0)
    with pytest.raises(InvalidPerturbation):
        combine_killing(TorusTranslation((0.3,)), TorusTranslation((1.0, 0.0)), 0.1)
    with pytest.raises(InvalidPerturbation):
        combine_killing(TorusTranslation((0.3,)), SphereRotation(1.0), 0.1)
    with pytest.raises(InvalidPerturbation):
        combine_killing(SphereRotation(0.5), SphereRotation(1.0, plane=(2, 3)), 0.1)


# ---------------------------------------------------------------------------
# Quadratic forms
# ---------------------------------------------------------------------------


def test_schroedinger_form_on_single_mode():
    spec = TorusSpec(n=1, period=2 * math.pi, grid_points=32)
    X = TorusTranslation((0.4,))
    lam = 1.3
    u = mode_field(spec, 2, amplitude=0.5)
    m = float(spec.mode_numbers[2, 0])
    expected = spec.volume() * 0.25 * (m**2 + 0.4 * m + lam)
    assert math.isclose(form_schroedinger(u, X, lam), expected, rel_tol=1e-12)


def test_wave_form_on_single_mode():
    spec = TorusSpec(n=1, period=2 * math.pi, grid_points=32)
    X = TorusTranslation((0.4,))
    lam, mass = 0.7, 1.1
    u = mode_field(spec, 3)
    m = float(spec.mode_numbers[3, 0])
    omega = 0.4 * m
    expected = spec.volume() * (m**2 - (omega + lam) ** 2 + mass**2)
    assert math.isclose(form_wave(u, X, lam, mass), expected, rel_tol=1e-12)


def test_forms_are_real_on_random_fields(circle, sphere2, rng):
    for spec, X in ((circle, TorusTranslation((0.8,))), (sphere2, SphereRotation(0.6))):
        for _ in range(3):
            u = random_band_limited(spec, rng)
            # .form raises AssemblyError when the value drifts off the real axis
            val = form_schroedinger(u, X, 0.9)
            assert isinstance(val, float)


def test_wave_energy_identity(circle, sphere2, halfline_flat, rng):
    cases = [
        (circle, TorusTranslation((0.7,)), 0.3, 1.2),
        (sphere2, SphereRotation(0.5), 0.4, 1.1),
        (halfline_flat, RadialCrossSectionFlow(0.7), 0.3, 1.2),
    ]
    for spec, X, lam, mass in cases:
        u = random_band_limited(spec, rng)
        gap = wave_form_energy_identity_gap(u, X, lam, mass, 3.0)
        scale = max(1.0, abs(form_wave(u, X, lam, mass)))
        assert abs(gap) < 1e-10 * scale


def test_nonlinear_term_on_constant(circle):
    u = constant_field(circle, 2.0)
    cubed = nonlinear_term(u, 3.0, coupling=0.5)
    # 0.5 * |2|^2 * 2 = 4, still constant
    assert abs(cubed.coeffs[0] - 4.0) < 1e-12
    assert np.max(np.abs(cubed.coeffs[1:])) < 1e-12


def test_sphere_nonlinearity_power_guard(sphere2):
    u = constant_field(sphere2, 1.0)
    with pytest.raises(OperatorError):
        nonlinear_term(u, sphere2.p_max + 1.0)


def _fd_directional(energy, u, v, h=1e-6):
    return (energy(u + h * v) - energy(u + (-h) * v)) / (2 * h)


def test_energy_gradient_schroedinger_fd(circle, rng):
    X = TorusTranslation((0.3,))
    u = random_band_limited(circle, rng)
    g = energy_gradient_schroedinger(u, X, 3.0, coupling=0.8)
    for _ in range(3):
        v = random_band_limited(circle, rng)
        fd = _fd_directional(lambda w: energy_schroedinger(w, X, 3.0, 0.8), u, v)
        an = inner(g, v).real
        assert abs(fd - an) < 1e-5 * max(1.0, abs(an))


def test_energy_gradient_wave_fd(halfline_flat, rng):
    X = RadialCrossSectionFlow(0.0)
    u = random_band_limited(halfline_flat, rng)
    g = energy_gradient_wave(u, X, 0.9, 3.0)
    for _ in range(3):
        v = random_band_limited(halfline_flat, rng)
        fd = _fd_directional(lambda w: energy_wave(w, X, 0.9, 3.0), u, v)
        an = inner(g, v).real
        assert abs(fd - an) < 1e-5 * max(1.0, abs(an))


def test_operator_apply_matches_form(circle, rng):
    X = TorusTranslation((0.5,))
    op = schroedinger_operator(circle, X, 2.0)
    u = random_band_limited(circle, rng)
    assert math.isclose(op.form(u), inner(op.apply(u), u).real, rel_tol=1e-12)
    assert op.opnorm_bound() >= np.max(np.abs(op.symbol)) - 1e-12


@given(seed=st.integers(min_value=0, max_value=10**6))
@settings(max_examples=20, deadline=None)
def test_quadratic_form_parallelogram(seed):
    """F(u+v) + F(u-v) = 2F(u) + 2F(v) for every quadratic form."""
    spec = TorusSpec(n=1, period=1.0, grid_points=16)
    X = TorusTranslation((0.4,))
    r = np.random.default_rng(seed)
    u = random_band_limited(spec, r)
    v = random_band_limited(spec, r)
    lhs = form_wave(u + v, X, 0.3, 1.1) + form_wave(u - v, X, 0.3, 1.1)
    rhs = 2 * form_wave(u, X, 0.3, 1.1) + 2 * form_wave(v, X, 0.3, 1.1)
    assert abs(lhs - rhs) < 1e-8 * max(1.0, abs(lhs))


# ---------------------------------------------------------------------------
# Coercivity diagnostics
# ---------------------------------------------------------------------------


def test_coercivity_torus_supersonic_bottom():
    spec = TorusSpec(n=1, period=2 * math.pi, grid_points=64)
    rep = coercivity_check(spec, TorusTranslation((1.5,)))
    # min over integers of m^2 + 1.5 m is -0.5 at m = -1
    assert abs(rep.alpha - (-0.5)) < 1e-8
    assert rep.regime == "supersonic"
    assert not rep.schroedinger_coercive  # lam = 0 is not above 0.5


def test_coercivity_torus_subsonic():
    spec = TorusSpec(n=1, period=2 * math.pi, grid_points=64)
    rep = coercivity_check(spec, TorusTranslation((0.3,)), lam=0.2)
    assert abs(rep.alpha) < 1e-9  # constant mode sits at the bottom
    assert rep.schroedinger_coercive and rep.wave_coercive
    assert rep.lowest_modes[0][0] <= rep.lowest_modes[-1][0]


def test_coercivity_matches_direct_symbol_minimum(circle):
    X = TorusTranslation((1.7,))
    lam = 0.4
    rep = coercivity_check(circle, X, lam=lam)
    sym_s = circle.laplacian_eigs + drift_symbol(circle, X)
    omega = drift_symbol(circle, X)
    sym_w = circle.laplacian_eigs - omega**2 - 2 * lam * omega
    assert abs(rep.alpha - np.min(sym_s)) < 1e-7
    assert abs(rep.beta_lambda - np.min(sym_w)) < 1e-6 * max(1.0, abs(np.min(sym_w)))


def test_coercivity_sphere_constant_mode(sphere2):
    rep = coercivity_check(sphere2, SphereRotation(0.5))
    assert abs(rep.alpha) < 1e-9
    assert rep.regime == "elliptic"


def test_coercivity_radial_flat(halfline_flat):
    rep = coercivity_check(halfline_flat, RadialCrossSectionFlow(0.0), lam=0.2)
    # Dirichlet bottom of -u'' on [0, 40] with a natural condition at 0:
    # continuum value (pi / 80)^2, discrete value frozen at this resolution
    assert abs(rep.alpha - 0.001541132405) < 1e-9
    assert abs(rep.alpha - (math.pi / 80) ** 2) < 1.1e-6
    assert rep.beta_lambda == rep.alpha
    assert rep.schroedinger_coercive
    assert rep.h1_bounds_schroedinger[0] > 0


def test_coercivity_radial_growing_end(halfline_quadratic):
    rep = coercivity_check(halfline_quadratic, RadialCrossSectionFlow(0.0))
    # weight growth pushes the bottom toward the half-wave value (pi/40)^2
    assert abs(rep.alpha - 0.006139882289) < 1e-9
    assert abs(rep.alpha - (math.pi / 40) ** 2) < 3e-5


def test_coercivity_wave_gate():
    spec = TorusSpec(n=1, period=2 * math.pi, grid_points=32)
    X = TorusTranslation((0.0,))
    ok = coercivity_check(spec, X, lam=0.5, mass=1.0)
    assert ok.wave_coercive  # 1 > 0.25 - 0
    bad = coercivity_check(spec, X, lam=2.0, mass=1.0)
    assert not bad.wave_coercive  # 1 < 4 - 0
