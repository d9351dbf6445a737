"""Scaling laws, embedding-constant checks, perturbations, energy signs."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from travwave.basis import TorusSpec, mode_field, random_band_limited
from travwave.experiments import (
    AnisotropicCase,
    anisotropic_identities,
    constant_branch_residual,
    gn_exponent,
    gn_ratio_invariance,
    gn_scan,
    interpolation_exponent,
    interpolation_gap,
    negative_energy_construction,
    perturbation_study,
    scaling_sweep,
    trivial_constant_amplitude,
    two_nonlinearity_constant_witness,
    two_nonlinearity_study,
)
from travwave.operators import TorusTranslation, combine_killing, form_schroedinger

TWO_PI = 2 * math.pi


# ---------------------------------------------------------------------------
# Dilation exponents and embedding-ratio invariance
# ---------------------------------------------------------------------------


def test_gn_exponent_exact_values():
    assert gn_exponent(1, Fraction(3)) == Fraction(1, 4)
    assert gn_exponent(2, Fraction(3)) == Fraction(1, 2)
    assert gn_exponent(3, Fraction(7, 3)) == Fraction(3, 5)
    assert gn_exponent(1, Fraction(5)) == Fraction(1, 3)


def test_gn_scan_gate_is_exact_arithmetic():
    rows = gn_scan()
    assert len(rows) == 24
    for row in rows:
        # gamma (p+1) < 2 and p < 1 + 4/n are evaluated along different
        # routes; the agreement bit must hold as exact rationals
        assert row.inequality_equivalent
        assert isinstance(row.gamma, Fraction)
        assert row.subcritical == (row.power < 1 + Fraction(4, row.dim))
    # the endpoint case: p = 1 + 4/n is critical, not subcritical
    endpoint = [r for r in rows if r.dim == 1 and r.power == Fraction(5)]
    assert len(endpoint) == 1 and not endpoint[0].subcritical


@given(n=st.integers(min_value=1, max_value=6), num=st.integers(min_value=11, max_value=80))
@settings(max_examples=60, deadline=None)
def test_gn_gate_equivalence_for_arbitrary_rationals(n, num):
    p = Fraction(num, 10)
    gamma = gn_exponent(n, p)
    assert gamma == Fraction(n, 2) - Fraction(n, 1) / (p + 1)
    assert (gamma * (p + 1) < 2) == (p < 1 + Fraction(4, n))


def test_gn_ratio_invariance_under_dilation():
    assert gn_ratio_invariance(1, 3.0) < 1e-12
    assert gn_ratio_invariance(2, 3.0, dilations=(1.0, 1.5, 2.0), grid_points=256) < 1e-10


# ---------------------------------------------------------------------------
# The constant branch
# ---------------------------------------------------------------------------


def test_trivial_constant_amplitude():
    assert math.isclose(trivial_constant_amplitude(2.0, 1.0, 3.0), math.sqrt(2))
    assert math.isclose(trivial_constant_amplitude(3.0, 3.0, 2.0), 1.0)
    with pytest.raises(ValueError):
        trivial_constant_amplitude(-1.0, 1.0, 3.0)
    with pytest.raises(ValueError):
        trivial_constant_amplitude(1.0, 0.0, 3.0)


def test_constant_branch_solves_equation(circle):
    res = constant_branch_residual(circle, TorusTranslation((0.3,)), 2.0, 3.0)
    assert res < 1e-12


# ---------------------------------------------------------------------------
# Volume scaling sweep
# ---------------------------------------------------------------------------


def test_scaling_sweep_small():
    res = scaling_sweep(scales=(1, 2, 4))
    # both columns are exact power laws in the volume, so the fitted
    # log-log slopes match the predictions to rounding
    assert abs(res.slope_reported - res.reported_slope_prediction()) < 1e-9
    assert abs(res.slope_constant - res.constant_slope_prediction()) < 1e-9
    assert res.reported_slope_prediction() == pytest.approx(0.75)
    assert res.constant_slope_prediction() == pytest.approx(0.50)
    for row in res.rows:
        assert row.margin > 1e-8
        assert abs(row.constant_assembled - row.constant_objective) < 1e-10
        assert row.classification == "travelling"
        assert row.pde_residual < 1e-6
        assert row.minimum <= row.constant_objective
    assert abs(res.rows[0].minimum - 2.2362174) < 1e-5


# ---------------------------------------------------------------------------
# Interpolation and the two-nonlinearity problem
# ---------------------------------------------------------------------------


def test_interpolation_exponent_values():
    assert interpolation_exponent(2, 3) == Fraction(2, 3)
    assert interpolation_exponent(1.5, 4) == Fraction(1, 3)
    with pytest.raises(ValueError):
        interpolation_exponent(3, 2)
    with pytest.raises(ValueError):
        interpolation_exponent(1.0, 2.0)


def test_interpolation_gap_zero_on_plane_wave(circle):
    # plane waves have constant modulus, so Hoelder holds with equality
    u = mode_field(circle, 3, amplitude=1.7)
    assert abs(interpolation_gap(u, 2.0, 3.0)) < 1e-10


@given(seed=st.integers(min_value=0, max_value=10**6))
@settings(max_examples=25, deadline=None)
def test_interpolation_gap_nonnegative(seed):
    spec = TorusSpec(1, 1.0, 32)
    u = random_band_limited(spec, np.random.default_rng(seed))
    assert interpolation_gap(u, 2.0, 3.0) >= -1e-12


def test_two_nonlinearity_constant_witness(circle):
    theta, res = two_nonlinearity_constant_witness(circle, TorusTranslation((0.3,)), 2.0, 3.0, 2.0)
    assert theta == pytest.approx(1.0)
    assert res < 1e-12


def test_two_nonlinearity_study_row(circle):
    rows = two_nonlinearity_study(
        circle, TorusTranslation((0.3,)), lam=2.0, p=3.0, q=2.0, targets=(0.5,)
    )
    assert len(rows) == 1
    row = rows[0]
    assert row.pde_residual < 1e-6
    assert row.interpolation_slack >= -1e-12
    assert row.classification in ("constant", "travelling", "standing")


# ---------------------------------------------------------------------------
# Anisotropic dilation identities
# ---------------------------------------------------------------------------


def test_anisotropic_identities_unit():
    rep = anisotropic_identities(
        cases=[AnisotropicCase(2, 1, 4, 2), AnisotropicCase(2, 1, 1, 1)],
        grid_points=512,
    )
    assert set(rep.errors[0]) == {"dx_sq", "dy_sq", "y_dx_sq", "l2", "l4"}
    assert rep.worst_error < 2e-2
    # the isotropic member is exact: no aliasing is introduced by decimation
    assert max(rep.errors[1].values()) < 1e-12
    assert rep.mass_invariance_error < 1e-12
    assert rep.gradient_law_error < 1e-12


def test_anisotropic_identities_requires_divisible_grid():
    with pytest.raises(ValueError):
        anisotropic_identities(cases=[AnisotropicCase(2, 1, 4, 2)], grid_points=100)


# ---------------------------------------------------------------------------
# Generator perturbations
# ---------------------------------------------------------------------------


def test_form_shift_linear_in_perturbation():
    # single mode: the form difference under X -> X + eps D is exactly
    # eps times the drift-symbol shift, here 2 pi * eps
    spec = TorusSpec(1, 1.0, 32)
    u = mode_field(spec, 1)
    X = TorusTranslation((0.3,))
    D = TorusTranslation((1.0,))
    eps = 0.01
    shifted = combine_killing(X, D, eps)
    diff = form_schroedinger(u, shifted, 2.0) - form_schroedinger(u, X, 2.0)
    assert abs(diff - TWO_PI * eps) < 1e-12


def test_perturbation_bounds_and_stability(circle):
    X = TorusTranslation((0.3,))
    D = TorusTranslation((1.0,))
    rep = perturbation_study(circle, X, D, lam=5.0)
    assert rep.violations == 0
    assert len(rep.bound_rows) == 15  # five fields x three epsilons
    for row in rep.bound_rows:
        assert row.satisfied and row.form_difference <= row.bound
    # minimizer orbits move linearly with eps once aligned
    assert rep.diffs_monotone
    d1, d2, d3 = rep.minimizer_sup_diffs
    assert abs(d1 - 1.6851e-2) < 2e-4
    assert abs(d2 - 1.6837e-3) < 2e-5
    assert abs(d3 - 1.6836e-4) < 2e-6


# ---------------------------------------------------------------------------
# Negative energy at fixed mass
# ---------------------------------------------------------------------------


def test_negative_energy_line_case():
    rep = negative_energy_construction(1, 2.0)
    assert rep.reached_negative
    assert abs(rep.crossing_dilation - 0.474727) < 1e-5
    assert max(rep.mass_errors) < 1e-12
    for ea, en in zip(rep.analytic_energies, rep.numeric_energies):
        assert abs(ea - en) < 1e-10
    # energies are positive above the crossing and negative below
    assert rep.analytic_energies[0] > 0
    assert rep.analytic_energies[-1] < 0


def test_negative_energy_plane_case():
    rep = negative_energy_construction(2, 2.0, mass=1.0)
    assert rep.reached_negative
    assert abs(rep.crossing_dilation - 0.501502) < 1e-5
    assert max(rep.mass_errors) < 1e-12
    for ea, en in zip(rep.analytic_energies, rep.numeric_energies):
        assert abs(ea - en) < 1e-10


def test_negative_energy_rejects_critical_power():
    with pytest.raises(ValueError):
        negative_energy_construction(2, 3.0)  # n (p-1) / 2 = 2: no crossing
