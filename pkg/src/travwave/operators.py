"""Differential operators, quadratic forms, and energies for travelling waves.

The symmetry generators ("Killing fields") supported here are the ones whose
action is diagonal on the spectral bases of :mod:`travwave.basis`:

* ``TorusTranslation`` -- a constant velocity field ``c . d/dx`` on a torus;
  mode ``m`` is multiplied by ``i * 2 pi (m . c) / period``.
* ``SphereRotation``   -- ``b`` times the rotation generator in the
  ``(x1, x2)``-plane; the harmonic with azimuthal index ``m`` is multiplied by
  ``i * b * m``.
* ``RadialCrossSectionFlow`` -- a field tangent to the cross-section of a
  warped product, which annihilates radial functions; only its declared
  supremum norm enters the diagnostics.

Two families of quadratic forms are assembled from these:

    schroedinger form :  (-Lap u - i X u + lam u, u)
    wave form         :  (-Lap u + X^2 u + 2 i lam X u + (m^2 - lam^2) u, u)

together with the corresponding energies, whose nonlinear part is
``coupling / (p+1) * integral |u|^(p+1)``.  Everything is written against the
real "drift symbol" of ``-iX`` so Hermiticity is structural; assembled form
values are still guarded against imaginary contamination.

``coercivity_check`` estimates the bottom of both quadratic forms with a
seeded Lanczos iteration and reports whether the requested parameters sit in
the coercive regime, along with two-sided H^1 equivalence constants on the
truncated space.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import cho_factor, cho_solve, eigh, eigvalsh

from .basis import (
    BasisError,
    ManifoldSpec,
    RadialSpec,
    SpectralField,
    SphereSpec,
    TorusSpec,
    from_grid,
    grad_norm_sq,
    inner,
    l2_norm_sq,
    power_integral,
    to_grid,
)


class OperatorError(ValueError):
    """Raised for incompatible generator/manifold pairs or bad parameters."""


class AssemblyError(RuntimeError):
    """Raised when an assembled form value fails its reality guard."""


class InvalidPerturbation(OperatorError):
    """Raised when two generators cannot be combined into one flow."""


# ---------------------------------------------------------------------------
# Killing fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorusTranslation:
    """Constant vector field with the given coordinate velocity components."""

    velocity: Tuple[float, ...]


@dataclass(frozen=True)
class SphereRotation:
    """``speed`` times the unit rotation generator in coordinate plane (1, 2)."""

    speed: float
    plane: Tuple[int, int] = (1, 2)


@dataclass(frozen=True)
class RadialCrossSectionFlow:
    """Cross-section generator of a warped product with declared sup norm."""

    speed: float


KillingField = Union[TorusTranslation, SphereRotation, RadialCrossSectionFlow]


def _check_pair(spec: ManifoldSpec, X: KillingField) -> None:
    if isinstance(spec, TorusSpec):
        if not isinstance(X, TorusTranslation):
            raise OperatorError(f"torus requires a TorusTranslation, got {type(X).__name__}")
        if len(X.velocity) != spec.n:
            raise OperatorError(
                f"velocity has {len(X.velocity)} components for a {spec.n}-torus"
            )
    elif isinstance(spec, SphereSpec):
        if not isinstance(X, SphereRotation):
            raise OperatorError(f"sphere requires a SphereRotation, got {type(X).__name__}")
        if tuple(X.plane) != (1, 2):
            raise OperatorError(
                "only the rotation in the (1, 2) coordinate plane is supported; "
                "conjugate other planes to it"
            )
    elif isinstance(spec, RadialSpec):
        if not isinstance(X, RadialCrossSectionFlow):
            raise OperatorError(
                f"radial grid requires a RadialCrossSectionFlow, got {type(X).__name__}"
            )
    else:
        raise OperatorError(f"unsupported manifold spec {type(spec).__name__}")


def drift_symbol(spec: ManifoldSpec, X: KillingField) -> np.ndarray:
    """Real per-mode symbol of the Hermitian operator ``-iX``."""
    _check_pair(spec, X)
    if isinstance(spec, TorusSpec):
        vel = np.asarray(X.velocity, dtype=float)
        return 2.0 * pi * (spec.mode_numbers @ vel) / spec.period
    if isinstance(spec, SphereSpec):
        return X.speed * spec.azimuthal_of_mode.astype(float)
    return np.zeros(spec.n_modes)


def apply_killing(u: SpectralField, X: KillingField) -> SpectralField:
    """Apply the generator: ``X u``; zero on radial fields."""
    omega = drift_symbol(u.basis, X)
    return SpectralField(u.basis, 1j * omega * u.coeffs)


def apply_laplacian(u: SpectralField) -> SpectralField:
    """Apply ``-Laplace`` (positive operator) in the field's basis."""
    spec = u.basis
    if isinstance(spec, RadialSpec):
        return SpectralField(spec, spec.apply_minus_laplacian(u.coeffs))
    return SpectralField(spec, spec.laplacian_eigs * u.coeffs)


def speed_bound(spec: ManifoldSpec, X: KillingField) -> float:
    """Supremum of the metric length of ``X`` over the manifold."""
    _check_pair(spec, X)
    s = getattr(spec, "metric_scale", 1.0)
    if isinstance(X, TorusTranslation):
        return float(np.sqrt(s) * np.linalg.norm(X.velocity))
    if isinstance(X, SphereRotation):
        return float(abs(X.speed) * np.sqrt(s))
    return float(abs(X.speed))


def killing_sup_on_grid(spec: ManifoldSpec, X: KillingField, samples: int = 2001) -> float:
    """Pointwise sup of ``|X|`` on a dense coordinate sample including the
    maximizer (the quadrature nodes themselves avoid the equator)."""
    _check_pair(spec, X)
    s = getattr(spec, "metric_scale", 1.0)
    if isinstance(X, TorusTranslation):
        return float(np.sqrt(s) * np.linalg.norm(X.velocity))
    if isinstance(X, RadialCrossSectionFlow):
        return float(abs(X.speed))
    theta = np.linspace(0.0, pi, samples)
    if spec.n == 2:
        return float(abs(X.speed) * np.sqrt(s) * np.max(np.sin(theta)))
    prof = np.max(np.sin(theta))
    return float(abs(X.speed) * np.sqrt(s) * prof * prof)


def flow_regime(spec: ManifoldSpec, X: KillingField, tol: float = 1e-12) -> str:
    """'elliptic' (sup |X| < 1), 'sonic' (= 1) or 'supersonic' (> 1)."""
    b = speed_bound(spec, X)
    if b < 1.0 - tol:
        return "elliptic"
    if b <= 1.0 + tol:
        return "sonic"
    return "supersonic"


def combine_killing(X: KillingField, Xpp: KillingField, eps: float) -> KillingField:
    """The generator ``X + eps * Xpp`` when both flows share one family."""
    if isinstance(X, TorusTranslation) and isinstance(Xpp, TorusTranslation):
        if len(X.velocity) != len(Xpp.velocity):
            raise InvalidPerturbation("velocity dimensions differ")
        v = tuple(a + eps * b for a, b in zip(X.velocity, Xpp.velocity))
        return TorusTranslation(v)
    if isinstance(X, SphereRotation) and isinstance(Xpp, SphereRotation):
        if tuple(X.plane) != tuple(Xpp.plane):
            raise InvalidPerturbation(
                "rotations in different planes do not combine into a single "
                "supported generator"
            )
        return SphereRotation(X.speed + eps * Xpp.speed, X.plane)
    raise InvalidPerturbation(
        f"cannot combine {type(X).__name__} with {type(Xpp).__name__}"
    )


# ---------------------------------------------------------------------------
# Quadratic operators and forms
# ---------------------------------------------------------------------------


@dataclass
class QuadraticOperator:
    """A Hermitian operator ``-Lap + (drift terms) + shift`` on one basis.

    For torus/sphere bases the whole operator is the diagonal ``symbol``; for
    radial grids it is the variational Laplacian plus the scalar ``shift``.
    """

    spec: ManifoldSpec
    symbol: Optional[np.ndarray]
    shift: float
    label: str

    def apply(self, u: SpectralField) -> SpectralField:
        if self.symbol is not None:
            return SpectralField(self.spec, self.symbol * u.coeffs)
        lap = self.spec.apply_minus_laplacian(u.coeffs)
        return SpectralField(self.spec, lap + self.shift * u.coeffs)

    def form(self, u: SpectralField) -> float:
        val = inner(self.apply(u), u)
        scale = max(abs(val), l2_norm_sq(u), 1e-300)
        if abs(val.imag) > 1e-10 * scale:
            raise AssemblyError(
                f"{self.label} form value {val} has a non-real part beyond tolerance"
            )
        return float(val.real)

    def opnorm_bound(self) -> float:
        """Upper bound on the operator norm, for gradient step sizing."""
        if self.symbol is not None:
            return float(np.max(np.abs(self.symbol)))
        spec = self.spec
        row_sums = np.sum(np.abs(spec.stiffness), axis=1) / spec.measure
        return float(np.max(row_sums) + abs(self.shift))


def schroedinger_operator(spec: ManifoldSpec, X: KillingField, lam: float) -> QuadraticOperator:
    """``-Lap - iX + lam``, the quadratic part of the Schroedinger form."""
    if isinstance(spec, RadialSpec):
        _check_pair(spec, X)
        return QuadraticOperator(spec, None, lam, "schroedinger")
    symbol = spec.laplacian_eigs + drift_symbol(spec, X) + lam
    return QuadraticOperator(spec, symbol, lam, "schroedinger")


def wave_operator(
    spec: ManifoldSpec, X: KillingField, lam: float, mass: float
) -> QuadraticOperator:
    """``-Lap + X^2 + 2 i lam X + (mass^2 - lam^2)``, the wave-form operator."""
    if isinstance(spec, RadialSpec):
        _check_pair(spec, X)
        return QuadraticOperator(spec, None, mass**2 - lam**2, "wave")
    omega = drift_symbol(spec, X)
    symbol = spec.laplacian_eigs - (omega + lam) ** 2 + mass**2
    return QuadraticOperator(spec, symbol, mass**2 - lam**2, "wave")


def form_schroedinger(u: SpectralField, X: KillingField, lam: float) -> float:
    """``(-Lap u - iXu + lam u, u)``."""
    return schroedinger_operator(u.basis, X, lam).form(u)


def form_wave(u: SpectralField, X: KillingField, lam: float, mass: float) -> float:
    """``(-Lap u + X^2 u + 2 i lam X u + (mass^2 - lam^2) u, u)``."""
    return wave_operator(u.basis, X, lam, mass).form(u)


def nonlinear_term(u: SpectralField, p: float, coupling: float = 1.0) -> SpectralField:
    """``coupling * |u|^(p-1) u`` evaluated pointwise and projected back.

    The projection onto the truncated basis is the dealiasing step; the
    quadrature grid is sized so the projection is the exact adjoint pairing.
    """
    spec = u.basis
    if isinstance(spec, SphereSpec) and p > spec.p_max:
        raise OperatorError(
            f"nonlinearity power p={p} exceeds the declared p_max={spec.p_max} "
            "of the sphere quadrature grid"
        )
    g = to_grid(u)
    return from_grid(spec, coupling * np.abs(g) ** (p - 1) * g)


def energy_schroedinger(
    u: SpectralField, X: KillingField, p: float, coupling: float = 1.0
) -> float:
    """``1/2 (-Lap u - iXu, u) - coupling/(p+1) integral |u|^(p+1)``."""
    quad = schroedinger_operator(u.basis, X, 0.0).form(u)
    return 0.5 * quad - coupling / (p + 1.0) * power_integral(u, p)


def energy_wave(
    u: SpectralField, X: KillingField, lam: float, p: float, coupling: float = 1.0
) -> float:
    """``1/2 (-Lap u + X^2 u + 2 i lam Xu, u) - coupling/(p+1) integral |u|^(p+1)``."""
    # mass=lam cancels the -lam^2 term in the wave symbol, leaving exactly
    # -Lap + X^2 + 2 i lam X with no constant shift.
    quad = wave_operator(u.basis, X, lam, lam).form(u)
    return 0.5 * quad - coupling / (p + 1.0) * power_integral(u, p)


def energy_gradient_schroedinger(
    u: SpectralField, X: KillingField, p: float, coupling: float = 1.0
) -> SpectralField:
    """L^2 gradient of the Schroedinger energy: ``-Lap u - iXu - coupling |u|^(p-1) u``."""
    lin = schroedinger_operator(u.basis, X, 0.0).apply(u)
    return lin - nonlinear_term(u, p, coupling)


def energy_gradient_wave(
    u: SpectralField, X: KillingField, lam: float, p: float, coupling: float = 1.0
) -> SpectralField:
    """L^2 gradient of the wave energy."""
    lin = wave_operator(u.basis, X, lam, lam).apply(u)
    return lin - nonlinear_term(u, p, coupling)


def wave_form_energy_identity_gap(
    u: SpectralField, X: KillingField, lam: float, mass: float, p: float, coupling: float = 1.0
) -> float:
    """Defect of the algebraic identity linking the wave form to its energy:

        F = 2 E + 2 coupling/(p+1) integral |u|^(p+1) + (mass^2 - lam^2) |u|_2^2
    """
    lhs = form_wave(u, X, lam, mass)
    rhs = (
        2.0 * energy_wave(u, X, lam, p, coupling)
        + 2.0 * coupling / (p + 1.0) * power_integral(u, p)
        + (mass**2 - lam**2) * l2_norm_sq(u)
    )
    return lhs - rhs


# ---------------------------------------------------------------------------
# Coercivity diagnostics
# ---------------------------------------------------------------------------


@dataclass
class SpectrumReport:
    """Bottom-of-spectrum diagnostics for the two quadratic forms."""

    alpha: float
    beta_lambda: float
    regime: str
    speed_sup: float
    lam: float
    mass: float
    schroedinger_coercive: bool
    wave_coercive: bool
    h1_bounds_schroedinger: Tuple[float, float]
    h1_bounds_wave: Tuple[float, float]
    lowest_modes: List[Tuple[float, str]]


def _lanczos_smallest(symbol_or_mats, seed: int = 0) -> float:
    """Smallest eigenvalue via seeded block LOBPCG (tol 1e-9, <= 2000 iterations).

    ARPACK's ``which='SA'`` mode silently skips degenerate bottom clusters on
    these highly symmetric operators, so we use LOBPCG with a small block and
    a smooth warm-start column instead.
    """
    rng = np.random.default_rng(seed)
    if isinstance(symbol_or_mats, np.ndarray) and symbol_or_mats.ndim == 1:
        symbol = np.asarray(symbol_or_mats, dtype=float)
        n = symbol.size
        block = min(4, max(1, n // 8))
        if n <= 32:
            return float(np.min(symbol))
        guess = rng.standard_normal((n, block))
        guess[:, 0] = 0.0
        guess[int(np.argmin(symbol)), 0] = 1.0
        op = spla.LinearOperator((n, n), matvec=lambda v: symbol[:, None] * v
                                 if v.ndim == 2 else symbol * v, dtype=float)
        vals, _ = spla.lobpcg(op, guess, largest=False, tol=1e-9, maxiter=2000)
        return float(np.min(vals))
    k_mat, m_diag = symbol_or_mats
    n = k_mat.shape[0]
    block = min(4, max(1, n // 8))
    guess = rng.standard_normal((n, block))
    guess[:, 0] = 1.0  # smooth start: near the bottom mode of the pencil
    # (K + M)^-1 preconditioner; the pencil is stiff enough that plain LOBPCG
    # stalls at desk resolutions
    factor = cho_factor(k_mat + np.diag(m_diag))
    precond = spla.LinearOperator(
        (n, n), matvec=lambda v: cho_solve(factor, v),
        matmat=lambda v: cho_solve(factor, v), dtype=float,
    )
    vals, _ = spla.lobpcg(
        sp.csr_matrix(k_mat), guess, B=sp.diags(m_diag), M=precond,
        largest=False, tol=1e-9, maxiter=2000,
    )
    return float(np.min(vals))


def coercivity_check(
    spec: ManifoldSpec,
    X: KillingField,
    lam: float = 0.0,
    mass: float = 1.0,
    seed: int = 0,
) -> SpectrumReport:
    """Estimate the bottom of both quadratic forms on the truncated space.

    ``alpha`` is the smallest eigenvalue of ``-Lap - iX``; the Schroedinger
    form is coercive iff ``lam > -alpha``.  ``beta_lambda`` is the smallest
    eigenvalue of ``-Lap + X^2 + 2 i lam X``; the wave form is coercive iff
    ``mass^2 > lam^2 - beta_lambda``.  Also reports the H^1 equivalence
    constants of both full forms over the truncation.
    """
    _check_pair(spec, X)
    if isinstance(spec, RadialSpec):
        interior = slice(0, spec.n_modes - 1)  # Dirichlet at r_max
        k_mat = spec.stiffness[interior, interior]
        m_diag = spec.measure[interior]
        alpha = _lanczos_smallest((k_mat, m_diag), seed)
        beta = alpha  # the generator annihilates radial fields
        h1 = np.diag(m_diag) + k_mat
        s_vals = eigvalsh(k_mat + lam * np.diag(m_diag), h1)
        w_vals = eigvalsh(k_mat + (mass**2 - lam**2) * np.diag(m_diag), h1)
        h1_s = (float(s_vals[0]), float(s_vals[-1]))
        h1_w = (float(w_vals[0]), float(w_vals[-1]))
        lap_vals = eigvalsh(k_mat, np.diag(m_diag))
        order = np.argsort(lap_vals)[:5]
        lowest = [(float(lap_vals[i]), f"radial#{i}") for i in order]
    else:
        lap = spec.laplacian_eigs
        omega = drift_symbol(spec, X)
        sym_s = lap + omega
        sym_w = lap - omega**2 - 2.0 * lam * omega
        alpha = _lanczos_smallest(sym_s, seed)
        beta = _lanczos_smallest(sym_w, seed + 1)
        labels = spec.mode_labels()
        order = np.argsort(sym_s, kind="stable")[:5]
        lowest = [(float(sym_s[i]), labels[i]) for i in order]
        h1_sym = 1.0 + lap
        h1_s = (
            float(np.min((sym_s + lam) / h1_sym)),
            float(np.max((sym_s + lam) / h1_sym)),
        )
        full_w = sym_w + mass**2 - lam**2
        h1_w = (float(np.min(full_w / h1_sym)), float(np.max(full_w / h1_sym)))
    return SpectrumReport(
        alpha=float(alpha),
        beta_lambda=float(beta),
        regime=flow_regime(spec, X),
        speed_sup=speed_bound(spec, X),
        lam=lam,
        mass=mass,
        schroedinger_coercive=bool(lam > -alpha),
        wave_coercive=bool(mass**2 > lam**2 - beta),
        h1_bounds_schroedinger=h1_s,
        h1_bounds_wave=h1_w,
        lowest_modes=lowest,
    )
