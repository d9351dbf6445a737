"""Polynomial eigenspace diagnostics for rotation drift on round spheres.

Homogeneous harmonic polynomials restricted to the unit sphere realise the
eigenspaces of the Laplace-Beltrami operator, and a rotation generator acts
on each eigenspace as an antisymmetric derivation.  Everything here is
assembled exactly -- integer exponent bookkeeping plus closed-form monomial
integrals -- so eigenvalue checks against the combinatorial prediction

    min over integer j in [-degree, degree] of
        degree (degree + n - 1) - j^2 - coupling * j

are limited only by LAPACK roundoff, not quadrature error.

The quadratic form studied on each eigenspace is

    q(u) = (-Lap_S u + X^2 u + coupling * iXu, u),        |X| = 1,

whose positivity threshold in the coupling is n - 1, with a one-dimensional
kernel appearing exactly at the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh, null_space
from scipy.special import gammaln

__all__ = [
    "HarmonicSubspace",
    "SemidefiniteReport",
    "CircularVectorReport",
    "multi_indices",
    "sphere_monomial_integrals",
    "harmonic_space_dim",
    "drift_spectrum",
    "quadratic_form_report",
    "circular_vector_check",
    "kernel_dimensions",
    "semidefinite_scan",
]


def multi_indices(n_vars: int, degree: int) -> np.ndarray:
    """All exponent vectors of homogeneous degree ``degree`` in ``n_vars``
    variables, as an ``(n_monomials, n_vars)`` int array in a fixed order."""
    if degree == 0:
        return np.zeros((1, n_vars), dtype=int)
    rows = [
        np.bincount(pick, minlength=n_vars)
        for pick in combinations_with_replacement(range(n_vars), degree)
    ]
    return np.array(rows, dtype=int)


def _row_lookup(idx: np.ndarray) -> Dict[Tuple[int, ...], int]:
    return {tuple(row): i for i, row in enumerate(idx)}


def ambient_laplacian_matrix(idx_k: np.ndarray, idx_km2: np.ndarray) -> np.ndarray:
    """Matrix of the flat Laplacian from degree-k to degree-(k-2) coefficients."""
    lookup = _row_lookup(idx_km2)
    out = np.zeros((idx_km2.shape[0], idx_k.shape[0]))
    for col, a in enumerate(idx_k):
        for i, ai in enumerate(a):
            if ai >= 2:
                b = a.copy()
                b[i] -= 2
                out[lookup[tuple(b)], col] += ai * (ai - 1)
    return out


def rotation_derivation_matrix(idx: np.ndarray, plane: Tuple[int, int] = (0, 1)) -> np.ndarray:
    """Matrix of ``x_p d/dx_q - x_q d/dx_p`` on homogeneous coefficients."""
    p, q = plane
    lookup = _row_lookup(idx)
    out = np.zeros((idx.shape[0], idx.shape[0]))
    for col, a in enumerate(idx):
        if a[q] >= 1:
            b = a.copy()
            b[q] -= 1
            b[p] += 1
            out[lookup[tuple(b)], col] += a[q]
        if a[p] >= 1:
            b = a.copy()
            b[p] -= 1
            b[q] += 1
            out[lookup[tuple(b)], col] -= a[p]
    return out


def sphere_monomial_integrals(exponents: np.ndarray) -> np.ndarray:
    """Exact surface integrals of monomials ``x^a`` over the unit sphere.

    For even exponent vectors the value is ``2 prod Gamma(b_i) / Gamma(sum b_i)``
    with ``b_i = (a_i + 1)/2``; odd exponents integrate to zero.  ``exponents``
    may have any leading shape; the last axis runs over variables.
    """
    a = np.asarray(exponents, dtype=float)
    b = 0.5 * (a + 1.0)
    log_val = np.log(2.0) + gammaln(b).sum(axis=-1) - gammaln(b.sum(axis=-1))
    even = np.all(np.asarray(exponents) % 2 == 0, axis=-1)
    return np.where(even, np.exp(log_val), 0.0)


def monomial_sphere_gram(idx: np.ndarray) -> np.ndarray:
    """Gram matrix of the monomials in ``idx`` in L^2 of the unit sphere."""
    sums = idx[:, None, :] + idx[None, :, :]
    return sphere_monomial_integrals(sums)


def harmonic_space_dim(sphere_dim: int, degree: int) -> int:
    """Dimension of the degree-``degree`` eigenspace on the ``sphere_dim``-sphere."""
    n_vars = sphere_dim + 1
    full = comb(degree + n_vars - 1, n_vars - 1)
    if degree < 2:
        return full
    return full - comb(degree - 2 + n_vars - 1, n_vars - 1)


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


@dataclass
class HarmonicSubspace:
    """One Laplace eigenspace on the round sphere, in polynomial coordinates.

    ``basis`` has orthonormal columns spanning the harmonic coefficient
    vectors; ``gram`` is the sphere L^2 Gram of those columns and ``deriv``
    the matrix of the unit-speed rotation generator in the same coordinates.
    ``closure_residual`` records how far the derivation strays from the
    subspace (zero in exact arithmetic).
    """

    sphere_dim: int
    degree: int
    mono_exponents: np.ndarray
    basis: np.ndarray
    gram: np.ndarray
    deriv: np.ndarray
    closure_residual: float

    @classmethod
    def build(cls, sphere_dim: int, degree: int) -> "HarmonicSubspace":
        if sphere_dim < 2:
            raise ValueError("need sphere_dim >= 2; the circle's eigenspaces "
                             "carry only the extreme azimuthal indices")
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        n_vars = sphere_dim + 1
        idx = multi_indices(n_vars, degree)
        if degree < 2:
            basis = np.eye(idx.shape[0])
        else:
            lap = ambient_laplacian_matrix(idx, multi_indices(n_vars, degree - 2))
            basis = null_space(lap)
        expected = harmonic_space_dim(sphere_dim, degree)
        if basis.shape[1] != expected:
            raise ArithmeticError(
                f"harmonic null space came out {basis.shape[1]}-dimensional, "
                f"expected {expected}"
            )
        g_mono = monomial_sphere_gram(idx)
        gram = _hermitize(basis.T @ g_mono @ basis)
        x_mono = rotation_derivation_matrix(idx)
        image = x_mono @ basis
        deriv = basis.T @ image
        residual = float(np.linalg.norm(image - basis @ deriv))
        return cls(sphere_dim, degree, idx, basis, gram, deriv, residual)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def laplace_eigenvalue(self) -> float:
        return float(self.degree * (self.degree + self.sphere_dim - 1))


_SUBSPACE_CACHE: Dict[Tuple[int, int], HarmonicSubspace] = {}


def harmonic_subspace(sphere_dim: int, degree: int) -> HarmonicSubspace:
    key = (sphere_dim, degree)
    if key not in _SUBSPACE_CACHE:
        _SUBSPACE_CACHE[key] = HarmonicSubspace.build(sphere_dim, degree)
    return _SUBSPACE_CACHE[key]


def drift_spectrum(sub: HarmonicSubspace, speed: float = 1.0) -> np.ndarray:
    """Eigenvalues of ``-i speed X`` on the eigenspace, ascending.

    For the unit-speed generator these sit on the integers ``-degree ..
    degree`` (the azimuthal indices), with multiplicities depending on the
    sphere dimension.
    """
    form = _hermitize(-1j * speed * sub.gram @ sub.deriv.astype(complex))
    return eigh(form, sub.gram.astype(complex), eigvals_only=True)


@dataclass
class SemidefiniteReport:
    """Verdict on positivity of the drift-coupled form on one eigenspace."""

    sphere_dim: int
    degree: int
    coupling: float
    min_eig: float
    predicted_min: float
    kernel_dim: int
    semidefinite: bool

    def agreement(self) -> float:
        return abs(self.min_eig - self.predicted_min)


def _predicted_min(sphere_dim: int, degree: int, coupling: float) -> float:
    c0 = degree * (degree + sphere_dim - 1)
    js = np.arange(-degree, degree + 1)
    return float(np.min(c0 - js.astype(float) ** 2 - coupling * js))


def quadratic_form_report(
    sub: HarmonicSubspace,
    coupling: float,
    kernel_tol: float = 1e-8,
    direct: bool = False,
) -> SemidefiniteReport:
    """Bottom of ``(-Lap_S + X^2 + coupling iX, .)`` on the eigenspace.

    By default the form is evaluated on the once-computed spectrum of the
    commuting drift operator, which makes coupling sweeps cheap; ``direct``
    assembles and diagonalises the full form matrix instead (slower, used
    for cross-validation).
    """
    c0 = sub.laplace_eigenvalue()
    if direct:
        m = sub.deriv.astype(complex)
        op = c0 * np.eye(sub.dim, dtype=complex) + m @ m + 1j * coupling * m
        form = _hermitize(sub.gram.astype(complex) @ op)
        vals = eigh(form, sub.gram, eigvals_only=True)
    else:
        js = drift_spectrum(sub)
        vals = c0 - js**2 - coupling * js
    min_eig = float(np.min(vals))
    kernel = int(np.count_nonzero(np.abs(vals) < kernel_tol))
    return SemidefiniteReport(
        sphere_dim=sub.sphere_dim,
        degree=sub.degree,
        coupling=float(coupling),
        min_eig=min_eig,
        predicted_min=_predicted_min(sub.sphere_dim, sub.degree, coupling),
        kernel_dim=kernel,
        semidefinite=bool(min_eig > -kernel_tol),
    )


@dataclass
class CircularVectorReport:
    """Residuals certifying ``(x_1 + i x_2)^degree`` as an explicit eigenvector."""

    sphere_dim: int
    degree: int
    speed: float
    eigen_residual: float
    harmonic_residual: float
    membership_residual: float
    eigenvalue: complex


def circular_vector_coeffs(sub: HarmonicSubspace) -> np.ndarray:
    """Monomial coefficients of ``(x_1 + i x_2)^degree``."""
    k = sub.degree
    lookup = _row_lookup(sub.mono_exponents)
    v = np.zeros(sub.mono_exponents.shape[0], dtype=complex)
    n_vars = sub.mono_exponents.shape[1]
    for j in range(k + 1):
        a = np.zeros(n_vars, dtype=int)
        a[0] = k - j
        a[1] = j
        v[lookup[tuple(a)]] = comb(k, j) * (1j) ** j
    return v


def circular_vector_check(sub: HarmonicSubspace, speed: float = 1.0) -> CircularVectorReport:
    """Check the closed-form rotation eigenvector on this eigenspace.

    ``X (x_1+ix_2)^k = i k speed (x_1+ix_2)^k`` exactly; the report carries
    the numerical residual of that identity, of harmonicity, and of
    membership in the computed subspace, all relative to the vector's norm.
    """
    v = circular_vector_coeffs(sub)
    scale = float(np.linalg.norm(v))
    x_mono = rotation_derivation_matrix(sub.mono_exponents)
    eig = 1j * speed * sub.degree
    eig_res = float(np.linalg.norm(speed * (x_mono @ v) - eig * v)) / scale
    if sub.degree >= 2:
        n_vars = sub.mono_exponents.shape[1]
        lap = ambient_laplacian_matrix(
            sub.mono_exponents, multi_indices(n_vars, sub.degree - 2)
        )
        harm_res = float(np.linalg.norm(lap @ v)) / scale
    else:
        harm_res = 0.0
    proj = sub.basis @ (sub.basis.T @ v)
    member_res = float(np.linalg.norm(v - proj)) / scale
    return CircularVectorReport(
        sphere_dim=sub.sphere_dim,
        degree=sub.degree,
        speed=float(speed),
        eigen_residual=eig_res,
        harmonic_residual=harm_res,
        membership_residual=member_res,
        eigenvalue=eig,
    )


def kernel_dimensions(
    sphere_dim: int, degrees: Sequence[int], coupling: float
) -> Dict[int, int]:
    """Kernel dimension of the drift-coupled form per eigenspace degree."""
    return {
        k: quadratic_form_report(harmonic_subspace(sphere_dim, k), coupling).kernel_dim
        for k in degrees
    }


def semidefinite_scan(
    sphere_dims: Sequence[int],
    max_degree: int,
    couplings: Sequence[float],
) -> List[SemidefiniteReport]:
    """Sweep the positivity check over dimensions, degrees and couplings.

    The eigenspace representations are built once per ``(sphere_dim, degree)``
    and shared across all couplings.
    """
    reports = []
    for n in sphere_dims:
        for k in range(1, max_degree + 1):
            sub = harmonic_subspace(n, k)
            for c in couplings:
                reports.append(quadratic_form_report(sub, c))
    return reports
