"""Spectral bases on the supported manifolds.

Three families of discretization are provided, all exposing the same small
surface (synthesize / analyze / integrate / norms) so that the operator and
minimization layers can stay agnostic of the geometry:

* ``TorusSpec``  -- flat tori ``T^n`` (n = 1..3) with a plain Fourier basis on a
  uniform grid.  Coefficients follow the numpy FFT mode layout, flattened.
* ``SphereSpec`` -- round spheres ``S^2`` and ``S^3``.  On ``S^2`` the basis is
  orthonormal spherical harmonics evaluated through associated Legendre
  functions in the colatitude and an FFT in the longitude; on ``S^3`` an extra
  Gegenbauer stage in the second colatitude is composed with the ``S^2`` kernel.
* ``RadialSpec`` -- radially symmetric fields on a warped product
  ``N x [0, r_max]`` represented by node values on a collocation grid with
  area-weight ``A(r)``; derivatives use 4th-order finite differences and the
  outer endpoint carries a Dirichlet condition.

Metric rescaling by a factor ``s`` (metric ``s * g``) is handled exactly:
volume elements pick up ``s^(n/2)`` and gradient/Laplacian spectra pick up
``1/s``.  Quadrature grids are sized so that products of up to ``p_max + 1``
basis functions are integrated exactly; with that sizing, analysis is the exact
quadrature adjoint of synthesis and Parseval identities hold to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import gamma, pi
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.special import eval_gegenbauer, gammaln, lpmv, roots_legendre


class BasisError(ValueError):
    """Raised for inconsistent basis specifications or mismatched fields."""


def unit_sphere_volume(n: int) -> float:
    """Surface volume of the unit n-sphere, 2 pi^((n+1)/2) / Gamma((n+1)/2)."""
    return 2.0 * pi ** ((n + 1) / 2) / gamma((n + 1) / 2)


# ---------------------------------------------------------------------------
# Torus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorusSpec:
    """Fourier discretization of the flat torus ``T^n`` with side ``period``.

    Args:
        n: spatial dimension (1, 2 or 3).
        period: side length ``k`` of the fundamental cell.
        grid_points: number of grid points per axis (even, at least 8).
        metric_scale: factor ``s`` multiplying the flat metric.
    """

    n: int
    period: float = 1.0
    grid_points: int = 32
    metric_scale: float = 1.0

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise BasisError(f"torus dimension must be 1, 2 or 3, got {self.n}")
        if self.period <= 0:
            raise BasisError("period must be positive")
        if self.grid_points < 8 or self.grid_points % 2 != 0:
            raise BasisError("grid_points must be even and >= 8")
        if self.metric_scale <= 0:
            raise BasisError("metric_scale must be positive")

    # -- layout ------------------------------------------------------------

    @property
    def grid_shape(self) -> tuple:
        return (self.grid_points,) * self.n

    @property
    def n_modes(self) -> int:
        return self.grid_points**self.n

    @cached_property
    def mode_numbers(self) -> np.ndarray:
        """Integer mode vectors, shape (n_modes, n), numpy FFT ordering."""
        freqs = np.fft.fftfreq(self.grid_points) * self.grid_points
        axes = np.meshgrid(*([freqs] * self.n), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1).astype(np.int64)

    def volume(self) -> float:
        return (np.sqrt(self.metric_scale) * self.period) ** self.n

    @property
    def parseval_factor(self) -> float:
        return self.volume()

    @cached_property
    def laplacian_eigs(self) -> np.ndarray:
        """Eigenvalue of ``-Laplace`` on each mode: |2 pi m / k|^2 / s."""
        wave = 2.0 * pi * self.mode_numbers / self.period
        return np.sum(wave**2, axis=1) / self.metric_scale

    def mode_labels(self) -> list:
        return ["m=" + ",".join(str(int(v)) for v in row) for row in self.mode_numbers]

    # -- transforms --------------------------------------------------------

    def grid(self) -> list:
        x = np.arange(self.grid_points) * (self.period / self.grid_points)
        return [x] * self.n

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        c = np.asarray(coeffs, dtype=np.complex128).reshape(self.grid_shape)
        return np.fft.ifftn(c) * self.n_modes

    def analyze(self, values: np.ndarray) -> np.ndarray:
        v = np.asarray(values, dtype=np.complex128)
        if v.shape != self.grid_shape:
            raise BasisError(f"grid shape {v.shape} != {self.grid_shape}")
        return (np.fft.fftn(v) / self.n_modes).ravel()

    def integrate(self, values: np.ndarray) -> complex:
        """Volume integral of grid samples (exact for band-limited data)."""
        w = self.volume() / self.n_modes
        return w * np.sum(values)


# ---------------------------------------------------------------------------
# Sphere: shared 2-sphere transform kernel
# ---------------------------------------------------------------------------


class _SphereKernel:
    """Batched spherical-harmonic transform on ``S^2``.

    Holds Gauss-Legendre nodes in cos(theta), a uniform longitude grid and the
    per-order associated Legendre matrices, normalized so that each mode is
    orthonormal in ``L^2`` of the unit sphere.
    """

    def __init__(self, max_degree: int, n_theta: int, n_phi: int):
        self.max_degree = max_degree
        self.n_theta = n_theta
        self.n_phi = n_phi
        x, w = roots_legendre(n_theta)
        self.cos_theta = x
        self.theta_weights = w
        self.theta = np.arccos(x)
        self.phi = 2.0 * pi * np.arange(n_phi) / n_phi
        L = max_degree
        # legendre[m] has one column per degree l = m..L.
        self.legendre = []
        for m in range(L + 1):
            ls = np.arange(m, L + 1)
            log_norm = 0.5 * (
                np.log(2 * ls + 1) - np.log(4 * pi) + gammaln(ls - m + 1) - gammaln(ls + m + 1)
            )
            cols = [np.exp(log_norm[i]) * lpmv(m, l, x) for i, l in enumerate(ls)]
            self.legendre.append(np.stack(cols, axis=1))
        self.n_modes = (L + 1) ** 2
        self.l_of_mode = np.concatenate([np.full(2 * l + 1, l) for l in range(L + 1)])
        self.m_of_mode = np.concatenate([np.arange(-l, l + 1) for l in range(L + 1)])
        # flat indices of (l, m) for l = |m|..L at fixed m
        self._idx = {}
        for m in range(-L, L + 1):
            ls = np.arange(abs(m), L + 1)
            self._idx[m] = ls * ls + ls + m

    def synth(self, coeffs: np.ndarray) -> np.ndarray:
        """(batch, n_modes) complex -> (batch, n_theta, n_phi) samples."""
        L = self.max_degree
        batch = coeffs.shape[0]
        bins = np.zeros((batch, self.n_theta, self.n_phi), dtype=np.complex128)
        for m in range(-L, L + 1):
            prof = self.legendre[abs(m)] @ coeffs[:, self._idx[m]].T  # (n_theta, batch)
            if m < 0 and abs(m) % 2 == 1:
                prof = -prof
            bins[:, :, m % self.n_phi] = prof.T
        return np.fft.ifft(bins, axis=2) * self.n_phi

    def ana(self, values: np.ndarray) -> np.ndarray:
        """(batch, n_theta, n_phi) samples -> (batch, n_modes) coefficients."""
        L = self.max_degree
        batch = values.shape[0]
        hat = np.fft.fft(values, axis=2) * (2.0 * pi / self.n_phi)
        coeffs = np.zeros((batch, self.n_modes), dtype=np.complex128)
        wq = self.theta_weights
        for m in range(-L, L + 1):
            gm = hat[:, :, m % self.n_phi]  # (batch, n_theta)
            block = (gm * wq) @ self.legendre[abs(m)]  # (batch, L-|m|+1)
            if m < 0 and abs(m) % 2 == 1:
                block = -block
            coeffs[:, self._idx[m]] = block
        return coeffs


# ---------------------------------------------------------------------------
# Sphere spec (n = 2 and n = 3)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SphereSpec:
    """Spherical-harmonic discretization of ``S^n`` (n = 2 or 3).

    Modes are truncated at total degree ``max_degree``; the quadrature grid is
    sized so that products of up to ``p_max + 1`` basis functions integrate
    exactly.  On ``S^3`` the colatitude pair (psi, theta) both use
    ``quad_theta`` nodes (Gauss-Chebyshev of the second kind in cos(psi),
    Gauss-Legendre in cos(theta)).

    Use :meth:`for_degree` to get a grid auto-sized from ``p_max``.
    """

    n: int
    max_degree: int
    quad_theta: int
    quad_phi: int
    p_max: int = 3
    metric_scale: float = 1.0

    def __post_init__(self):
        if self.n not in (2, 3):
            raise BasisError(f"sphere dimension must be 2 or 3, got {self.n}")
        if self.max_degree < 1:
            raise BasisError("max_degree must be >= 1")
        if self.metric_scale <= 0:
            raise BasisError("metric_scale must be positive")
        L, q = self.max_degree, self.p_max
        need_theta = int(np.ceil((q + 1) * L / 2)) + 1
        need_phi = (q + 1) * L + 1
        if self.quad_theta < need_theta:
            raise BasisError(
                f"quad_theta={self.quad_theta} too small for degree {L} with "
                f"p_max={q}; need >= {need_theta}"
            )
        if self.quad_phi < need_phi:
            raise BasisError(
                f"quad_phi={self.quad_phi} too small for degree {L} with "
                f"p_max={q}; need >= {need_phi}"
            )

    @classmethod
    def for_degree(
        cls, n: int, max_degree: int, p_max: int = 3, metric_scale: float = 1.0
    ) -> "SphereSpec":
        """Build a spec with the smallest exact quadrature grid for ``p_max``."""
        need_theta = int(np.ceil((p_max + 1) * max_degree / 2)) + 1
        need_phi = (p_max + 1) * max_degree + 1
        return cls(n, max_degree, need_theta, need_phi, p_max, metric_scale)

    # -- layout ------------------------------------------------------------

    @cached_property
    def _kernel(self) -> _SphereKernel:
        return _SphereKernel(self.max_degree, self.quad_theta, self.quad_phi)

    @property
    def n_modes(self) -> int:
        L = self.max_degree
        if self.n == 2:
            return (L + 1) ** 2
        return (L + 1) * (L + 2) * (2 * L + 3) // 6

    @property
    def grid_shape(self) -> tuple:
        if self.n == 2:
            return (self.quad_theta, self.quad_phi)
        return (self.quad_theta, self.quad_theta, self.quad_phi)

    @cached_property
    def _psi_nodes(self) -> tuple:
        """Gauss-Chebyshev(2nd kind) rule for integrals against sin^2(psi)."""
        q = self.quad_theta
        a = np.arange(1, q + 1)
        psi = a * pi / (q + 1)
        weights = (pi / (q + 1)) * np.sin(psi) ** 2
        return psi, weights

    @cached_property
    def _gegenbauer(self) -> list:
        """Per-l1 normalized psi-profile matrices, shape (n_psi, L - l1 + 1)."""
        psi, _ = self._psi_nodes
        t = np.cos(psi)
        L = self.max_degree
        mats = []
        for l1 in range(L + 1):
            cols = []
            for l in range(l1, L + 1):
                log_h = (
                    np.log(pi)
                    - (1 + 2 * l1) * np.log(2.0)
                    + gammaln(l + l1 + 2)
                    - gammaln(l - l1 + 1)
                    - np.log(l + 1.0)
                    - 2 * gammaln(l1 + 1)
                )
                norm = np.exp(-0.5 * log_h)
                cols.append(norm * np.sin(psi) ** l1 * eval_gegenbauer(l - l1, l1 + 1, t))
            mats.append(np.stack(cols, axis=1))
        return mats

    @cached_property
    def _mode_table(self) -> np.ndarray:
        """(n_modes, 3) int array of (l, l1, m); for n=2 the l1 column equals l."""
        L = self.max_degree
        rows = []
        if self.n == 2:
            for l in range(L + 1):
                for m in range(-l, l + 1):
                    rows.append((l, l, m))
        else:
            for l in range(L + 1):
                for l1 in range(l + 1):
                    for m in range(-l1, l1 + 1):
                        rows.append((l, l1, m))
        return np.array(rows, dtype=np.int64)

    @property
    def degree_of_mode(self) -> np.ndarray:
        return self._mode_table[:, 0]

    @property
    def azimuthal_of_mode(self) -> np.ndarray:
        return self._mode_table[:, 2]

    @cached_property
    def laplacian_eigs(self) -> np.ndarray:
        l = self.degree_of_mode
        return l * (l + self.n - 1) / self.metric_scale

    def mode_labels(self) -> list:
        if self.n == 2:
            return [f"l={l},m={m}" for l, _, m in self._mode_table]
        return [f"l={l},l1={l1},m={m}" for l, l1, m in self._mode_table]

    def volume(self) -> float:
        return self.metric_scale ** (self.n / 2) * unit_sphere_volume(self.n)

    @property
    def parseval_factor(self) -> float:
        return self.metric_scale ** (self.n / 2)

    # S^3 block bookkeeping: degree-l block is laid out like an S^2
    # coefficient vector truncated at degree l.
    @cached_property
    def _block_offsets(self) -> np.ndarray:
        L = self.max_degree
        sizes = [(l + 1) ** 2 for l in range(L + 1)]
        return np.concatenate([[0], np.cumsum(sizes)])

    def grid(self) -> list:
        k = self._kernel
        if self.n == 2:
            return [k.theta, k.phi]
        psi, _ = self._psi_nodes
        return [psi, k.theta, k.phi]

    # -- transforms --------------------------------------------------------

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        c = np.asarray(coeffs, dtype=np.complex128).ravel()
        if c.size != self.n_modes:
            raise BasisError(f"expected {self.n_modes} coefficients, got {c.size}")
        k = self._kernel
        if self.n == 2:
            return k.synth(c[None, :])[0]
        L = self.max_degree
        n_psi = self.quad_theta
        s2 = np.zeros((n_psi, (L + 1) ** 2), dtype=np.complex128)
        off = self._block_offsets
        for l1 in range(L + 1):
            # rows: degrees l = l1..L, columns: m = -l1..l1
            rows = np.stack(
                [
                    c[off[l] + l1 * l1 : off[l] + l1 * l1 + 2 * l1 + 1]
                    for l in range(l1, L + 1)
                ]
            )
            s2[:, l1 * l1 : l1 * l1 + 2 * l1 + 1] = self._gegenbauer[l1] @ rows
        return k.synth(s2)

    def analyze(self, values: np.ndarray) -> np.ndarray:
        v = np.asarray(values, dtype=np.complex128)
        if v.shape != self.grid_shape:
            raise BasisError(f"grid shape {v.shape} != {self.grid_shape}")
        k = self._kernel
        if self.n == 2:
            return k.ana(v[None, :, :])[0]
        L = self.max_degree
        _, w_psi = self._psi_nodes
        s2 = k.ana(v)  # (n_psi, (L+1)^2)
        out = np.zeros(self.n_modes, dtype=np.complex128)
        off = self._block_offsets
        for l1 in range(L + 1):
            slab = s2[:, l1 * l1 : l1 * l1 + 2 * l1 + 1]  # (n_psi, 2 l1 + 1)
            block = self._gegenbauer[l1].T @ (w_psi[:, None] * slab)
            for i, l in enumerate(range(l1, L + 1)):
                out[off[l] + l1 * l1 : off[l] + l1 * l1 + 2 * l1 + 1] = block[i]
        return out

    def integrate(self, values: np.ndarray) -> complex:
        k = self._kernel
        phi_w = 2.0 * pi / self.quad_phi
        scale = self.metric_scale ** (self.n / 2)
        if self.n == 2:
            return scale * phi_w * np.sum(k.theta_weights[:, None] * values)
        _, w_psi = self._psi_nodes
        w = w_psi[:, None, None] * k.theta_weights[None, :, None]
        return scale * phi_w * np.sum(w * values)


# ---------------------------------------------------------------------------
# Radial collocation
# ---------------------------------------------------------------------------


def finite_difference_weights(x0: float, nodes: np.ndarray, order: int) -> np.ndarray:
    """Weights of the interpolatory finite-difference rule for d^order/dx^order
    at ``x0`` from samples at ``nodes`` (Fornberg's recursion)."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    w = np.zeros((order + 1, n))
    w[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                # the new column must read the previous one before it is
                # updated below, hence the interleaving
                for k in range(mn, 0, -1):
                    w[k, i] = c1 * (k * w[k - 1, i - 1] - c5 * w[k, i - 1]) / c2
                w[0, i] = -c1 * c5 * w[0, i - 1] / c2
            for k in range(mn, 0, -1):
                w[k, j] = (c4 * w[k, j] - k * w[k - 1, j]) / c3
            w[0, j] = c4 * w[0, j] / c3
        c1 = c2
    return w[order]


@dataclass(eq=False)
class RadialSpec:
    """Collocation grid for radial fields on ``N x [0, r_max]``.

    Fields are node values on ``grid`` (which starts at 0); integrals carry the
    area weight ``A(r)`` sampled in ``weight_a`` times ``cross_section_volume``.
    The radial part of ``-Laplace`` is the variational form of
    ``-A^{-1} d/dr (A d/dr .)`` built from a 4th-order first-derivative
    stencil, which keeps it self-adjoint and positive on the discrete inner
    product.  The outer endpoint is a Dirichlet node; ``r = 0`` carries the
    natural (zero-flux) condition.

    ``weight_fn``, when given, lets domain-extension checks resample ``A``
    beyond ``r_max``.  ``dimension`` is the dimension used for exponent-range
    checks (cross-section dimension + 1).
    """

    grid: np.ndarray
    weight_a: np.ndarray
    cross_section_volume: float = 1.0
    dimension: int = 1
    weight_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.weight_a = np.asarray(self.weight_a, dtype=np.float64)
        if self.grid.ndim != 1 or self.grid.size < 16:
            raise BasisError("radial grid must be 1-D with at least 16 nodes")
        if self.grid[0] != 0.0:
            raise BasisError("radial grid must start at r = 0")
        if np.any(np.diff(self.grid) <= 0):
            raise BasisError("radial grid must be strictly increasing")
        if self.weight_a.shape != self.grid.shape:
            raise BasisError("weight_a must match the grid")
        if np.any(self.weight_a <= 0):
            raise BasisError("weight A(r) must be positive on the grid")
        if self.cross_section_volume <= 0:
            raise BasisError("cross_section_volume must be positive")
        if self.dimension < 1:
            raise BasisError("dimension must be >= 1")

    @classmethod
    def uniform(
        cls,
        r_max: float,
        nodes: int,
        weight_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        cross_section_volume: float = 1.0,
        dimension: int = 1,
    ) -> "RadialSpec":
        r = np.linspace(0.0, r_max, nodes)
        a = np.ones_like(r) if weight_fn is None else np.asarray(weight_fn(r), dtype=float)
        fn = weight_fn if weight_fn is not None else (lambda x: np.ones_like(x))
        return cls(r, a, cross_section_volume, dimension, fn)

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    @property
    def n_modes(self) -> int:
        return self.grid.size

    @property
    def grid_shape(self) -> tuple:
        return (self.grid.size,)

    def mode_labels(self) -> list:
        return [f"r={r:.6g}" for r in self.grid]

    @cached_property
    def quad_weights(self) -> np.ndarray:
        """Composite trapezoid weights on the (possibly nonuniform) grid."""
        r = self.grid
        w = np.zeros_like(r)
        dr = np.diff(r)
        w[:-1] += 0.5 * dr
        w[1:] += 0.5 * dr
        return w

    @cached_property
    def measure(self) -> np.ndarray:
        """Discrete volume measure per node: w_i * A(r_i) * Vol(N)."""
        return self.quad_weights * self.weight_a * self.cross_section_volume

    def volume(self) -> float:
        return float(np.sum(self.measure))

    @cached_property
    def first_derivative(self) -> np.ndarray:
        """Dense 4th-order first-derivative matrix (5-point stencils)."""
        n = self.grid.size
        d = np.zeros((n, n))
        width = 5
        for i in range(n):
            lo = min(max(i - 2, 0), n - width)
            sl = slice(lo, lo + width)
            d[i, sl] = finite_difference_weights(self.grid[i], self.grid[sl], 1)
        return d

    @cached_property
    def stiffness(self) -> np.ndarray:
        """Matrix of the Dirichlet form: u^H K v = integral A u' v' * Vol(N)."""
        d = self.first_derivative
        wa = self.quad_weights * self.weight_a * self.cross_section_volume
        k = d.T @ (wa[:, None] * d)
        return 0.5 * (k + k.T)

    def apply_minus_laplacian(self, values: np.ndarray) -> np.ndarray:
        """Variational ``-A^{-1} (A u')'`` as node values."""
        return (self.stiffness @ values) / self.measure

    def grid_coords(self) -> list:
        return [self.grid]

    # transforms are the identity: coefficients are node values
    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        c = np.asarray(coeffs, dtype=np.complex128).ravel()
        if c.size != self.n_modes:
            raise BasisError(f"expected {self.n_modes} node values, got {c.size}")
        return c.copy()

    def analyze(self, values: np.ndarray) -> np.ndarray:
        v = np.asarray(values, dtype=np.complex128).ravel()
        if v.size != self.n_modes:
            raise BasisError(f"grid shape {v.shape} != {self.grid_shape}")
        return v.copy()

    def integrate(self, values: np.ndarray) -> complex:
        return np.sum(self.measure * np.asarray(values).ravel())


ManifoldSpec = Union[TorusSpec, SphereSpec, RadialSpec]


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------


@dataclass
class SpectralField:
    """A field represented by basis coefficients on one of the manifold specs.

    Treated as immutable: arithmetic returns new instances.
    """

    basis: ManifoldSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).ravel()
        if c.size != self.basis.n_modes:
            raise BasisError(
                f"coefficient vector of length {c.size} does not match basis "
                f"with {self.basis.n_modes} modes"
            )
        self.coeffs = c

    def copy(self) -> "SpectralField":
        return SpectralField(self.basis, self.coeffs.copy())

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_basis(self, other)
        return SpectralField(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_basis(self, other)
        return SpectralField(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField(self.basis, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.basis, -self.coeffs)


def _check_same_basis(u: SpectralField, v: SpectralField) -> None:
    if u.basis is not v.basis and u.basis != v.basis:
        raise BasisError("fields live on different bases")


def to_grid(u: SpectralField) -> np.ndarray:
    """Synthesize a coefficient field to samples on the quadrature grid."""
    return u.basis.synthesize(u.coeffs)


def from_grid(spec: ManifoldSpec, values: np.ndarray) -> SpectralField:
    """Project grid samples onto the basis (exact for band-limited data)."""
    return SpectralField(spec, spec.analyze(values))


def inner(u: SpectralField, v: SpectralField) -> complex:
    """L^2 inner product ``integral u * conj(v)`` with the metric volume."""
    _check_same_basis(u, v)
    spec = u.basis
    if isinstance(spec, RadialSpec):
        return complex(np.sum(spec.measure * u.coeffs * np.conj(v.coeffs)))
    return complex(spec.parseval_factor * np.vdot(v.coeffs, u.coeffs))


def l2_norm_sq(u: SpectralField) -> float:
    return float(np.real(inner(u, u)))


def grad_norm_sq(u: SpectralField) -> float:
    """``|grad u|^2`` integrated, via the spectral/variational Dirichlet form."""
    spec = u.basis
    if isinstance(spec, RadialSpec):
        return float(np.real(np.vdot(u.coeffs, spec.stiffness @ u.coeffs)))
    return float(spec.parseval_factor * np.sum(spec.laplacian_eigs * np.abs(u.coeffs) ** 2))


def power_integral(u: SpectralField, p: float) -> float:
    """``integral |u|^(p+1)`` by grid quadrature."""
    g = np.abs(to_grid(u))
    return float(np.real(u.basis.integrate(g ** (p + 1))))


class NormTriple(NamedTuple):
    l2: float
    h1: float
    lp1: float


def norms(u: SpectralField, p: float) -> NormTriple:
    """(L^2 norm, H^1 norm, L^(p+1) norm) of a field."""
    l2sq = l2_norm_sq(u)
    h1 = np.sqrt(l2sq + grad_norm_sq(u))
    lp1 = power_integral(u, p) ** (1.0 / (p + 1))
    return NormTriple(np.sqrt(l2sq), h1, lp1)


def constant_field(spec: ManifoldSpec, value: complex = 1.0) -> SpectralField:
    """The constant field with the given value."""
    c = np.zeros(spec.n_modes, dtype=np.complex128)
    if isinstance(spec, TorusSpec):
        c[0] = value
    elif isinstance(spec, SphereSpec):
        c[0] = value * np.sqrt(unit_sphere_volume(spec.n))
    else:
        c[:] = value
    return SpectralField(spec, c)


def mode_field(spec: ManifoldSpec, index: int, amplitude: complex = 1.0) -> SpectralField:
    """The single basis mode at flat ``index``."""
    c = np.zeros(spec.n_modes, dtype=np.complex128)
    c[index] = amplitude
    return SpectralField(spec, c)


def mean_value(u: SpectralField) -> complex:
    """Volume average of the field."""
    one = constant_field(u.basis, 1.0)
    return inner(u, one) / u.basis.volume()


def random_band_limited(
    spec: ManifoldSpec,
    rng: np.random.Generator,
    real_valued: bool = False,
    decay: float = 1.0,
) -> SpectralField:
    """A smooth random field with coefficients damped by ``(1 + eig)^-decay``.

    On radial grids the field is a sum of seeded Gaussian bumps tapered to
    honor the outer Dirichlet condition.
    """
    if isinstance(spec, RadialSpec):
        r = spec.grid
        vals = np.zeros_like(r, dtype=np.complex128)
        n_bumps = 4
        for _ in range(n_bumps):
            center = rng.uniform(0.1, 0.7) * spec.r_max
            width = rng.uniform(0.03, 0.12) * spec.r_max
            amp = rng.standard_normal() + (0.0 if real_valued else 1j * rng.standard_normal())
            vals += amp * np.exp(-((r - center) ** 2) / (2 * width**2))
        vals *= 1.0 - (r / spec.r_max) ** 4
        vals[-1] = 0.0
        if real_valued:
            vals = vals.real.astype(np.complex128)
        return SpectralField(spec, vals)
    amp = 1.0 / (1.0 + spec.laplacian_eigs) ** decay
    c = amp * (rng.standard_normal(spec.n_modes) + 1j * rng.standard_normal(spec.n_modes))
    u = SpectralField(spec, c)
    if real_valued:
        u = from_grid(spec, to_grid(u).real)
    return u
