"""Constrained spectral minimization of travelling-wave energies.

Subpackages:

* :mod:`travwave.basis` -- manifold discretizations and spectral fields.
* :mod:`travwave.operators` -- Laplacians, symmetry-generator actions,
  quadratic forms, energies, gradients, and coercivity diagnostics.
* :mod:`travwave.harmonic` -- exact harmonic-polynomial representations and
  semidefiniteness checks for the shifted spherical operator family.
* :mod:`travwave.minimize` -- projected-gradient constrained minimization.
* :mod:`travwave.experiments` -- scaling sweeps, interpolation-inequality
  scans, scaling-identity and perturbation studies.
* :mod:`travwave.radial` -- noncompact radial diagnostics: decay criteria,
  concentration-splitting-vanishing classification, cutoff decompositions.
* :mod:`travwave.cli` -- command-line entry points.
"""

__version__ = "0.1.0"
