"""Hermite-Krichever ansatz for Fuchsian equations with elliptic coefficients."""

from .elliptic import Lattice, make_lattice, lattice_from_tau, wp, wp_prime, zeta_w, sigma, wp_inverse
from .errors import HeunHKError, NumericalError, ValidationError
from .fuchsian import FuchsianData, algebraic_from_elliptic, elliptic_from_algebraic

__version__ = "0.1.0"
