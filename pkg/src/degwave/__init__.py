"""Numerical laboratory for the boundary-damped degenerate wave equation.

``w_tt = (x^alpha w_x)_x`` on ``(0, 1)`` with ``w(1, t) = 0`` and the feedback
``(x^alpha w_x)(0, t) = w_t(0, t)``, for ``alpha`` in ``[1, 2)``.
"""

from .errors import BesselRangeError, ConvergenceError, DomainError, SingularInputError
from .spectrum import DegeneracyParams, degeneracy_params

__all__ = [
    "BesselRangeError",
    "ConvergenceError",
    "DomainError",
    "SingularInputError",
    "DegeneracyParams",
    "degeneracy_params",
]

__version__ = "0.1.0"
