"""Closed-form spectrum of the undamped degenerate operator.

For ``A u = -(x^alpha u')'`` on ``(0, 1)`` with ``u(1) = 0`` and zero weighted
flux at ``x = 0`` the eigenpairs are

    beta_n = kappa j_{nu,n},
    u_n(x) = sqrt(2 kappa) / |J'_nu(j_{nu,n})| x^{(1-alpha)/2} J_nu(j_{nu,n} x^kappa),

with ``nu = (alpha-1)/(2-alpha)``, ``kappa = (2-alpha)/2`` and operator
eigenvalue ``mu_n = beta_n**2``.  The ``u_n`` are orthonormal in ``L^2``.

Integrals over ``(0, 1)`` are evaluated in the variable ``y = x**kappa``,
which turns ``x^{1-alpha} dx`` into ``y dy / kappa`` and removes the endpoint
singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .specfun import bessel_j, bessel_j_deriv, bessel_j_zero, bessel_j_zeros, gamma

__all__ = [
    "DegeneracyParams",
    "EigenPair",
    "degeneracy_params",
    "eigen_frequency",
    "eigen_frequencies",
    "eigenpair",
    "eigenfunction_eval",
    "eigenfunction_deriv",
    "eigenfunction_flux",
    "eigenfunction_origin_value",
    "mode_norm_growth",
    "integrate_unit_interval",
]


@dataclass(frozen=True)
class DegeneracyParams:
    """Degeneracy exponent ``alpha`` with its derived Bessel exponents."""

    alpha: float
    nu: float
    kappa: float

    @property
    def is_integer_nu(self) -> bool:
        """True when ``nu`` is a positive integer (within 1e-12)."""
        n = round(self.nu)
        return n >= 1 and abs(self.nu - n) <= 1e-12

    @property
    def in_paper_integer_range(self) -> bool:
        """``alpha >= 3/2``; claimed in the source to be equivalent to integer ``nu``.

        It is not: ``alpha = 1.6`` gives ``nu = 1.5``.  Kept so both readings
        can be reported side by side.
        """
        return self.alpha >= 1.5

    @property
    def grading(self) -> float:
        """Mesh grading ``1/kappa`` that makes a mesh uniform in ``x**kappa``."""
        return 1.0 / self.kappa


def degeneracy_params(alpha: float) -> DegeneracyParams:
    """Build :class:`DegeneracyParams` for ``alpha`` in ``[1, 2)``."""
    alpha = float(alpha)
    if not (1.0 <= alpha < 2.0):
        raise DomainError(f"alpha must lie in [1, 2), got {alpha!r}")
    return DegeneracyParams(alpha=alpha, nu=(alpha - 1.0) / (2.0 - alpha), kappa=(2.0 - alpha) / 2.0)


@dataclass(frozen=True)
class EigenPair:
    n: int
    beta: float
    mu: float
    normalization: float
    zero: float


def _check_index(n):
    if int(n) != n or n < 1:
        raise DomainError(f"mode index must be a positive integer, got {n!r}")
    return int(n)


def eigen_frequency(params: DegeneracyParams, n: int) -> float:
    """``beta_n = kappa * j_{nu,n}``."""
    n = _check_index(n)
    return params.kappa * bessel_j_zero(params.nu, n)


def eigen_frequencies(params: DegeneracyParams, count: int) -> np.ndarray:
    """``beta_1 .. beta_count`` as an array."""
    return params.kappa * bessel_j_zeros(params.nu, _check_index(count))


def _normalization(params, zero):
    return math.sqrt(2.0 * params.kappa) / abs(float(bessel_j_deriv(params.nu, zero)))


def eigenpair(params: DegeneracyParams, n: int) -> EigenPair:
    n = _check_index(n)
    j = bessel_j_zero(params.nu, n)
    beta = params.kappa * j
    return EigenPair(n=n, beta=beta, mu=beta * beta, normalization=_normalization(params, j), zero=j)


def _as_unit_points(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr >= 0)) or np.any(arr > 1):
        raise DomainError("x must lie in [0, 1]")
    return arr


def eigenfunction_origin_value(params: DegeneracyParams, n: int) -> float:
    """Limit of ``u_n(x)`` as ``x -> 0``.

    The blow-up of ``x^{(1-alpha)/2}`` is cancelled exactly by
    ``J_nu(j x^kappa) ~ (j x^kappa / 2)^nu / Gamma(nu+1)`` because
    ``kappa nu = (alpha-1)/2``, so the limit is finite for every alpha:
    ``c_n (j/2)^nu / Gamma(nu+1)``.
    """
    p = eigenpair(params, n)
    return p.normalization * (0.5 * p.zero) ** params.nu / gamma(params.nu + 1.0)


def eigenfunction_eval(params: DegeneracyParams, n: int, x):
    """Pointwise values of the normalized eigenfunction ``u_n``.

    ``x = 0`` returns the finite limit from :func:`eigenfunction_origin_value`.

    Raises
    ------
    DomainError
        For ``x`` outside ``[0, 1]``.
    """
    arr = _as_unit_points(x)
    p = eigenpair(params, n)
    flat = np.atleast_1d(arr)
    out = np.empty_like(flat)
    pos = flat > 0
    xp = flat[pos]
    out[pos] = p.normalization * xp ** (0.5 * (1.0 - params.alpha)) * bessel_j(params.nu, p.zero * xp**params.kappa)
    if (~pos).any():
        out[~pos] = eigenfunction_origin_value(params, n)
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def eigenfunction_deriv(params: DegeneracyParams, n: int, x):
    """``u_n'(x) = -c_n j kappa x^{1/2-alpha} J_{nu+1}(j x^kappa)`` for ``x > 0``.

    Obtained from ``J'_nu(s) = (nu/s) J_nu(s) - J_{nu+1}(s)``; the ``J_nu``
    terms cancel identically.
    """
    arr = _as_unit_points(x)
    if np.any(arr <= 0):
        raise DomainError("derivative is evaluated for x > 0 only")
    p = eigenpair(params, n)
    k = params.kappa
    return -p.normalization * p.zero * k * arr ** (0.5 - params.alpha) * bessel_j(params.nu + 1.0, p.zero * arr**k)


def eigenfunction_flux(params: DegeneracyParams, n: int, x):
    """Weighted flux ``x^alpha u_n'(x)``; tends to zero linearly as ``x -> 0``."""
    arr = _as_unit_points(x)
    p = eigenpair(params, n)
    k = params.kappa
    return -p.normalization * p.zero * k * np.sqrt(arr) * bessel_j(params.nu + 1.0, p.zero * arr**k)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(order: int):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def integrate_unit_interval(func, kappa: float, panels: int = 64, order: int = 16) -> float:
    """Integrate ``func(x)`` over ``(0, 1)`` with Gauss-Legendre in ``y = x**kappa``.

    ``func`` receives an array of interior points and must be vectorized.
    """
    t, w = _gauss_legendre(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    y = (0.5 * (b - a) * t + 0.5 * (a + b)).ravel()
    wy = (0.5 * (b - a) * w).ravel()
    x = y ** (1.0 / kappa)
    jac = y ** (1.0 / kappa - 1.0) / kappa
    return float(np.sum(wy * jac * func(x)))


def mode_norm_growth(params: DegeneracyParams, n: int, panels: int | None = None) -> float:
    """Energy norm ``||(u_n, i beta_n u_n)||^2 = int x^alpha u_n'^2 + beta_n^2 int u_n^2``.

    Both integrals are computed by quadrature; a panel doubling checks the
    result.  Since ``int x^alpha u_n'^2 = beta_n^2`` and ``int u_n^2 = 1`` the
    exact value is ``2 beta_n^2``.

    Raises
    ------
    ConvergenceError
        If the doubled-panel estimate disagrees beyond ``1e-10`` relative.
    """
    n = _check_index(n)
    beta = eigen_frequency(params, n)
    base = panels or max(32, 4 * n)

    def energy(p):
        grad = integrate_unit_interval(
            lambda x: x**params.alpha * eigenfunction_deriv(params, n, x) ** 2, params.kappa, p
        )
        mass = integrate_unit_interval(lambda x: eigenfunction_eval(params, n, x) ** 2, params.kappa, p)
        return grad + beta * beta * mass

    coarse, fine = energy(base), energy(2 * base)
    if abs(fine - coarse) > 1e-10 * abs(fine):
        raise ConvergenceError(f"mode norm quadrature not converged for n={n}: {coarse} vs {fine}")
    return fine
