"""Frequency-domain boundary problem and its transfer function.

The Laplace transform in time of the boundary-controlled problem
``w_tt = (x^alpha w_x)_x``, ``(x^alpha w_x)(0) = theta``, ``w(1) = 0`` gives

    (x^alpha w_x)_x = lam^2 w,    x^alpha w_x -> theta_hat at 0,    w(1) = 0,

solved by ``x^{(1-alpha)/2} Z_nu(z(x))`` with ``z(x) = (2 lam/(2-alpha)) x^kappa``
and ``Z`` any modified Bessel function of order ``nu``.

Two bases are used: ``(I_nu, K_nu)`` for integer ``nu`` (including 0) and
``(I_nu, I_{-nu})`` otherwise.  The weighted flux at the origin of
``x^{(1-alpha)/2} K_nu(z)`` tends to the constant :func:`c2`, while
``x^{(1-alpha)/2} K_nu(z)`` itself grows like ``x^{1-alpha}``; the latter is
what :func:`c_nu_probe` samples.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import BesselRangeError, DomainError, SingularInputError
from .specfun import gamma, mod_bessel_i, mod_bessel_ik_scaled, mod_bessel_k, principal_pow, rgamma
from .spectrum import DegeneracyParams

__all__ = [
    "DEFAULT_CUTOFF",
    "BESSEL_ARGS",
    "TransferSample",
    "ProbeResult",
    "CutoffDiagnostic",
    "BoundednessDiagnostic",
    "uses_k_basis",
    "bessel_argument",
    "laplace_solution",
    "c2",
    "coefficients_A1_B1",
    "coefficients_A2_B2",
    "boundary_coefficients",
    "c_nu_probe",
    "probe_sequence",
    "probe_slope",
    "transfer_H",
    "reconstructed_boundary_value",
    "scan_vertical",
    "scan_ray",
    "boundedness_diagnostic",
    "cutoff_family",
    "write_samples_csv",
]

DEFAULT_CUTOFF = 1e-6
BESSEL_ARGS = ("treee", "besfu")
FLAG_HALF_PLANE = "outside-laplace-half-plane"
FLAG_BESSEL = "bessel-failure"


def _regime(params: DegeneracyParams) -> str:
    return "integer-nu" if params.is_integer_nu else "noninteger-nu"


def uses_k_basis(params: DegeneracyParams) -> bool:
    """True when ``nu`` is an integer (0 included), where ``I_{-nu} = I_nu``."""
    return abs(params.nu - round(params.nu)) <= 1e-12


def _check_lambda(lam, allow_imaginary=False) -> complex:
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    if lam.real < 0 or (lam.real == 0 and not allow_imaginary):
        raise DomainError(f"lambda must satisfy Re lambda > 0, got {lam!r}")
    return lam


def _z_scale(lam: complex, params: DegeneracyParams) -> complex:
    """``2 lam / (2 - alpha)``: the Bessel argument at ``x = 1``."""
    return 2.0 * lam / (2.0 - params.alpha)


def bessel_argument(lam, params: DegeneracyParams, mode: str = "treee") -> complex:
    """Argument of the ``K_nu/I_nu`` ratio inside the transfer function.

    ``"treee"`` is the printed ``(nu+1) lam = lam/(2-alpha)``; ``"besfu"`` is
    the value ``2 lam/(2-alpha)`` at which the boundary condition at ``x = 1``
    is imposed.  They differ by a factor 2.
    """
    if mode == "treee":
        return (params.nu + 1.0) * complex(lam)
    if mode == "besfu":
        return _z_scale(complex(lam), params)
    raise DomainError(f"bessel argument mode must be one of {BESSEL_ARGS}, got {mode!r}")


def laplace_solution(x, lam, params: DegeneracyParams, coeffs, basis: str | None = None) -> complex:
    """``x^{(1-alpha)/2} [A I_nu(z) + B Z(z)]`` with ``z = 2 lam/(2-alpha) x^kappa``.

    Parameters
    ----------
    coeffs : (complex, complex)
        ``(A, B)``.
    basis : {"K", "I-nu"}, optional
        Second solution: ``K_nu`` or ``I_{-nu}``.  Defaults to ``K`` for
        integer ``nu`` and ``I-nu`` otherwise.
    """
    x = float(x)
    if not (0.0 < x <= 1.0):
        raise DomainError(f"x must lie in (0, 1], got {x!r}")
    lam = _check_lambda(lam)
    A, B = complex(coeffs[0]), complex(coeffs[1])
    if basis is None:
        basis = "K" if uses_k_basis(params) else "I-nu"
    z = _z_scale(lam, params) * x**params.kappa
    val = A * mod_bessel_i(params.nu, z) if A != 0 else 0j
    if B != 0:
        if basis == "K":
            val += B * mod_bessel_k(params.nu, z)
        elif basis == "I-nu":
            val += B * mod_bessel_i(-params.nu, z)
        else:
            raise DomainError(f"unknown basis {basis!r}")
    return x ** (0.5 * (1.0 - params.alpha)) * val


def c2(lam, params: DegeneracyParams) -> complex:
    """``-(lam/2) Gamma(1/(2-alpha)) ((2-alpha)/lam)^{1/(2-alpha)}``, principal branch.

    This equals the limit at ``x = 0`` of the weighted flux of
    ``x^{(1-alpha)/2} K_nu(z(x))``, which is why it plays the role of the
    constant multiplying ``B_1`` in the flux condition.
    """
    lam = complex(lam)
    if lam == 0:
        raise DomainError("c2 is undefined at lambda = 0")
    p = 1.0 / (2.0 - params.alpha)
    return -(lam / 2.0) * gamma(p) * principal_pow((2.0 - params.alpha) / lam, p)


def _k_over_i(nu: float, w: complex) -> complex:
    """``K_nu(w)/I_nu(w)`` through the exponentially scaled pair."""
    ei, ek = mod_bessel_ik_scaled(nu, w)
    if ei == 0:
        raise SingularInputError(f"I_nu vanishes at {w!r}")
    return ek / ei * cmath.exp(-2.0 * w)


def coefficients_A1_B1(lam, params: DegeneracyParams, theta_hat) -> tuple[complex, complex]:
    """``A_1 = -(K_nu/I_nu)(z_1) theta/c2``, ``B_1 = theta/c2`` with ``z_1 = 2 lam/(2-alpha)``.

    Enforces ``w(1) = 0`` and weighted flux ``theta`` at the origin for the
    ``(I_nu, K_nu)`` basis.
    """
    lam = _check_lambda(lam)
    theta_hat = complex(theta_hat)
    if theta_hat == 0:
        return 0j, 0j
    b1 = theta_hat / c2(lam, params)
    return -_k_over_i(params.nu, _z_scale(lam, params)) * b1, b1


def coefficients_A2_B2(lam, params: DegeneracyParams, theta_hat, variant: str = "derived") -> tuple[complex, complex]:
    """Coefficients for the ``(I_nu, I_{-nu})`` basis, noninteger ``nu``.

    ``variant="derived"`` imposes the flux and Dirichlet conditions exactly:
    ``B_2 = theta Gamma(1-nu) (z_1/2)^nu / (1-alpha)`` and
    ``A_2 = -B_2 I_{-nu}(z_1)/I_nu(z_1)``.  ``variant="printed"`` returns the
    alternative closed form ``A_2 = -B_2 = (z_1/2)^nu theta/(alpha-1)``, which
    does not satisfy ``w(1) = 0``; it is kept for comparison.
    """
    lam = _check_lambda(lam)
    if uses_k_basis(params):
        raise DomainError("the (I_nu, I_-nu) basis is degenerate for integer nu")
    theta_hat = complex(theta_hat)
    z1 = _z_scale(lam, params)
    half_pow = principal_pow(z1 / 2.0, params.nu)
    if variant == "printed":
        b2 = half_pow * theta_hat / (1.0 - params.alpha)
        return -b2, b2
    if variant != "derived":
        raise DomainError(f"unknown variant {variant!r}")
    r = rgamma(1.0 - params.nu)
    b2 = theta_hat * half_pow / (r * (1.0 - params.alpha))
    a2 = -b2 * mod_bessel_i(-params.nu, z1) / mod_bessel_i(params.nu, z1)
    return a2, b2


def boundary_coefficients(lam, params: DegeneracyParams, theta_hat=1.0) -> tuple[complex, complex]:
    """Coefficients in the natural basis for ``params`` (see :func:`uses_k_basis`)."""
    if uses_k_basis(params):
        return coefficients_A1_B1(lam, params, theta_hat)
    return coefficients_A2_B2(lam, params, theta_hat)


# --------------------------------------------------------------------------- c_nu probe


@dataclass(frozen=True)
class ProbeResult:
    xs: np.ndarray
    values: np.ndarray
    verdict: str


def _verdict(mags: np.ndarray, rtol: float = 1e-3) -> str:
    d = np.diff(np.log(mags))
    if len(d) == 0:
        return "converged"
    tail = d[len(d) // 2 :]
    if np.all(np.abs(tail) <= rtol):
        return "converged"
    if np.all(d > 0):
        return "diverging"
    if np.any(np.sign(d[1:]) != np.sign(d[:-1])):
        return "oscillating"
    return "converged"


def probe_sequence(cutoff: float = DEFAULT_CUTOFF, start: float = 1e-2, step_decades: float = 2.0) -> np.ndarray:
    """Decreasing ``x`` values from ``start`` to ``cutoff`` in ``step_decades`` steps."""
    if not (0 < cutoff <= start <= 0.1):
        raise DomainError("need 0 < cutoff <= start <= 0.1")
    hi, lo = math.log10(start), math.log10(cutoff)
    n = max(1, int(math.ceil((hi - lo) / step_decades - 1e-9)))
    return 10.0 ** np.linspace(hi, lo, n + 1)


def c_nu_probe(lam, params: DegeneracyParams, xs) -> ProbeResult:
    """``x^{(1-alpha)/2} K_nu(2 lam/(2-alpha) x^kappa)`` along decreasing ``xs``.

    ``lam`` may lie on the imaginary axis.  The verdict compares successive
    magnitudes: ``"converged"``, ``"diverging"`` or ``"oscillating"``.
    """
    lam = _check_lambda(lam, allow_imaginary=True)
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or len(xs) == 0 or np.any(xs <= 0) or np.any(xs > 0.1) or np.any(np.diff(xs) >= 0):
        raise DomainError("probe points must be strictly decreasing within (0, 0.1]")
    zs = _z_scale(lam, params)
    vals = np.array(
        [x ** (0.5 * (1.0 - params.alpha)) * mod_bessel_k(params.nu, zs * x**params.kappa) for x in xs]
    )
    return ProbeResult(xs=xs, values=vals, verdict=_verdict(np.abs(vals)))


def probe_slope(lam, params: DegeneracyParams, xs) -> float:
    """Least-squares slope of ``log|probe|`` against ``log x``."""
    res = c_nu_probe(lam, params, xs)
    return float(np.polyfit(np.log(res.xs), np.log(np.abs(res.values)), 1)[0])


# --------------------------------------------------------------------------- transfer function


def transfer_H(
    lam,
    params: DegeneracyParams,
    c_nu_value,
    bessel_arg: str = "treee",
    inverse_lambda: bool = True,
) -> complex:
    """``2 ((nu+1) lam)^{nu+1} / (lam Gamma(nu+1)) * (((nu+1) lam)^nu K_nu(w)/I_nu(w) - c_nu)``.

    ``w`` is ``(nu+1) lam`` for ``bessel_arg="treee"`` and ``2 lam/(2-alpha)``
    for ``"besfu"``.  ``inverse_lambda=False`` drops the ``1/lam`` factor.
    The prefactor with ``1/lam`` equals ``-1/c2(lam)``.
    """
    lam = _check_lambda(lam, allow_imaginary=True)
    nu = params.nu
    s = (nu + 1.0) * lam
    pre = 2.0 * principal_pow(s, nu + 1.0) / gamma(nu + 1.0)
    if inverse_lambda:
        pre /= lam
    w = bessel_argument(lam, params, bessel_arg)
    return pre * (principal_pow(s, nu) * _k_over_i(nu, w) - complex(c_nu_value))


def reconstructed_boundary_value(lam, params: DegeneracyParams, cutoff: float, theta_hat=1.0) -> complex:
    """``w_hat(x*, lam)`` from the exact boundary coefficients; ``w_hat(0)`` proxy."""
    coeffs = boundary_coefficients(lam, params, theta_hat)
    return laplace_solution(cutoff, lam, params, coeffs)


@dataclass(frozen=True)
class TransferSample:
    """One point of a transfer-function scan."""

    lam: complex
    H: complex
    c_nu_estimate: complex
    regime: str
    verdict: str
    flag: str = ""

    def row(self) -> list:
        lam = self.lam
        return [
            repr(lam.real),
            repr(lam.imag),
            repr(abs(lam)),
            repr(cmath.phase(lam)),
            repr(self.H.real),
            repr(self.H.imag),
            repr(abs(self.H)),
            repr(abs(self.c_nu_estimate)),
            self.verdict,
        ]


CSV_COLUMNS = ["re_lambda", "im_lambda", "abs_lambda", "arg_lambda", "re_H", "im_H", "abs_H", "abs_c_nu_probe", "verdict"]


def _sample(lam, params, cutoff, bessel_arg, inverse_lambda) -> TransferSample:
    flags = []
    if lam.real <= 0:
        flags.append(FLAG_HALF_PLANE)
    try:
        probe = c_nu_probe(lam, params, probe_sequence(cutoff))
        c_est, verdict = complex(probe.values[-1]), probe.verdict
    except (BesselRangeError, SingularInputError, ArithmeticError):
        c_est, verdict = complex("nan"), "failed"
        flags.append(FLAG_BESSEL)
    try:
        h = transfer_H(lam, params, c_est, bessel_arg, inverse_lambda)
    except (BesselRangeError, SingularInputError, ArithmeticError):
        h = complex("nan")
        flags.append(FLAG_BESSEL)
    return TransferSample(lam, h, c_est, _regime(params), verdict, ";".join(flags))


def scan_vertical(
    gamma_: float,
    kappas,
    params: DegeneracyParams,
    cutoff: float = DEFAULT_CUTOFF,
    bessel_arg: str = "treee",
    inverse_lambda: bool = True,
) -> list[TransferSample]:
    """Samples of ``H`` along ``lam = gamma + i kappa``."""
    if not gamma_ > 0:
        raise DomainError("gamma must be positive")
    return [_sample(complex(gamma_, float(k)), params, cutoff, bessel_arg, inverse_lambda) for k in kappas]


def scan_ray(
    theta: float,
    radii,
    params: DegeneracyParams,
    cutoff: float = DEFAULT_CUTOFF,
    bessel_arg: str = "treee",
    inverse_lambda: bool = True,
) -> list[TransferSample]:
    """Samples along ``lam = r e^{i theta}``; ``theta = pi/2`` is flagged."""
    if not (-math.pi / 2 < theta <= math.pi / 2):
        raise DomainError("theta must lie in (-pi/2, pi/2]")
    out = []
    for r in radii:
        lam = cmath.rect(float(r), theta)
        if abs(theta - math.pi / 2) < 1e-15:
            lam = complex(0.0, float(r))
        out.append(_sample(lam, params, cutoff, bessel_arg, inverse_lambda))
    return out


# --------------------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class BoundednessDiagnostic:
    """Log-log slope of the running maximum of ``|H|`` against ``|Im lam|``."""

    slope: float
    sup_abs_H: float
    threshold: float = 0.1

    @property
    def bounded(self) -> bool:
        return self.slope <= self.threshold


def boundedness_diagnostic(samples: list[TransferSample], min_kappa: float = 1.0, threshold: float = 0.1):
    k = np.array([abs(s.lam.imag) for s in samples])
    h = np.array([abs(s.H) for s in samples])
    order = np.argsort(k)
    k, h = k[order], h[order]
    ok = np.isfinite(h)
    k, h = k[ok], h[ok]
    running = np.maximum.accumulate(h)
    sel = k >= min_kappa
    if sel.sum() < 2:
        raise DomainError("need samples with |Im lambda| >= min_kappa")
    slope = float(np.polyfit(np.log(k[sel]), np.log(running[sel]), 1)[0])
    return BoundednessDiagnostic(slope=slope, sup_abs_H=float(running[-1]), threshold=threshold)


@dataclass(frozen=True)
class CutoffDiagnostic:
    """Sup over the sampled ``lam`` of ``|w_hat(x*, lam)|`` for each cutoff ``x*``."""

    cutoffs: tuple
    values: tuple
    required_ratio: float = 10.0

    @property
    def ratios(self) -> tuple:
        return tuple(b / a for a, b in zip(self.values[:-1], self.values[1:]))

    @property
    def grows(self) -> bool:
        return all(r > 1.0 for r in self.ratios)

    @property
    def unbounded(self) -> bool:
        """Monotone growth with at least ``required_ratio`` per cutoff step."""
        return all(r >= self.required_ratio for r in self.ratios)


def cutoff_family(
    lams,
    params: DegeneracyParams,
    cutoffs=(1e-4, 1e-6, 1e-8),
    theta_hat=1.0,
    required_ratio: float = 10.0,
) -> CutoffDiagnostic:
    """Track the reconstructed boundary value as the cutoff decreases."""
    cutoffs = tuple(float(c) for c in cutoffs)
    if any(b >= a for a, b in zip(cutoffs[:-1], cutoffs[1:])):
        raise DomainError("cutoffs must decrease")
    values = []
    for xc in cutoffs:
        values.append(max(abs(reconstructed_boundary_value(l, params, xc, theta_hat)) for l in lams))
    return CutoffDiagnostic(cutoffs=cutoffs, values=tuple(values), required_ratio=required_ratio)


def write_samples_csv(samples: list[TransferSample], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for s in samples:
            w.writerow(s.row())
