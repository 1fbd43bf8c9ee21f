"""Bessel functions of real order and the Gamma function.

Self-contained double-precision routines:

* ``gamma``/``lgamma`` from a fixed-coefficient Lanczos approximation,
* ``bessel_j`` and its derivative and positive zeros (real argument,
  vectorized over ``x``),
* ``mod_bessel_i``/``mod_bessel_k`` for complex argument (scalar), plus
  exponentially scaled variants that stay finite for large ``Re z``.

Complex quantities are plain Python ``complex`` values; every fractional
power and logarithm uses the principal branch, ``arg z`` in ``(-pi, pi]``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BesselRangeError, ConvergenceError, DomainError, SingularInputError

__all__ = [
    "BesselOrder",
    "gamma",
    "lgamma",
    "rgamma",
    "bessel_j",
    "bessel_j_deriv",
    "bessel_j_zero",
    "bessel_j_zeros",
    "mod_bessel_i",
    "mod_bessel_i_scaled",
    "mod_bessel_k",
    "mod_bessel_k_scaled",
    "mod_bessel_ik_scaled",
    "principal_pow",
]

SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 200
J_CROSSOVER = 12.0
IK_SERIES_RADIUS = 2.0
IK_ASYMPTOTIC_RADIUS = 20.0
MIN_ASYMPTOTIC_TERMS = 8
# Offsets for the integer-order limit of the K connection formula.
K_ORDER_STEP = 5e-4

_EPS = np.finfo(float).eps

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class BesselOrder:
    """A nonnegative real Bessel order."""

    nu: float

    def __post_init__(self):
        if not math.isfinite(self.nu) or self.nu < 0:
            raise DomainError(f"Bessel order must be finite and >= 0, got {self.nu!r}")

    @property
    def is_positive_integer(self) -> bool:
        n = round(self.nu)
        return n >= 1 and abs(self.nu - n) <= 1e-12


# -- Gamma ---------------------------------------------------------------


def _lanczos_log_gamma(x):
    # valid for x >= 0.5
    z = x - 1.0
    a = np.full_like(z, _LANCZOS_COEF[0])
    for k in range(1, len(_LANCZOS_COEF)):
        a = a + _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(a)


def _check_positive(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)) or np.any(~np.isfinite(arr)):
        raise DomainError("gamma is only defined here for finite x > 0")
    return arr


def lgamma(x):
    """``log Gamma(x)`` for ``x > 0``."""
    arr = _check_positive(x)
    out = np.empty_like(arr)
    big = arr >= 0.5
    out[big] = _lanczos_log_gamma(arr[big])
    small = ~big
    if np.any(small):
        xs = arr[small]
        out[small] = np.log(np.pi / np.sin(np.pi * xs)) - _lanczos_log_gamma(1.0 - xs)
    return out if out.ndim else float(out)


def gamma(x):
    """Gamma function for ``x > 0``, relative accuracy about 1e-15.

    Raises
    ------
    DomainError
        If any ``x <= 0``.
    """
    arr = _check_positive(x)
    out = np.empty_like(arr)
    big = arr >= 0.5
    with np.errstate(over="ignore"):
        out[big] = np.exp(_lanczos_log_gamma(arr[big]))
    small = ~big
    if np.any(small):
        xs = arr[small]
        out[small] = np.pi / (np.sin(np.pi * xs) * np.exp(_lanczos_log_gamma(1.0 - xs)))
    return out if out.ndim else float(out)


def _sinpi(x: float) -> float:
    """``sin(pi x)`` with exact argument reduction near integers."""
    k = round(x)
    r = math.sin(math.pi * (x - k))
    return -r if k % 2 else r


def _rgamma(x: float) -> float:
    """Reciprocal Gamma for any real ``x`` (zero at nonpositive integers)."""
    if x >= 0.5:
        lg = float(_lanczos_log_gamma(np.asarray(x)))
        return math.exp(-lg) if lg < 709.0 else 0.0
    if x == math.floor(x):
        return 0.0
    return _sinpi(x) * math.exp(float(_lanczos_log_gamma(np.asarray(1.0 - x)))) / math.pi


def rgamma(x: float) -> float:
    """``1/Gamma(x)`` for any real ``x``; zero at the poles ``0, -1, -2, ...``."""
    return _rgamma(float(x))


# -- J_nu, real argument ---------------------------------------------------


def _j_series(nu: float, x: np.ndarray) -> np.ndarray:
    """Power series for ``J_nu``; ``nu > -1``."""
    h = 0.5 * x
    q = -(h * h)
    total = np.zeros_like(x)
    pos = x > 0
    term = np.zeros_like(x)
    with np.errstate(divide="ignore"):
        term[pos] = np.exp(nu * np.log(h[pos]) - lgamma(nu + 1.0))
    if nu == 0:
        term[~pos] = 1.0
    elif nu < 0:
        term[~pos] = np.inf
    total += term
    active = pos.copy()
    for m in range(1, SERIES_MAX_TERMS + 1):
        if not active.any():
            break
        term = np.where(active, term * q / (m * (m + nu)), 0.0)
        total += term
        settled = (np.abs(term) <= SERIES_RTOL * np.abs(total)) & (m * (m + nu) > -q)
        active &= ~settled
    return total


def _hankel_pq(nu: float, x: np.ndarray):
    """Hankel asymptotic sums ``P`` and ``Q`` with optimal truncation."""
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    live = np.ones(x.shape, dtype=bool)
    prev = np.full_like(x, np.inf)
    for k in range(1, 80):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        mag = np.abs(term)
        live &= mag < prev
        if not live.any():
            break
        sign = 1.0 if (k // 2) % 2 == 0 else -1.0
        contrib = np.where(live, sign * term, 0.0)
        if k % 2:
            q += contrib
        else:
            p += contrib
        prev = mag
        live &= mag > 1e-17
    return p, q


def _j_asymptotic(nu: float, x: np.ndarray) -> np.ndarray:
    p, q = _hankel_pq(nu, x)
    chi = x - (0.5 * nu + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def _bessel_j(nu: float, x) -> np.ndarray:
    # internal: any order nu > -1
    arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(arr).astype(float)
    out = np.empty_like(flat)
    far = flat > max(J_CROSSOVER, 2.0 * nu)
    if far.any():
        out[far] = _j_asymptotic(nu, flat[far])
    if (~far).any():
        out[~far] = _j_series(nu, flat[~far])
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def _check_order_arg(nu, x):
    if not math.isfinite(nu) or nu < 0:
        raise DomainError(f"order must be >= 0, got {nu!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr >= 0)):
        raise DomainError("argument must be >= 0")
    return arr


def bessel_j(nu: float, x):
    """Bessel function of the first kind ``J_nu(x)`` for ``nu >= 0, x >= 0``.

    Power series up to ``x = max(12, 2 nu)``, Hankel asymptotics beyond.
    """
    _check_order_arg(nu, x)
    return _bessel_j(float(nu), x)


def bessel_j_deriv(nu: float, x):
    """``J'_nu(x)`` from ``(J_{nu-1} - J_{nu+1}) / 2`` (``-J_1`` when ``nu = 0``)."""
    _check_order_arg(nu, x)
    nu = float(nu)
    if nu == 0:
        return -_bessel_j(1.0, x)
    if nu >= 1.0:
        return 0.5 * (_bessel_j(nu - 1.0, x) - _bessel_j(nu + 1.0, x))
    # 0 < nu < 1: J_{nu-1} = J'_nu + (nu/x) J_nu keeps the order above -1
    arr = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(arr > 0, nu / arr * _bessel_j(nu, arr) - _bessel_j(nu + 1.0, arr), np.inf)
    return out if arr.ndim else float(out)


def _polish_zero(nu: float, lo: float, hi: float, seed: float) -> float:
    f_lo = float(_bessel_j(nu, lo))
    x = seed if lo < seed < hi else 0.5 * (lo + hi)
    for _ in range(100):
        fx = float(_bessel_j(nu, x))
        if fx == 0.0:
            return x
        if (fx > 0) == (f_lo > 0):
            lo, f_lo = x, fx
        else:
            hi = x
        dfx = float(bessel_j_deriv(nu, x))
        step = fx / dfx if dfx != 0 else np.inf
        nxt = x - step
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
            step = x - nxt
        if abs(step) <= 4 * _EPS * abs(x) or hi - lo <= 4 * _EPS * hi:
            return nxt
        x = nxt
    raise ConvergenceError(f"zero of J_{nu} in [{lo}, {hi}] did not converge in 100 iterations")


@lru_cache(maxsize=64)
def _zeros_table(nu: float, count: int) -> tuple:
    step = 0.25
    top = (count + 0.5 * nu + 1.0) * np.pi + 2.0
    while True:
        grid = np.arange(1.0, top + step, step)
        vals = _bessel_j(nu, grid)
        idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
        if len(idx) >= count:
            break
        top *= 1.5
    mu = 4.0 * nu * nu
    zeros = []
    for n, i in enumerate(idx[:count], start=1):
        beta = (n + 0.5 * nu - 0.25) * np.pi
        seed = beta - (mu - 1.0) / (8.0 * beta)
        lo, hi = grid[i], grid[i + 1]
        if vals[i] == 0.0:
            zeros.append(float(lo))
            continue
        zeros.append(_polish_zero(nu, float(lo), float(hi), seed))
    return tuple(zeros)


def bessel_j_zeros(nu: float, count: int) -> np.ndarray:
    """First ``count`` positive zeros of ``J_nu`` in increasing order."""
    if not math.isfinite(nu) or nu < 0:
        raise DomainError(f"order must be >= 0, got {nu!r}")
    if count < 1:
        raise DomainError("count must be >= 1")
    return np.array(_zeros_table(float(nu), int(count)))


def bessel_j_zero(nu: float, n: int) -> float:
    """The ``n``-th positive zero ``j_{nu,n}`` of ``J_nu``.

    Zeros are bracketed by a sign-change scan and polished by Newton steps
    seeded with McMahon's expansion; bisection takes over whenever a Newton
    step leaves the bracket.

    Raises
    ------
    ConvergenceError
        If polishing does not converge within 100 iterations.
    """
    if n < 1:
        raise DomainError("zero index must be >= 1")
    return float(bessel_j_zeros(nu, n)[n - 1])


# -- I_nu, K_nu, complex argument -------------------------------------------


def principal_pow(z, p: float) -> complex:
    """``exp(p * Log z)`` on the principal branch."""
    z = complex(z)
    if z == 0:
        if p > 0:
            return 0j
        raise DomainError("0 raised to a nonpositive power")
    return cmath.exp(p * cmath.log(z))


def _i_series(order: float, z: complex) -> complex:
    """Power series for ``I_order(z)``; ``order`` must not be a negative integer."""
    if z == 0:
        if order == 0:
            return 1.0 + 0j
        if order > 0:
            return 0j
        raise SingularInputError("I of negative order is singular at z = 0")
    h = 0.5 * z
    if order + 1.0 > 0:
        term = cmath.exp(order * cmath.log(h) - float(lgamma(order + 1.0)))
    else:
        term = principal_pow(h, order) * _rgamma(order + 1.0)
    q = h * h
    total = term
    aq = abs(q)
    for m in range(1, SERIES_MAX_TERMS + 1):
        term = term * q / (m * (m + order))
        total += term
        if abs(term) <= SERIES_RTOL * abs(total) and abs(m * (m + order)) > aq:
            return total
    return total


def _k_connection(nu: float, z: complex) -> complex:
    s = _sinpi(nu)
    return 0.5 * math.pi * (_i_series(-nu, z) - _i_series(nu, z)) / s


def _k_small(nu: float, z: complex) -> complex:
    """``K_nu(z)`` for small ``|z|`` from the connection formula.

    Near integer orders the formula is 0/0; there ``K`` is interpolated
    (cubic, in the order) from the four orders ``n +- h, n +- 2h``.
    """
    n = round(nu)
    if abs(nu - n) > 2 * K_ORDER_STEP:
        return _k_connection(nu, z)
    h = K_ORDER_STEP
    nodes = [n - 2 * h, n - h, n + h, n + 2 * h]
    vals = [_k_connection(abs(t), z) if t != 0 else 0j for t in nodes]
    # K is even in the order, so a node at exactly 0 cannot occur (h > 0).
    out = 0j
    for i, (ti, vi) in enumerate(zip(nodes, vals)):
        w = 1.0
        for j, tj in enumerate(nodes):
            if j != i:
                w *= (nu - tj) / (ti - tj)
        out += w * vi
    return out


def _asymptotic_sums(nu: float, z: complex):
    mu = 4.0 * nu * nu
    s_plus = 1.0 + 0j
    s_minus = 1.0 + 0j
    term = 1.0 + 0j
    prev = math.inf
    for k in range(1, 200):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        mag = abs(term)
        if mag == 0.0:
            break
        if mag > prev and k > MIN_ASYMPTOTIC_TERMS:
            break
        s_plus += term
        s_minus += term if k % 2 == 0 else -term
        if mag < 1e-17:
            break
        prev = mag
    return s_plus, s_minus


def _ik_asymptotic(nu: float, z: complex):
    s_plus, s_minus = _asymptotic_sums(nu, z)
    root = cmath.sqrt(2.0 * math.pi * z)
    i_scaled = s_minus / root
    if z.imag != 0:
        sgn = 1.0 if z.imag > 0 else -1.0
        i_scaled += cmath.exp(-2.0 * z + sgn * 1j * math.pi * (nu + 0.5)) * s_plus / root
    k_scaled = cmath.sqrt(math.pi / (2.0 * z)) * s_plus
    return i_scaled, k_scaled


_FPMIN = 1e-30
_CF_MAXIT = 100000


def _ik_steed(nu: float, z: complex):
    """Scaled ``(e^{-z} I_nu, e^z K_nu)`` by continued fractions.

    CF1 gives ``I'_nu / I_nu``; Steed's CF2 gives ``K_mu, K_{mu+1}`` for
    ``|mu| <= 1/2``; the Wronskian ties them together.  Intended for
    ``2 < |z| <= 20`` with ``Re z >= 0``.
    """
    nl = int(nu + 0.5)
    mu = nu - nl
    xi = 1.0 / z
    xi2 = 2.0 * xi
    h = nu * xi
    if abs(h) < _FPMIN:
        h = _FPMIN + 0j
    b = xi2 * nu
    d = 0j
    c = h
    for _ in range(_CF_MAXIT):
        b += xi2
        d = b + d
        d = 1.0 / (d if abs(d) >= _FPMIN else _FPMIN)
        c = b + 1.0 / c
        if abs(c) < _FPMIN:
            c = _FPMIN + 0j
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ConvergenceError("CF1 for I_nu'/I_nu did not converge")
    ril = _FPMIN + 0j
    ripl = h * ril
    ril1 = ril
    fact = nu * xi
    for _ in range(nl, 0, -1):
        ritemp = fact * ril + ripl
        fact -= xi
        ripl = fact * ritemp + ril
        ril = ritemp
        if abs(ril) > 1e250:
            ril, ripl, ril1 = ril * 1e-250, ripl * 1e-250, ril1 * 1e-250
    f = ripl / ril

    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0j, 1.0 + 0j
    a1 = 0.25 - mu * mu
    q = c = a1 + 0j
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _CF_MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:
        raise ConvergenceError("Steed's CF2 for K_mu did not converge")
    h = a1 * h
    kmu = cmath.sqrt(math.pi / (2.0 * z)) / s
    k1 = kmu * (mu + z + 0.5 - h) * xi
    kmup = mu * xi * kmu - k1
    imu = xi / (f * kmu - kmup)
    i_nu = imu * ril1 / ril
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * xi2 * k1 + kmu
    return i_nu, kmu


def _ik_scaled_right(nu: float, z: complex):
    """``(e^{-z} I_nu(z), e^{z} K_nu(z))`` for ``nu >= 0``, ``Re z >= 0``, ``z != 0``."""
    r = abs(z)
    if r > IK_ASYMPTOTIC_RADIUS:
        return _ik_asymptotic(nu, z)
    if r > IK_SERIES_RADIUS:
        return _ik_steed(nu, z)
    ez = cmath.exp(z)
    return _i_series(nu, z) / ez, _k_small(nu, z) * ez


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("argument must be finite")
    return z


def _ik_unscaled(nu: float, z: complex):
    """Unscaled ``(I_nu, K_nu)`` for ``nu >= 0``; ``z != 0``, any argument."""
    if z.real >= 0:
        ii, kk = _ik_scaled_right(nu, z)
        if z.real > 700:
            raise BesselRangeError("I_nu overflows for Re z > 700; use mod_bessel_i_scaled")
        return ii * cmath.exp(z), kk * cmath.exp(-z)
    w = -z
    ii, kk = _ik_scaled_right(nu, w)
    if w.real > 700:
        raise BesselRangeError("|Re z| > 700 overflows; use the scaled variants")
    i_w, k_w = ii * cmath.exp(w), kk * cmath.exp(-w)
    m = 1.0 if z.imag >= 0 else -1.0
    phase = cmath.exp(m * 1j * math.pi * nu)
    return phase * i_w, k_w / phase - m * 1j * math.pi * i_w


def mod_bessel_ik_scaled(nu: float, z) -> tuple[complex, complex]:
    """``(e^{-z} I_nu(z), e^{z} K_nu(z))`` for ``nu >= 0`` and ``Re z >= 0``.

    The pair never overflows, which makes ratios such as ``K/I`` safe:
    ``K/I = (e^z K) / (e^{-z} I) * e^{-2z}``.
    """
    if nu < 0:
        raise DomainError("order must be >= 0")
    z = _as_complex(z)
    if z == 0:
        raise SingularInputError("K_nu is singular at z = 0")
    if z.real < 0:
        raise DomainError("scaled pair is only provided for Re z >= 0")
    return _ik_scaled_right(float(nu), z)


def mod_bessel_i_scaled(nu: float, z) -> complex:
    """``e^{-|Re z|} I_nu(z)`` (finite where ``mod_bessel_i`` overflows)."""
    z = _as_complex(z)
    nu = float(nu)
    sign = 1.0 if z.real >= 0 else -1.0
    w = sign * z
    if z == 0:
        return mod_bessel_i(nu, z)
    phase_im = cmath.exp(1j * w.imag)
    if nu >= 0:
        ii, _ = _ik_scaled_right(nu, w)
        val = ii * phase_im
    else:
        p = -nu
        ii, kk = _ik_scaled_right(p, w)
        val = (ii + (2.0 / math.pi) * _sinpi(p) * kk * cmath.exp(-2.0 * w)) * phase_im
    if sign > 0:
        return val
    m = 1.0 if z.imag >= 0 else -1.0
    return cmath.exp(m * 1j * math.pi * nu) * val


def mod_bessel_i(nu: float, z) -> complex:
    """Modified Bessel function ``I_nu(z)`` of real order, complex argument.

    Regimes: power series for ``|z| <= 2``, continued fractions (CF1 plus
    Steed's CF2 through the Wronskian) for ``2 < |z| <= 20`` and the
    two-exponential asymptotic expansion beyond.  Negative noninteger orders
    use ``I_{-p} = I_p + (2/pi) sin(p pi) K_p``.

    Raises
    ------
    BesselRangeError
        If ``|Re z| > 700``.
    SingularInputError
        For ``z = 0`` with a negative noninteger order.
    """
    z = _as_complex(z)
    nu = float(nu)
    if z == 0:
        return _i_series(abs(nu) if nu == round(nu) else nu, z)
    if nu >= 0:
        return _ik_unscaled(nu, z)[0]
    p = -nu
    ii, kk = _ik_unscaled(p, z)
    if p == round(p):
        return ii
    return ii + (2.0 / math.pi) * _sinpi(p) * kk


def mod_bessel_k(nu: float, z) -> complex:
    """Modified Bessel function of the second kind ``K_nu(z)``.

    For ``|z| <= 2`` the connection formula
    ``K_nu = (pi/2) (I_{-nu} - I_nu) / sin(nu pi)``; near integer orders the
    order-limit is taken by interpolating between nearby noninteger orders.
    Continued fractions for ``2 < |z| <= 20``, asymptotics beyond.

    Raises
    ------
    SingularInputError
        At ``z = 0``.
    """
    z = _as_complex(z)
    if z == 0:
        raise SingularInputError("K_nu is singular at z = 0")
    return _ik_unscaled(abs(float(nu)), z)[1]


def mod_bessel_k_scaled(nu: float, z) -> complex:
    """``e^{z} K_nu(z)`` for ``Re z >= 0``."""
    return mod_bessel_ik_scaled(abs(float(nu)), z)[1]
