"""Resolvent of the damped generator on the imaginary axis.

For ``F = (f, g)`` the system ``(i lam - A_h) U = F`` with ``U = (u, v)``
reduces to the complex symmetric tridiagonal problem

    (K - lam^2 M + i lam C) u = M g + i lam M f + C f,    v = i lam u - f,

with ``C = c e_0 e_0^T``.  Norms are taken in the energy inner product with
Gram matrix ``G = diag(K, M)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .discretize import DampedGenerator
from .errors import ConvergenceError, DomainError
from .spectrum import DegeneracyParams, eigen_frequencies

__all__ = [
    "CONDITION_LIMIT",
    "ScanRecord",
    "PeakRecord",
    "GrowthFit",
    "ShiftedSystem",
    "solve_resolvent",
    "resolvent_residual",
    "resolvent_norm",
    "damped_eigenvalue",
    "refined_spectrum",
    "locate_peak",
    "resolvent_peaks",
    "scan",
    "growth_fit",
    "normalized_running_max",
    "write_scan_csv",
]

CONDITION_LIMIT = 1e14
FLAG_ILL = "ill-conditioned"
FLAG_STAGNATED = "stagnated"


@dataclass(frozen=True)
class ScanRecord:
    """One resolvent-norm sample at ``i * lam``; ``flag`` is empty when clean."""

    lam: float
    norm: float
    flag: str = ""

    @property
    def norm_over_lambda(self) -> float:
        return self.norm / abs(self.lam) if self.lam != 0 else math.inf

    @property
    def norm_over_lambda_sq(self) -> float:
        return self.norm / self.lam**2 if self.lam != 0 else math.inf


def _join_flags(*flags) -> str:
    return ";".join(sorted({f for f in flags if f}))


class ShiftedSystem:
    """LU factorization of ``Q(s) = s^2 M + s C + K`` for complex ``s``.

    On the imaginary axis ``s = i lam`` this is the reduced resolvent matrix.
    """

    def __init__(self, generator: DampedGenerator, s: complex):
        self.generator = generator
        self.s = complex(s)
        K, M = generator.K, generator.M
        s2 = self.s * self.s
        d = s2 * M.diag + K.diag + 0j
        d[0] += self.s * generator.damping
        off = s2 * M.off + K.off + 0j
        self._anorm = float(
            np.max(np.abs(d) + np.concatenate([np.abs(off), [0.0]]) + np.concatenate([[0.0], np.abs(off)]))
        )
        dl, dd, du, du2, ipiv, info = lapack.zgttrf(off.copy(), d, off.copy())
        if info < 0:
            raise DomainError(f"zgttrf rejected argument {-info}")
        self._lu = (dl, dd, du, du2, ipiv)
        self.singular = info > 0
        if self.singular:
            self.rcond = 0.0
        else:
            self.rcond, _ = lapack.zgtcon(dl, dd, du, du2, ipiv, self._anorm)

    @property
    def condition(self) -> float:
        return math.inf if self.rcond == 0 else 1.0 / self.rcond

    @property
    def flag(self) -> str:
        return FLAG_ILL if self.condition > CONDITION_LIMIT else ""

    def solve(self, b) -> np.ndarray:
        if self.singular:
            raise ZeroDivisionError("shifted matrix is exactly singular")
        x, info = lapack.zgttrs(*self._lu, np.asarray(b, dtype=complex))
        return x

    def solve_conj(self, b) -> np.ndarray:
        """Solve with the entrywise conjugate matrix ``conj(Q(s))``."""
        return np.conj(self.solve(np.conj(np.asarray(b, dtype=complex))))


class _Resolvent:
    """``R = (i lam - A_h)^{-1}`` and its Euclidean adjoint for one ``lam``."""

    def __init__(self, generator: DampedGenerator, lam: float):
        if not np.isfinite(lam) or np.iscomplexobj(lam):
            raise DomainError(f"lam must be a finite real number, got {lam!r}")
        self.g = generator
        self.lam = float(lam)
        self.system = ShiftedSystem(generator, 1j * self.lam)

    def apply(self, F):
        g = self.g
        f, gg = g.split(np.asarray(F, dtype=complex))
        rhs = g.M.matvec(gg) + 1j * self.lam * g.M.matvec(f)
        rhs[0] += g.damping * f[0]
        u = self.system.solve(rhs)
        return np.concatenate([u, 1j * self.lam * u - f])

    def apply_adjoint(self, y):
        """``R^H y`` (Euclidean adjoint)."""
        g = self.g
        y1, y2 = g.split(np.asarray(y, dtype=complex))
        w2 = self.system.solve_conj(y1 - 1j * self.lam * y2)
        w1 = -1j * self.lam * g.M.matvec(w2) - y2
        w1[0] += g.damping * w2[0]
        return np.concatenate([w1, g.M.matvec(w2)])


def solve_resolvent(lam: float, F, generator: DampedGenerator):
    """Solve ``(i lam - A_h) U = F``.

    Returns
    -------
    U : ndarray (complex, length 2n)
    flag : str
        ``"ill-conditioned"`` when the LAPACK condition estimate of the reduced
        matrix exceeds 1e14, else ``""``.
    """
    R = _Resolvent(generator, lam)
    return R.apply(F), R.system.flag


def resolvent_residual(lam: float, F, U, generator: DampedGenerator) -> float:
    """Energy-norm residual ``||(i lam - A_h) U - F||_G / ||F||_G``."""
    F = np.asarray(F, dtype=complex)
    r = 1j * lam * U - (generator.apply(U.real) + 1j * generator.apply(U.imag)) - F
    nf = generator.norm(F)
    return generator.norm(r) / nf if nf > 0 else generator.norm(r)


def _gram_solve(generator, z):
    u, v = generator.split(z)
    solve = lambda s, b: s(b.real) + 1j * s(b.imag)  # noqa: E731
    return np.concatenate([solve(generator.solve_k, u), solve(generator.solve_m, v)])


def resolvent_norm(
    lam: float,
    generator: DampedGenerator,
    min_iter: int = 20,
    max_iter: int = 500,
    rtol: float = 1e-6,
    seed: int = 2024,
    return_record: bool = False,
):
    """Energy-norm ``||(i lam - A_h)^{-1}||`` by power iteration on ``R^# R``.

    ``R^# = G^{-1} R^H G`` is the adjoint in the energy inner product.  The
    iteration stops once at least ``min_iter`` sweeps are done and the
    estimate changes by less than ``rtol`` relative; otherwise the best
    estimate is returned with the flag ``"stagnated"``.
    """
    R = _Resolvent(generator, lam)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(2 * generator.size) + 0j
    z /= generator.norm(z)
    est = prev = 0.0
    flag = FLAG_STAGNATED
    for it in range(1, max_iter + 1):
        y = R.apply(z)
        est = generator.norm(y)
        if it >= min_iter and abs(est - prev) <= rtol * est:
            flag = ""
            break
        prev = est
        z = _gram_solve(generator, R.apply_adjoint(generator.gram_apply(y)))
        nz = generator.norm(z)
        if nz == 0 or not np.isfinite(nz):
            break
        z /= nz
    record = ScanRecord(lam=float(lam), norm=float(est), flag=_join_flags(flag, R.system.flag))
    return record if return_record else record.norm


# --------------------------------------------------------------------------- peaks


def damped_eigenvalue(generator: DampedGenerator, seed: complex, tol: float = 2e-15, max_iter: int = 60) -> complex:
    """Eigenvalue of the damped generator nearest ``seed``.

    Rayleigh functional iteration on the quadratic pencil
    ``Q(s) = s^2 M + s C + K``: inverse iteration ``x <- Q(s)^{-1} Q'(s) x``
    followed by the root of ``x^T Q(s) x = 0`` closest to the current ``s``.
    Being structured (tridiagonal, complex symmetric) it resolves real parts
    far below ``eps * ||A_h||``, which dense solvers cannot.

    Raises
    ------
    ConvergenceError
        If the update does not settle within ``max_iter`` sweeps.  The
        imaginary part must settle to ``tol`` relative and the real part to
        1e-6 of itself (or ``tol * |s|``).
    """
    g = generator
    s = complex(seed)
    rng = np.random.default_rng(7)
    x = rng.standard_normal(g.size) + 0j
    for _ in range(max_iter):
        sys = ShiftedSystem(g, s)
        if sys.singular:
            return s
        dq = 2.0 * s * g.M.matvec(x)
        dq[0] += g.damping * x[0]
        x = sys.solve(dq)
        k = int(np.argmax(np.abs(x)))
        x *= np.conj(x[k]) / (abs(x[k]) * np.linalg.norm(x))
        a = g.mass_form(x)
        b = g.damping * x[0] * x[0]
        c = g.stiffness_form(x)
        disc = np.sqrt(b * b - 4.0 * a * c)
        roots = ((-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a))
        s_new = min(roots, key=lambda r: abs(r - s))
        d = s_new - s
        s = complex(s_new)
        if abs(d.imag) <= tol * abs(s) and abs(d.real) <= max(1e-6 * abs(s.real), tol * abs(s)):
            return s
    raise ConvergenceError(f"eigenvalue iteration from {seed!r} did not converge")


def refined_spectrum(generator: DampedGenerator) -> np.ndarray:
    """All eigenvalues of the damped generator with structured refinement.

    A dense generalized eigensolve seeds the iteration of
    :func:`damped_eigenvalue` for every eigenvalue with nonzero imaginary
    part; real (overdamped) eigenvalues are kept from the dense solve.  A
    refined value is accepted only if it stays the nearest neighbour of its
    seed, so no eigenvalue is counted twice.
    """
    dense = generator.eigenvalues()
    dense = dense[np.isfinite(dense)]
    out = dense.astype(complex).copy()
    upper = np.nonzero(dense.imag > 0)[0]
    for i in upper:
        seed = dense[i]
        try:
            s = damped_eigenvalue(generator, seed)
        except ConvergenceError:
            continue
        if np.argmin(np.abs(dense - s)) == i:
            out[i] = s
            j = np.argmin(np.abs(dense - np.conj(seed)))
            out[j] = np.conj(s)
    return out


@dataclass(frozen=True)
class PeakRecord:
    """Refined resolvent peak next to the discrete eigenvalue ``eigenvalue``."""

    n: int
    lam: float
    norm: float
    eigenvalue: complex
    predicted: float
    flag: str = ""


def _golden_max(func, lo, hi, iters=60):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(iters):
        if b - a <= 4.0 * np.spacing(max(abs(a), abs(b))):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = func(d)
    return (c, fc) if fc >= fd else (d, fd)


def locate_peak(generator: DampedGenerator, predicted: float, n: int = 0, **norm_kw) -> PeakRecord:
    """Refine the resolvent peak near the undamped frequency ``predicted``.

    The nearby discrete eigenvalue ``s`` fixes the bracket
    ``Im s +- 8 max(|Re s|, ulp)``; golden-section search then maximizes the
    norm inside it.
    """
    s = damped_eigenvalue(generator, 1j * predicted)
    centre = abs(s.imag)
    width = 8.0 * max(abs(s.real), 64.0 * np.spacing(centre))
    cache = {}

    def f(lam):
        rec = resolvent_norm(lam, generator, return_record=True, **norm_kw)
        cache[lam] = rec
        return rec.norm

    lam, val = _golden_max(f, centre - width, centre + width)
    centre_val = f(centre)
    if centre_val >= val:
        lam, val = centre, centre_val
    return PeakRecord(n=n, lam=float(lam), norm=float(val), eigenvalue=s, predicted=float(predicted), flag=cache[lam].flag)


def resolvent_peaks(
    generator: DampedGenerator, params: DegeneracyParams, lam_range: tuple[float, float], max_count: int | None = None, **norm_kw
) -> list[PeakRecord]:
    """Peaks near every undamped frequency ``beta_n`` inside ``lam_range``."""
    lo, hi = lam_range
    count = 8
    while eigen_frequencies(params, count)[-1] < hi:
        count *= 2
    betas = eigen_frequencies(params, count)
    peaks = []
    for n, beta in enumerate(betas, start=1):
        if beta < lo or beta > hi:
            continue
        peaks.append(locate_peak(generator, float(beta), n=n, **norm_kw))
        if max_count is not None and len(peaks) >= max_count:
            break
    return peaks


def scan(
    lam_range: tuple[float, float],
    resolution: float,
    generator: DampedGenerator,
    params: DegeneracyParams | None = None,
    refine: bool = True,
    **norm_kw,
) -> list[ScanRecord]:
    """Uniform scan with spacing ``resolution`` plus refined peaks, sorted by ``lam``."""
    lo, hi = map(float, lam_range)
    if not resolution > 0:
        raise DomainError("resolution must be positive")
    if hi < lo:
        raise DomainError("empty lambda range")
    count = int(math.floor((hi - lo) / resolution + 1e-9)) + 1
    grid = lo + resolution * np.arange(count)
    records = [resolvent_norm(float(l), generator, return_record=True, **norm_kw) for l in grid]
    if refine and params is not None:
        for p in resolvent_peaks(generator, params, (lo, hi), **norm_kw):
            records.append(ScanRecord(lam=p.lam, norm=p.norm, flag=p.flag))
    records.sort(key=lambda r: r.lam)
    return records


# --------------------------------------------------------------------------- fits


@dataclass(frozen=True)
class GrowthFit:
    """Log-log slopes of ``norm/lam`` and ``norm/lam^2`` against ``lam``."""

    slope_over_lambda: float
    slope_over_lambda_sq: float
    points: int
    lam_min: float
    lam_max: float

    def as_dict(self) -> dict:
        return {
            "slope_norm_over_lambda": self.slope_over_lambda,
            "slope_norm_over_lambda_sq": self.slope_over_lambda_sq,
            "points": self.points,
            "lambda_min": self.lam_min,
            "lambda_max": self.lam_max,
        }


def growth_fit(lams, norms) -> GrowthFit:
    """Least-squares slopes over samples with ``lam > 0``; usually the peak sequence."""
    lams = np.asarray(lams, dtype=float)
    norms = np.asarray(norms, dtype=float)
    sel = (lams > 0) & (norms > 0) & np.isfinite(norms)
    if sel.sum() < 2:
        raise DomainError("need at least two positive samples for a growth fit")
    ll, ln = np.log(lams[sel]), np.log(norms[sel])
    s1 = float(np.polyfit(ll, ln - ll, 1)[0])
    s2 = float(np.polyfit(ll, ln - 2.0 * ll, 1)[0])
    return GrowthFit(s1, s2, int(sel.sum()), float(lams[sel].min()), float(lams[sel].max()))


def normalized_running_max(records: list[ScanRecord]) -> np.ndarray:
    """``max_{lam' <= lam} norm(lam')/lam'^2`` along the (sorted) scan."""
    vals = np.array([r.norm_over_lambda_sq for r in records if r.lam > 0])
    return np.maximum.accumulate(vals)


def write_scan_csv(records: list[ScanRecord], path) -> None:
    cols = ["lambda", "norm", "norm_over_lambda", "norm_over_lambda_sq", "flag"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            w.writerow([repr(r.lam), repr(r.norm), repr(r.norm_over_lambda), repr(r.norm_over_lambda_sq), r.flag])
