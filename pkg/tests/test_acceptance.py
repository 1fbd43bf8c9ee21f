"""Acceptance criteria, one test per criterion.

Each ``criterion_k`` returns ``(passed, detail)``; the tests record the
outcome for the one-line-per-criterion summary printed at the end of the
session.  Running this file directly prints the same summary without pytest.
"""

import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from degwave import resolvent as rs
from degwave import semigroup as sg
from degwave import transfer as tf
from degwave.cli import main as cli_main
from degwave.discretize import assemble, build_mesh, discrete_generator, generalized_eigs
from degwave.spectrum import degeneracy_params, eigen_frequencies
from degwave.specfun import bessel_j, bessel_j_zeros, mod_bessel_i, mod_bessel_k
from degwave.specfun import _bessel_j


def _generator(alpha, n):
    return discrete_generator(assemble(build_mesh(alpha, n), alpha))


# ----------------------------------------------------------------------------- 1


def criterion_1():
    parts, ok = [], True
    for alpha, n in ((1.0, 2000), (1.5, 4000)):
        t0 = time.perf_counter()
        mu = generalized_eigs(assemble(build_mesh(alpha, n), alpha), 5)
        exact = eigen_frequencies(degeneracy_params(alpha), 5) ** 2
        err = float(np.max(np.abs(mu - exact) / exact))
        dt = time.perf_counter() - t0
        ok &= err < 1e-3 and dt < 60
        parts.append(f"alpha={alpha:g}: max rel err {err:.2e} ({dt:.1f}s)")
    return ok, "; ".join(parts)


# ----------------------------------------------------------------------------- 2


def criterion_2():
    t0 = time.perf_counter()
    x = np.linspace(0.1, 50.0, 2000)
    rec = 0.0
    for nu in (0.0, 0.25, 1.0, 3.0):
        jm1 = -bessel_j(1.0, x) if nu == 0 else _bessel_j(nu - 1.0, x)
        rec = max(rec, float(np.max(np.abs(jm1 + bessel_j(nu + 1.0, x) - 2 * nu / x * bessel_j(nu, x)))))
    rng = np.random.default_rng(2024)
    wr = 0.0
    for _ in range(50):
        nu, z = rng.uniform(0.0, 5.0), rng.uniform(0.1, 50.0)
        w = mod_bessel_i(nu, z) * mod_bessel_k(nu + 1, z) + mod_bessel_i(nu + 1, z) * mod_bessel_k(nu, z)
        wr = max(wr, abs(w - 1.0 / z) * z)
    zr, signs = 0.0, True
    for nu in (0.0, 0.25, 1.0, 3.0):
        for z in bessel_j_zeros(nu, 20):
            zr = max(zr, abs(float(bessel_j(nu, z))))
            signs &= float(bessel_j(nu, z * (1 - 1e-8))) * float(bessel_j(nu, z * (1 + 1e-8))) < 0
    dt = time.perf_counter() - t0
    ok = rec < 1e-9 and wr < 1e-9 and zr < 1e-10 and signs and dt < 5
    return ok, f"recurrence {rec:.1e}, Wronskian {wr:.1e}, zero residual {zr:.1e}, sign changes {signs} ({dt:.1f}s)"


# ----------------------------------------------------------------------------- 3


def criterion_3():
    t0 = time.perf_counter()
    alpha = 1.0
    mesh = build_mesh(alpha, 1000)
    gen = discrete_generator(assemble(mesh, alpha))
    s0 = sg.initial_data("bump", degeneracy_params(alpha), mesh.nodes)
    tr = sg.simulate(s0, 10.0, 1e-3, gen)
    tr_half = sg.simulate(s0, 10.0, 5e-4, gen)
    e0 = tr.initial_energy
    step_max = tr.max_energy_increase / e0
    res, res_half = tr.dissipation_identity_residual / e0, tr_half.dissipation_identity_residual / e0
    ratio = res / res_half
    dt = time.perf_counter() - t0
    ok = step_max < 1e-12 and res < 1e-6 and ratio >= 3.5 and dt < 120
    return ok, (
        f"max step increase {step_max:.1e} E0, residual {res:.2e} E0, halved-dt ratio {ratio:.2f} ({dt:.1f}s)"
    )


# ----------------------------------------------------------------------------- 4


def criterion_4():
    t0 = time.perf_counter()
    alpha = 1.5
    params = degeneracy_params(alpha)
    mesh = build_mesh(alpha, 1000)
    gen = discrete_generator(assemble(mesh, alpha))
    s0 = sg.initial_data("bump", params, mesh.nodes)
    fit = sg.fit_decay(sg.simulate(s0, 200.0, 1e-2, gen))
    decay_ok = fit.p > 0 and fit.is_stable(0.1)
    rgen = _generator(alpha, 2000)
    peaks = rs.resolvent_peaks(rgen, params, (1.0, 300.0))
    g = rs.growth_fit([p.lam for p in peaks], [p.norm for p in peaks])
    scan_ok = g.slope_over_lambda_sq <= 0.2 and g.slope_over_lambda >= 0.3
    dt = time.perf_counter() - t0
    ok = decay_ok and scan_ok and dt < 600
    return ok, (
        f"p={fit.p:.3e} (previous window {fit.p_previous:.3e}, change {fit.relative_change:.0%}); "
        f"{len(peaks)} peaks: slope norm/lam^2 {g.slope_over_lambda_sq:.2f}, norm/lam {g.slope_over_lambda:.2f} "
        f"({dt:.0f}s)"
    )


# ----------------------------------------------------------------------------- 5


def criterion_5():
    t0 = time.perf_counter()
    params = degeneracy_params(1.5)
    gen = _generator(1.5, 2000)
    betas = eigen_frequencies(params, 6)
    heights = [rs.locate_peak(gen, float(b), n=n).norm for n, b in enumerate(betas, start=1)]
    dt = time.perf_counter() - t0
    ok = all(b > a for a, b in zip(heights[:-1], heights[1:])) and dt < 300
    return ok, "peaks n=1..6: " + ", ".join(f"{h:.2e}" for h in heights) + f" ({dt:.1f}s)"


# ----------------------------------------------------------------------------- 6


def criterion_6():
    t0 = time.perf_counter()
    kappas = np.linspace(0.0, 100.0, 201)
    samples = tf.scan_vertical(1.0, kappas, degeneracy_params(1.5))
    diag = tf.boundedness_diagnostic(samples)
    lams = [complex(1.0, k) for k in kappas]
    fam = tf.cutoff_family(lams, degeneracy_params(1.2), cutoffs=(1e-4, 1e-6, 1e-8))
    dt = time.perf_counter() - t0
    ok = diag.bounded and fam.unbounded and dt < 120
    ratios = ", ".join(f"{r:.2f}" for r in fam.ratios)
    return ok, (
        f"alpha=1.5 |H| slope {diag.slope:.2f} (sup {diag.sup_abs_H:.2e}); "
        f"alpha=1.2 cutoff ratios {ratios} ({dt:.1f}s)"
    )


# ----------------------------------------------------------------------------- 7


def criterion_7():
    t0 = time.perf_counter()
    labels = ("pi_over_6", "pi_over_4", "pi_over_3", "pi_over_2")
    names = [f"transfer_theta_{lab}.{ext}" for lab in labels for ext in ("csv", "svg")]
    with tempfile.TemporaryDirectory() as tmp:
        runs = []
        for k in range(2):
            out = Path(tmp) / f"run{k}"
            cli_main(["transfer", "--alpha", "1.5", "--out", str(out)])
            runs.append({n: (out / n).read_bytes() if (out / n).exists() else None for n in names})
    emitted = all(v is not None for v in runs[0].values())
    identical = runs[0] == runs[1]
    xs = 10.0 ** -np.arange(6, 15)
    slopes = {}
    for alpha in (1.5, 1.8):
        p = degeneracy_params(alpha)
        slopes[alpha] = [tf.probe_slope(complex(math.cos(t), math.sin(t)), p, xs) for t in np.pi / np.array([6, 4, 3, 2])]
    law = all(abs(s - (1 - a)) <= 0.05 for a, ss in slopes.items() for s in ss)
    dt = time.perf_counter() - t0
    ok = emitted and identical and law and dt < 60
    desc = "; ".join(f"alpha={a:g} slopes " + ", ".join(f"{s:.3f}" for s in ss) for a, ss in slopes.items())
    return ok, f"8 files emitted {emitted}, byte-identical {identical}; {desc} ({dt:.1f}s)"


# ----------------------------------------------------------------------------- 8


def criterion_8():
    parts, ok = [], True
    for alpha in (1.0, 1.5):
        t0 = time.perf_counter()
        ev = rs.refined_spectrum(_generator(alpha, 500))
        max_re = float(np.max(ev.real))
        dt = time.perf_counter() - t0
        ok &= bool(np.all(ev.real < 0)) and max_re < -1e-8 and dt < 120
        parts.append(f"alpha={alpha:g}: max Re {max_re:.2e} over {len(ev)} eigenvalues ({dt:.1f}s)")
    return ok, "; ".join(parts)


CRITERIA = {
    1: ("spectrum oracle equivalence", criterion_1),
    2: ("Bessel suite", criterion_2),
    3: ("dissipativity and energy identity", criterion_3),
    4: ("polynomial vs exponential decay signature", criterion_4),
    5: ("resolvent peak growth", criterion_5),
    6: ("transfer-function dichotomy", criterion_6),
    7: ("figure-data reproduction", criterion_7),
    8: ("no imaginary eigenvalues", criterion_8),
}


@pytest.mark.acceptance
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance_report):
    title, func = CRITERIA[number]
    passed, detail = func()
    acceptance_report(number, title, passed, detail)
    assert passed, f"criterion {number} ({title}): {detail}"


def _format(number, title, passed, detail):
    return f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"


if __name__ == "__main__":
    failed = 0
    for number, (title, func) in sorted(CRITERIA.items()):
        passed, detail = func()
        failed += not passed
        print(_format(number, title, passed, detail), flush=True)
    sys.exit(1 if failed else 0)
