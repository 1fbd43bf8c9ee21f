"""Resolvent norm peaks along the imaginary axis.

Locates the peak of ``||(i lam - A_N)^{-1}||`` next to every undamped
frequency in the requested range and fits the growth of the peak heights
against ``lam`` and ``lam^2``.

    python scripts/resolvent_peaks.py --alpha 1.5 --grid 2000 --lambda-max 300
"""

import argparse
from pathlib import Path

import numpy as np

from degwave import resolvent as rs
from degwave.discretize import assemble, build_mesh, discrete_generator
from degwave.spectrum import degeneracy_params


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--grid", type=int, nargs="+", default=[2000])
    ap.add_argument("--lambda-min", type=float, default=1.0)
    ap.add_argument("--lambda-max", type=float, default=300.0)
    ap.add_argument("--out", type=Path, default=Path("results/resolvent"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    params = degeneracy_params(args.alpha)

    for n in args.grid:
        gen = discrete_generator(assemble(build_mesh(args.alpha, n), args.alpha))
        peaks = rs.resolvent_peaks(gen, params, (args.lambda_min, args.lambda_max))
        lam = np.array([p.lam for p in peaks])
        norm = np.array([p.norm for p in peaks])
        re = np.array([p.eigenvalue.real for p in peaks])
        np.savetxt(
            args.out / f"peaks_alpha{args.alpha:g}_N{n}.csv",
            np.column_stack([[p.n for p in peaks], lam, norm, re, norm * 2 * np.abs(re)]),
            delimiter=",",
            header="n,lambda,peak_norm,eigenvalue_real_part,peak_times_2abs_re",
            comments="",
        )
        fit = rs.growth_fit(lam, norm)
        print(
            f"N={n}: {len(peaks)} peaks, first six "
            + ", ".join(f"{v:.3e}" for v in norm[:6])
            + f"; slope norm/lam {fit.slope_over_lambda:.2f}, norm/lam^2 {fit.slope_over_lambda_sq:.2f}"
        )


if __name__ == "__main__":
    main()
