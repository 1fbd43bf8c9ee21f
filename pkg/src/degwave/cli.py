"""Command-line front end: ``degwave {spectrum,simulate,resolvent,transfer}``.

Exit status is 0 when every quality flag is clean, 2 when the run completed
with flags, and 1 on errors.  Options can also come from a ``key=value`` file
given with ``--config``; command-line flags take precedence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import resolvent as rs
from . import semigroup as sg
from . import transfer as tf
from .discretize import assemble, build_mesh, discrete_generator, generalized_eigs
from .errors import DomainError
from .plotting import write_loglog_svg
from .spectrum import degeneracy_params, eigenpair

__all__ = ["RunConfig", "build_parser", "load_config_file", "parse_thetas", "main"]

EXIT_OK, EXIT_ERROR, EXIT_FLAGGED = 0, 1, 2


@dataclass
class RunConfig:
    """All tunable inputs of a run; unset fields keep these defaults."""

    alpha: float = 1.5
    grid: int = 1000
    out: str = "out"
    dt: float = 1e-3
    horizon: float = 10.0
    initial: str = "bump"
    record_every: int = 1
    modes: int = 5
    lambda_min: float = 1.0
    lambda_max: float = 50.0
    resolution: float = 0.5
    gamma: float = 1.0
    kappa_max: float = 100.0
    kappa_points: int = 201
    theta: str = "pi/6,pi/4,pi/3,pi/2"
    radius_min: float = 0.1
    radius_max: float = 100.0
    radius_points: int = 61
    cutoff: float = tf.DEFAULT_CUTOFF
    bessel_arg: str = "treee"
    json: bool = False
    seed: int = 2024

    def validate(self) -> None:
        if not (1.0 <= self.alpha < 2.0):
            raise DomainError(f"alpha must lie in the interval [1, 2), got {self.alpha!r}")
        if self.grid < 16:
            raise DomainError(f"grid N must be >= 16, got {self.grid!r}")
        if not (self.dt > 0 and self.horizon > 0):
            raise DomainError("dt and horizon must be positive")
        if self.bessel_arg not in tf.BESSEL_ARGS:
            raise DomainError(f"bessel-arg must be one of {tf.BESSEL_ARGS}")
        if not (0 < self.cutoff <= 0.1):
            raise DomainError("cutoff must lie in (0, 0.1]")


_BOOL_TRUE = {"1", "true", "yes", "on"}


def _coerce(name: str, value):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if kind in ("bool", bool):
        return value if isinstance(value, bool) else str(value).strip().lower() in _BOOL_TRUE
    if kind in ("int", int):
        return int(value)
    if kind in ("float", float):
        return float(value)
    return str(value)


def load_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment; dashes equal underscores."""
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def parse_thetas(text: str) -> list[float]:
    """Comma list of angles: floats or ``pi``, ``pi/k``, ``m*pi/k``."""
    out = []
    for tok in text.split(","):
        tok = tok.strip().replace(" ", "")
        if not tok:
            continue
        if "pi" in tok:
            num, _, den = tok.partition("/")
            coef = num.replace("pi", "").rstrip("*") or "1"
            val = float(coef) * math.pi / (float(den) if den else 1.0)
        else:
            val = float(tok)
        out.append(val)
    if not out:
        raise DomainError("empty theta list")
    return out


def theta_label(theta: float) -> str:
    """``pi_over_6`` style label for ``pi/k`` angles, else a decimal label."""
    k = math.pi / theta if theta else 0.0
    if theta > 0 and abs(k - round(k)) < 1e-9:
        return f"pi_over_{round(k)}"
    return f"{theta:.6f}".replace(".", "p").replace("-", "m")


# --------------------------------------------------------------------------- output helpers


def _write_csv(path: Path, header, rows, mirror_json: bool) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)
    if mirror_json:
        _mirror_json(path)


def _mirror_json(path: Path) -> None:
    with open(path, newline="") as fh:
        records = list(csv.DictReader(fh))
    for rec in records:
        for k, v in rec.items():
            try:
                x = float(v)
            except ValueError:
                continue
            rec[k] = x if math.isfinite(x) else None
    _write_json(path.with_suffix(".json"), records)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(type(obj))


def _finite_or_none(v):
    return v if v is None or math.isfinite(v) else None


def _write_json(path: Path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _outdir(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    if not os.access(p, os.W_OK):
        raise DomainError(f"output directory {p} is not writable")
    return p


def _generator(cfg: RunConfig):
    mats = assemble(build_mesh(cfg.alpha, cfg.grid), cfg.alpha)
    return mats, discrete_generator(mats)


# --------------------------------------------------------------------------- commands


def cmd_spectrum(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    params = degeneracy_params(cfg.alpha)
    mats = assemble(build_mesh(cfg.alpha, cfg.grid), cfg.alpha)
    discrete = generalized_eigs(mats, cfg.modes)
    rows, flagged = [], False
    for n in range(1, cfg.modes + 1):
        ep = eigenpair(params, n)
        rel = abs(discrete[n - 1] - ep.mu) / ep.mu
        flagged |= rel >= 1e-3
        rows.append([n, repr(ep.zero), repr(ep.beta), repr(ep.mu), repr(float(discrete[n - 1])), repr(float(rel))])
    _write_csv(out / "spectrum.csv", ["n", "j_nu_n", "beta_n", "mu_n", "discrete_mu_n", "rel_err"], rows, cfg.json)
    return EXIT_FLAGGED if flagged else EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    params = degeneracy_params(cfg.alpha)
    mats, gen = _generator(cfg)
    state = sg.initial_data(cfg.initial, params, mats.mesh.nodes)
    trace = sg.simulate(state, cfg.horizon, cfg.dt, gen, record_every=cfg.record_every)
    trace.to_csv(out / "energy.csv")
    if cfg.json:
        _mirror_json(out / "energy.csv")
    e0 = trace.initial_energy
    flags = []
    payload = {
        "alpha": cfg.alpha,
        "grid": cfg.grid,
        "dt": cfg.dt,
        "horizon": cfg.horizon,
        "initial": cfg.initial,
        "initial_energy": e0,
        "final_energy": float(trace.energies[-1]),
        "dissipation_identity_residual": trace.dissipation_identity_residual,
        "max_energy_increase": trace.max_energy_increase,
        "p": None,
        "p_previous_window": None,
        "window": None,
        "residual": None,
    }
    if e0 == 0.0:
        flags.append("no-decay-data")
    else:
        if not trace.is_monotone():
            flags.append("non-monotone-energy")
        if trace.dissipation_identity_residual >= 1e-6 * e0:
            flags.append("dissipation-identity-residual")
        try:
            fit = sg.fit_decay(trace)
            payload.update(
                p=fit.p,
                p_previous_window=_finite_or_none(fit.p_previous),
                window=list(fit.window),
                residual=fit.residual,
                stable=fit.is_stable(),
            )
            if not fit.p > 0:
                flags.append("no-decay")
        except DomainError:
            flags.append("fit-window-too-short")
    payload["flags"] = flags
    _write_json(out / "decay_fit.json", payload)
    return EXIT_FLAGGED if flags else EXIT_OK


def cmd_resolvent(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    params = degeneracy_params(cfg.alpha)
    _, gen = _generator(cfg)
    lo, hi = cfg.lambda_min, cfg.lambda_max
    records = rs.scan((lo, hi), cfg.resolution, gen, params=None, seed=cfg.seed)
    peaks = rs.resolvent_peaks(gen, params, (lo, hi), seed=cfg.seed)
    records = sorted(records + [rs.ScanRecord(p.lam, p.norm, p.flag) for p in peaks], key=lambda r: r.lam)
    rs.write_scan_csv(records, out / "resolvent_scan.csv")
    if cfg.json:
        _mirror_json(out / "resolvent_scan.csv")
    payload = {"alpha": cfg.alpha, "grid": cfg.grid, "lambda_min": lo, "lambda_max": hi}
    checks = {}
    max_re = max((p.eigenvalue.real for p in peaks), default=float("nan"))
    checks["no_imaginary_eigenvalue"] = bool(peaks) and max_re < 0
    if len(peaks) >= 2:
        fit = rs.growth_fit([p.lam for p in peaks], [p.norm for p in peaks])
        payload.update(fit.as_dict())
        checks["norm_over_lambda_sq_slope_le_0.2"] = fit.slope_over_lambda_sq <= 0.2
        checks["norm_over_lambda_slope_ge_0.3"] = fit.slope_over_lambda >= 0.3
    payload["max_re_eigenvalue"] = _finite_or_none(max_re)
    payload["peaks"] = [
        {
            "n": p.n,
            "lambda": p.lam,
            "norm": p.norm,
            "predicted_beta": p.predicted,
            "re_eigenvalue": p.eigenvalue.real,
            "im_eigenvalue": p.eigenvalue.imag,
            "flag": p.flag,
        }
        for p in peaks
    ]
    payload["checks"] = checks
    flags = sorted({f for r in records for f in r.flag.split(";") if f})
    payload["flags"] = flags
    _write_json(out / "growth_fit.json", payload)
    return EXIT_FLAGGED if flags or not all(checks.values()) else EXIT_OK


def cmd_transfer(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    params = degeneracy_params(cfg.alpha)
    thetas = parse_thetas(cfg.theta)
    radii = np.logspace(math.log10(cfg.radius_min), math.log10(cfg.radius_max), cfg.radius_points)
    quality = set()
    summary = {"alpha": cfg.alpha, "nu": params.nu, "cutoff": cfg.cutoff, "bessel_arg": cfg.bessel_arg, "rays": []}
    for theta in thetas:
        samples = tf.scan_ray(theta, radii, params, cfg.cutoff, cfg.bessel_arg)
        name = f"transfer_theta_{theta_label(theta)}"
        tf.write_samples_csv(samples, out / f"{name}.csv")
        if cfg.json:
            _mirror_json(out / f"{name}.csv")
        write_loglog_svg(
            out / f"{name}.svg",
            [(f"x* = {cfg.cutoff:g}", [abs(s.lam) for s in samples], [abs(s.c_nu_estimate) for s in samples])],
            title=f"|c_nu probe| along arg(lambda) = {theta:.6f}, alpha = {cfg.alpha:g}",
            xlabel="|lambda|",
            ylabel="|c_nu probe|",
        )
        quality |= {f for s in samples for f in s.flag.split(";") if f and f != tf.FLAG_HALF_PLANE}
        summary["rays"].append({"theta": theta, "file": f"{name}.csv", "flags": sorted({s.flag for s in samples if s.flag})})
    kappas = np.linspace(0.0, cfg.kappa_max, cfg.kappa_points)
    vertical = tf.scan_vertical(cfg.gamma, kappas, params, cfg.cutoff, cfg.bessel_arg)
    tf.write_samples_csv(vertical, out / "vertical_scan.csv")
    if cfg.json:
        _mirror_json(out / "vertical_scan.csv")
    quality |= {f for s in vertical for f in s.flag.split(";") if f}
    diag = tf.boundedness_diagnostic(vertical)
    summary["vertical"] = {"gamma": cfg.gamma, "slope": diag.slope, "sup_abs_H": diag.sup_abs_H, "bounded": diag.bounded}
    fam = tf.cutoff_family([s.lam for s in vertical], params)
    summary["cutoff_family"] = {
        "cutoffs": list(fam.cutoffs),
        "values": list(fam.values),
        "ratios": list(fam.ratios),
        "grows": fam.grows,
        "unbounded": fam.unbounded,
    }
    summary["flags"] = sorted(quality)
    _write_json(out / "transfer_summary.json", summary)
    return EXIT_FLAGGED if quality else EXIT_OK


COMMANDS = {"spectrum": cmd_spectrum, "simulate": cmd_simulate, "resolvent": cmd_resolvent, "transfer": cmd_transfer}


# --------------------------------------------------------------------------- argument parsing


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1, keeping 2 for flagged runs."""

    def error(self, message):
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="degwave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def shared(p):
        p.add_argument("--alpha", type=float, default=S, help="degeneracy exponent in [1, 2)")
        p.add_argument("--grid", type=int, default=S, metavar="N", help="number of mesh cells (>= 16)")
        p.add_argument("--out", default=S, metavar="DIR", help="output directory")
        p.add_argument("--config", default=None, metavar="FILE", help="key=value configuration file")
        p.add_argument("--json", action="store_true", default=S, help="mirror every CSV as JSON records")

    p = sub.add_parser("spectrum", help="closed-form vs discrete eigenvalues")
    shared(p)
    p.add_argument("--modes", type=int, default=S, help="number of eigenvalues to compare")

    p = sub.add_parser("simulate", help="damped time integration and decay fit")
    shared(p)
    p.add_argument("--dt", type=float, default=S, help="time step; must divide the horizon")
    p.add_argument("--horizon", type=float, default=S, metavar="T", help="final time")
    p.add_argument("--initial", default=S, help="eigenmode(n), bump, polynomial or zero")
    p.add_argument("--record-every", type=int, default=S, help="record energy every k steps")

    p = sub.add_parser("resolvent", help="resolvent norm scan on the imaginary axis")
    shared(p)
    p.add_argument("--lambda-min", type=float, default=S, help="lower end of the frequency range")
    p.add_argument("--lambda-max", type=float, default=S, help="upper end of the frequency range")
    p.add_argument("--resolution", type=float, default=S, help="spacing of the uniform frequency grid")
    p.add_argument("--seed", type=int, default=S, help="seed for the power-iteration start vector")

    p = sub.add_parser("transfer", help="transfer function and c_nu probe scans")
    shared(p)
    p.add_argument("--gamma", type=float, default=S, help="real part of the vertical scan line")
    p.add_argument("--kappa-max", type=float, default=S, help="largest imaginary part on the vertical line")
    p.add_argument("--theta", default=S, metavar="LIST", help="comma list, e.g. pi/6,pi/4")
    p.add_argument("--cutoff", type=float, default=S, metavar="X*", help="probe cutoff near the origin")
    p.add_argument("--bessel-arg", choices=tf.BESSEL_ARGS, default=S, help="Bessel argument convention in H")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        values.update(load_config_file(args.config))
    values.update({k: v for k, v in vars(args).items() if k not in ("command", "config")})
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (DomainError, ArithmeticError, OSError, ValueError) as exc:
        print(f"degwave {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
