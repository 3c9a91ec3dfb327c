"""Command line entry point: ``frosim <subcommand>``."""
from __future__ import annotations

import argparse
import math
import sys
from importlib import resources
from pathlib import Path

from .coeffgen import Family, catalog, closed_form, solve_from_roots
from .errors import ConfigInvalid, DegenerateArgument, FroError, NoConvergence
from .response import sweep, verify_roots

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2


def _fmt(v):
    return format(v, ".17g")


def _spec_args(p):
    p.add_argument("--family", required=True, help=", ".join(f.value for f in Family))
    p.add_argument("--variant", default="modified", choices=["modified", "classical"])
    p.add_argument("--omega", type=float, default=0.0, help="selected angular frequency, rad/s")
    p.add_argument("--h", type=float, required=True, help="step size, s")


def _build_spec(args, from_roots=False):
    if from_roots:
        entry = next(e for e in catalog()
                     if e.family is Family.parse(args.family) and e.variant.value == args.variant)
        return solve_from_roots(entry.family, entry.root_spec(args.omega), args.h)
    return closed_form(args.family, args.variant, args.omega, args.h)


def cmd_coeffs(args, out):
    spec = _build_spec(args, args.from_roots)
    out.write("name,omega,h," + ",".join(f"c{i}" for i in range(len(spec.coeffs))) + "\n")
    out.write(f"{spec.label},{_fmt(spec.omega)},{_fmt(spec.h)}," + ",".join(map(_fmt, spec.coeffs)) + "\n")
    return EXIT_OK


def cmd_sweep(args, out):
    spec = _build_spec(args)
    out.write("frequency_hz,magnitude,phase_rad\n")
    for row in sweep(spec, args.fmin, args.fmax, args.points, "log" if args.log else "linear"):
        out.write(f"{_fmt(row.frequency)},{_fmt(row.magnitude)},{_fmt(row.phase)}\n")
    return EXIT_OK


def cmd_verify(args, out):
    failures = 0
    out.write(f"{'method':<34}{'omega*h':>8}  {'roots (claimed/observed)':<36}result\n")
    for entry in catalog():
        for x in args.grid:
            spec = entry.spec(x / args.h, args.h) if entry.variant.value == "modified" else entry.spec(0.0, args.h)
            checks = verify_roots(spec, entry.root_spec(x / args.h), args.tol)
            ok = all(c.passed for c in checks)
            failures += not ok
            roots = " ".join(f"{c.location.imag:+.3g}j:{c.claimed}/{c.observed}" for c in checks)
            out.write(f"{spec.label:<34}{x:>8.3g}  {roots:<36}{'PASS' if ok else 'FAIL'}\n")
    out.write(f"{failures} failure(s)\n")
    return EXIT_OK if failures == 0 else EXIT_CONVERGENCE


def scenario_path(name) -> Path:
    """A file path, or the name of a bundled scenario."""
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("frosim") / "data" / (p.name if p.suffix else p.name + ".yaml")
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigInvalid(f"no scenario file {name!r}")


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def cmd_simulate(args, out):
    from .harness import load_config, run, write_trace
    cfg = load_config(scenario_path(args.scenario))
    report = run(cfg, args.guess, args.repeats)
    fh = _open_out(args.out)
    try:
        write_trace(report, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    sys.stderr.write(f"steps={len(report.records)} anits={report.anits:.2f} wall_time_s={report.wall_time:.4f}\n")
    return EXIT_OK


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigInvalid(f"bad number list {text!r}") from exc


def cmd_compare(args, out):
    from .harness import compare, load_config, write_compare
    cfg = load_config(scenario_path(args.scenario))
    steps = _floats(args.steps) if args.steps else [cfg.h]
    tols = _floats(args.tols) if args.tols else [cfg.newton.tol_inf]
    rows = compare(cfg, steps, tols, args.repeats)
    fh = _open_out(args.out)
    try:
        write_compare(rows, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    failed = [r for r in rows if r.failure]
    for r in failed:
        sys.stderr.write(f"h={r.h} tol={r.tol}: {r.failure}\n")
    return EXIT_CONVERGENCE if failed else EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="frosim", description="Frequency-response-optimized multistep integrators")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="print integrator coefficients as CSV")
    _spec_args(p)
    p.add_argument("--from-roots", action="store_true", help="solve the root conditions instead")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("sweep", help="relative error over a frequency range")
    _spec_args(p)
    p.add_argument("--fmin", type=float, default=0.0)
    p.add_argument("--fmax", type=float, default=1000.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--log", action="store_true", help="logarithmic spacing")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="root-structure check of every catalog method")
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--grid", type=_floats, default=[0.1, 0.5, 1.0], help="omega*h values, comma separated")
    p.set_defaults(func=cmd_verify)

    helps = {"simulate": "run one scenario and write its trace",
             "compare": "ANITS of predicted vs naive guesses over a step/tolerance matrix"}
    for name, fn in (("simulate", cmd_simulate), ("compare", cmd_compare)):
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--scenario", required=True, help="YAML file or bundled scenario name")
        p.add_argument("--out", default="-", help="CSV output path (default stdout)")
        p.add_argument("--repeats", type=int, default=1 if name == "simulate" else 3,
                       help="timing repetitions; the median wall time is reported")
        if name == "simulate":
            p.add_argument("--guess", choices=["naive", "predicted"], default=None)
        else:
            p.add_argument("--steps", help="step sizes in seconds, comma separated")
            p.add_argument("--tols", help="Newton tolerances, comma separated")
        p.set_defaults(func=fn)
    return ap


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except NoConvergence as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONVERGENCE
    except (ConfigInvalid, DegenerateArgument, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except FroError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
