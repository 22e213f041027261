"""Command line entry point: ``kgzlab <subcommand> ...``.

Exit status is 0 when every check a subcommand performs passes, 1 when
some check fails and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import math
import os
import sys


from . import diagnostics as dg
from . import grid as g
from . import harness as hs
from . import io
from . import soliton as sol
from .errors import BlowUp, KGZError, NoConvergence
from .evolve import DiagnosticsRecord, EvolveConfig, evolve


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        io.write_atomic(out, text)


def _grid_args(p, L=60.0, N=1024):
    p.add_argument("--L", type=float, default=L, help="box length")
    p.add_argument("--N", type=int, default=N, help="number of grid points")
    p.add_argument("--c0", type=float, default=1.0, help="wave speed")


def _run_args(p, T=20.0):
    p.add_argument("--omega", type=hs.parse_number, required=True)
    p.add_argument("--a", type=float, default=0.01, help="initial data (1 + a) Phi_omega")
    p.add_argument("--T", type=float, default=T)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--R", type=float, default=10.0, help="virial cutoff radius")
    p.add_argument("--sample", type=float, default=0.5, help="time between records")
    p.add_argument("--no-dealias", action="store_true")
    p.add_argument("--out", default=None, help="output file (default stdout)")


def cmd_soliton(args):
    grid = g.make_grid(args.L, args.N)
    fam = sol.family(grid, args.omega)
    rows = zip(grid.x, fam.phi, fam.dphi, fam.domega_phi)
    _emit(io.csv_text(("x", "phi", "dphi", "dω_phi"), rows,
                      {"omega": fam.omega, "L": grid.length, "N": grid.points}), args.out)
    return 0


def cmd_identities(args):
    rep = hs.suite_identities(args.omega, args.L, args.N, args.c0)
    cols = list(rep.rows[0].keys()) if rep.rows else ["omega"]
    _emit(io.csv_text(cols, [[r.get(c) for c in cols] for r in rep.rows]), args.out)
    for f in rep.failures:
        print("FAIL", f, file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_spectrum(args):
    rep = hs.suite_spectra([args.omega], args.L, args.N, args.c0, args.count)
    _emit(io.json_text(rep.rows[0]), args.out)
    return 0 if rep.passed else 1


def _evolve_config(args):
    return EvolveConfig(c0=args.c0, dt=args.dt, T=args.T,
                        record_every=max(1, int(round(args.sample / args.dt))),
                        dealias=not args.no_dealias)


def cmd_evolve(args):
    grid = g.make_grid(args.L, args.N)
    omega = sol.check_frequency(args.omega)
    mon = dg.SolitonMonitor(omega, dg.cutoff(args.R, grid), args.c0, fit=omega != 0.0)
    status = 0
    try:
        traj = evolve(hs.initial_state(grid, omega, args.a), _evolve_config(args), (mon,))
    except BlowUp as exc:
        traj, status = exc.trajectory, 1
        print(f"blow-up at t = {exc.t}", file=sys.stderr)
    meta = {"omega": omega, "a": args.a, "L": args.L, "N": args.N, "c0": args.c0, "dt": args.dt}
    _emit(io.csv_text(DiagnosticsRecord.columns(), [r.values() for r in traj.records], meta),
          args.out)
    return status


def cmd_virial_check(args):
    grid = g.make_grid(args.L, args.N)
    omega = sol.check_frequency(args.omega)
    cut = dg.cutoff(args.R, grid)
    traj = evolve(hs.initial_state(grid, omega, args.a), _evolve_config(args), keep_states=True)
    ys = hs.translation_path(traj.states, omega, grid.length)
    chk = dg.virial_rhs_check(traj.times, traj.states, cut, omega, args.c0, ys)
    recs = [{"t": t, "dI_tilde_dt": l, "rhs": r, "mismatch": abs(l - r)}
            for t, l, r in zip(chk.times, chk.lhs, chk.rhs)]
    ok = chk.residual < args.tol
    _emit(io.json_text({"omega": omega, "a": args.a, "residual": chk.residual, "tol": args.tol,
                        "pass": ok, "records": recs}), args.out)
    return 0 if ok else 1


def cmd_modfit(args):
    grid = g.make_grid(args.L, args.N)
    omega = sol.check_frequency(args.omega)
    traj = evolve(hs.initial_state(grid, omega, args.a), _evolve_config(args), keep_states=True)
    recs, guess, status = [], None, 0
    for t, s in zip(traj.times, traj.states):
        try:
            fit = dg.modulation_fit(s, omega, guess)
        except NoConvergence as exc:
            recs.append({"t": t, "error": str(exc)})
            status, guess = 1, None
            continue
        guess = (fit.theta, fit.y, fit.lam)
        rec = {"t": t}
        rec.update(fit.as_dict())
        rec["rotation_residual_defect"] = dg.rotation_residual_defect(s, fit, omega)
        recs.append(rec)
    _emit(io.json_text({"omega": omega, "a": args.a, "records": recs}), args.out)
    return status


def _overrides(pairs):
    out = {}
    for p in pairs or ():
        if "=" not in p:
            raise SystemExit(f"--set expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_scan(args):
    over = _overrides(args.set)
    if args.config:
        cfg = hs.ExperimentConfig.from_file(args.config, over)
    else:
        cfg = hs.ExperimentConfig.from_mapping(over)
    verdicts = hs.stability_scan(cfg, args.out_dir)
    if args.out_dir is None:
        sys.stdout.write(io.csv_text(hs.StabilityVerdict.SUMMARY_COLUMNS,
                                     [v.row() for v in verdicts]))
    return 1 if any(v.error for v in verdicts) else 0


DEFAULT_LATTICE = (0.0, 0.3, -0.3, 1 / math.sqrt(2), -1 / math.sqrt(2), 0.9, -0.9)


def cmd_suite(args):
    status = 0
    outputs = {}
    if args.which in ("identities", "all"):
        rep = hs.suite_identities(args.omega or DEFAULT_LATTICE)
        cols = list(rep.rows[0].keys()) if rep.rows else ["omega"]
        outputs["identities.csv"] = io.csv_text(cols, [[r.get(c) for c in cols] for r in rep.rows])
        status |= not rep.passed
        for f in rep.failures:
            print("FAIL", f, file=sys.stderr)
    if args.which in ("spectra", "all"):
        omegas = args.omega or tuple(w for w in DEFAULT_LATTICE if w != 0.0)
        rep = hs.suite_spectra(omegas)
        outputs["spectra.json"] = io.json_text({"rows": rep.rows, "failures": rep.failures})
        status |= not rep.passed
        for f in rep.failures:
            print("FAIL", f, file=sys.stderr)
    for name, text in outputs.items():
        if args.out_dir:
            io.write_atomic(os.path.join(args.out_dir, name), text)
        else:
            sys.stdout.write(text)
    return int(status)


def build_parser():
    p = argparse.ArgumentParser(prog="kgzlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("soliton", help="dump the profile and its derivatives as CSV")
    s.add_argument("--omega", type=hs.parse_number, default=0.0)
    _grid_args(s)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_soliton)

    s = sub.add_parser("identities", help="closed-form identities per frequency (CSV)")
    s.add_argument("--omega", type=hs.parse_list, default=DEFAULT_LATTICE,
                   help="comma-separated frequencies")
    _grid_args(s)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_identities)

    s = sub.add_parser("spectrum", help="Hessian spectrum at one frequency (JSON)")
    s.add_argument("--omega", type=hs.parse_number, required=True)
    s.add_argument("--count", type=int, default=8)
    _grid_args(s, L=40.0, N=256)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("evolve", help="evolve (1 + a) Phi_omega and record diagnostics (CSV)")
    _run_args(s)
    _grid_args(s)
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("virial-check", help="compare dI~/dt with its closed form (JSON)")
    _run_args(s, T=2.0)
    _grid_args(s)
    s.add_argument("--tol", type=float, default=1e-4)
    s.set_defaults(func=cmd_virial_check, sample=0.05)

    s = sub.add_parser("modfit", help="modulation parameters along a run (JSON)")
    _run_args(s, T=5.0)
    _grid_args(s)
    s.set_defaults(func=cmd_modfit)

    s = sub.add_parser("scan", help="stability scan over (omega, a)")
    s.add_argument("--config", default=None, help="key = value configuration file")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a setting")
    s.add_argument("--out-dir", default=None)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("suite", help="identity and spectrum suites with pass/fail")
    s.add_argument("--which", choices=("identities", "spectra", "all"), default="all")
    s.add_argument("--omega", type=hs.parse_list, default=None)
    s.add_argument("--out-dir", default=None)
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KGZError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
