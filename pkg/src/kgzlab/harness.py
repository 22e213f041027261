"""Experiments: perturbed standing waves, the stability scan and batch suites.

A run starts from ``(1 + a) Φ_ω`` (so ``nu = 0`` initially), evolves it and
records the orbit distance, modulation parameters and ``Ĩ`` every
``record_interval`` time units. A run *exits* when the orbit distance
exceeds ``exit_fraction · ||Φ_ω||_X`` or the fields blow up. A verdict of
"not exited" only means "no exit before ``T``".
"""
from __future__ import annotations

import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import grid as g
from . import io
from . import soliton as sol
from .diagnostics import SolitonMonitor, cutoff, modulation_fit, orbit_distance
from .errors import BlowUp, NoConvergence
from .evolve import DiagnosticsRecord, EvolveConfig, evolve
from .functionals import identity_report
from .linops import assemble_hessian, spectrum, tuple_norm
from .state import x_norm_state

FINITE_T_NOTE = "no exit before T is not a proof of stability"


def parse_number(text: str) -> float:
    """Float, or the shorthands ``1/sqrt(2)`` / ``-1/sqrt2``."""
    t = text.strip().replace(" ", "")
    m = re.fullmatch(r"([+-]?)1/sqrt\(?2\)?", t)
    if m:
        return (-1.0 if m.group(1) == "-" else 1.0) / math.sqrt(2.0)
    return float(t)


def parse_list(text: str):
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_number(p) for p in text.split(",") if p.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    omegas: tuple = (0.2, 0.4, 0.6, 1 / math.sqrt(2), 0.75, 0.9)
    amplitudes: tuple = (0.01,)
    L: float = 60.0
    N: int = 1024
    c0: float = 1.0
    dt: float = 0.01
    T: float = 200.0
    R: float = 10.0
    exit_fraction: float = 0.3
    stay_fraction: float = 0.1
    record_interval: float = 0.5
    dealias: bool = True
    fit: bool = True
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        for w in self.omegas:
            sol.check_frequency(w)
        for name in ("L", "c0", "dt", "T", "R", "exit_fraction", "stay_fraction", "record_interval"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.N < 16 or self.N % 2:
            raise ValueError("N must be even and >= 16")

    @property
    def record_every(self) -> int:
        return max(1, int(round(self.record_interval / self.dt)))

    @classmethod
    def from_mapping(cls, values: dict, base=None):
        base = cls() if base is None else base
        kinds = {f.name: f.type for f in fields(cls)}
        kw = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key in ("omega", "omegas"):
                kw["omegas"] = parse_list(raw) if isinstance(raw, str) else tuple(raw)
            elif key in ("a", "amplitudes"):
                kw["amplitudes"] = parse_list(raw) if isinstance(raw, str) else tuple(raw)
            elif key not in kinds:
                raise KeyError(f"unknown configuration key {key!r}")
            elif not isinstance(raw, str):
                kw[key] = raw
            elif key in ("dealias", "fit"):
                kw[key] = raw.strip().lower() in ("1", "true", "yes", "on")
            elif key in ("N", "workers"):
                kw[key] = int(raw)
            else:
                kw[key] = parse_number(raw)
        return replace(base, **kw)

    @classmethod
    def from_file(cls, path, overrides=None):
        values = {}
        with open(path, encoding="utf-8") as fh:
            for ln in fh:
                ln = ln.split("#", 1)[0].strip()
                if not ln:
                    continue
                if "=" not in ln:
                    raise ValueError(f"expected key = value, got {ln!r}")
                k, v = ln.split("=", 1)
                values[k.strip()] = v.strip()
        values.update(overrides or {})
        return cls.from_mapping(values)


@dataclass
class StabilityVerdict:
    omega: float
    a: float
    exited: bool
    t_exit: float | None
    max_distance: float
    max_distance_rel: float
    stayed_close: bool
    min_I_tilde_slope: float
    I_tilde_ls_slope: float
    blew_up: bool = False
    records: str | None = None
    error: str | None = None
    note: str = ""
    trajectory: object = field(default=None, repr=False, compare=False)

    SUMMARY_COLUMNS = ("omega", "a", "exited", "t_exit", "max_distance", "max_distance_rel",
                       "stayed_close", "min_I_tilde_slope", "I_tilde_ls_slope", "blew_up",
                       "records", "error", "note")

    def row(self):
        return tuple(getattr(self, c) for c in self.SUMMARY_COLUMNS)

    def as_dict(self):
        return {c: getattr(self, c) for c in self.SUMMARY_COLUMNS}


def run_name(omega: float, a: float) -> str:
    return f"run_omega{omega:+.6f}_a{a:+.6f}.csv"


def initial_state(grid, omega, a):
    return (1.0 + a) * sol.family(grid, omega).Phi


def translation_path(states, omega, length):
    """Unwrapped ``y`` per state: the modulation fit, else the orbit argmin."""
    ys = []
    for s in states:
        try:
            ys.append(modulation_fit(s, omega).y if omega != 0.0 else 0.0)
        except NoConvergence:
            ys.append(orbit_distance(s, omega).y)
    return np.unwrap(ys, period=length)


def _slopes(traj, eps_exit):
    t = traj.times
    I = traj.column("I_tilde")
    d = traj.column("orbit_distance")
    far = np.nonzero(~(d < eps_exit / 4.0))[0]
    n_near = far[0] if far.size else len(t)
    ls = float(np.polyfit(t[:n_near], I[:n_near], 1)[0]) if n_near >= 2 else math.nan
    # pre-exit window: records before the distance first passes eps_exit
    out = np.nonzero(~(d <= eps_exit))[0]
    n_pre = out[0] if out.size else len(t)
    mins = float(np.min(np.gradient(I[:n_pre], t[:n_pre]))) if n_pre >= 2 else math.nan
    return mins, ls


def run_instability_experiment(omega: float, a: float, cfg: ExperimentConfig,
                               out_dir=None) -> StabilityVerdict:
    """Evolve ``(1 + a) Φ_ω`` and decide whether it leaves the orbit neighbourhood."""
    omega = sol.check_frequency(omega)
    grid = g.make_grid(cfg.L, cfg.N)
    Phi = sol.family(grid, omega).Phi
    scale = x_norm_state(Phi)
    eps_exit = cfg.exit_fraction * scale
    mon = SolitonMonitor(omega, cutoff(cfg.R, grid), cfg.c0, exit_distance=eps_exit, fit=cfg.fit)
    ecfg = EvolveConfig(c0=cfg.c0, dt=cfg.dt, T=cfg.T, record_every=cfg.record_every,
                        dealias=cfg.dealias)
    blew = False
    t_exit = None
    try:
        traj = evolve(initial_state(grid, omega, a), ecfg, observers=(mon,))
        if traj.stopped:
            t_exit = traj.records[-1].t
    except BlowUp as exc:
        traj, blew, t_exit = exc.trajectory, True, float(exc.t)
    d = traj.column("orbit_distance")
    dmax = float(np.nanmax(d)) if len(d) else math.nan
    mins, ls = _slopes(traj, eps_exit)
    exited = t_exit is not None
    notes = []
    if not exited:
        notes.append(FINITE_T_NOTE)
    if a < 0:
        notes.append("a < 0 is experimental")
    path = None
    if out_dir is not None:
        path = os.path.join(out_dir, run_name(omega, a))
        meta = {"omega": omega, "a": a, "L": cfg.L, "N": cfg.N, "c0": cfg.c0, "dt": cfg.dt,
                "T": cfg.T, "R": cfg.R, "exit_distance": eps_exit, "blew_up": blew}
        io.write_atomic(path, io.csv_text(DiagnosticsRecord.columns(),
                                          [r.values() for r in traj.records], meta))
    return StabilityVerdict(
        omega=omega, a=a, exited=exited, t_exit=t_exit, max_distance=dmax,
        max_distance_rel=dmax / scale, stayed_close=(not exited) and dmax < cfg.stay_fraction * scale,
        min_I_tilde_slope=mins, I_tilde_ls_slope=ls, blew_up=blew,
        records=None if path is None else os.path.basename(path), note="; ".join(notes),
        trajectory=traj)


def _run_safe(args):
    omega, a, cfg, out_dir = args
    try:
        v = run_instability_experiment(omega, a, cfg, out_dir)
        v.trajectory = None
        return v
    except Exception as exc:  # aggregated, the scan keeps going
        return StabilityVerdict(omega, a, False, None, math.nan, math.nan, False, math.nan,
                                math.nan, error=f"{type(exc).__name__}: {exc}")


def stability_scan(cfg: ExperimentConfig, out_dir=None):
    """One experiment per ``(ω, a)``; writes ``summary.csv`` plus per-run files."""
    jobs = [(w, a, cfg, out_dir) for w in cfg.omegas for a in cfg.amplitudes]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            verdicts = list(ex.map(_run_safe, jobs))
    else:
        verdicts = [_run_safe(j) for j in jobs]
    if out_dir is not None:
        io.write_atomic(os.path.join(out_dir, "summary.csv"),
                        io.csv_text(StabilityVerdict.SUMMARY_COLUMNS, [v.row() for v in verdicts],
                                    {"note": FINITE_T_NOTE}))
    return verdicts


# ------------------------------------------------------------------ suites

IDENTITY_TOL = 1e-7
DQ_FD_TOL = 1e-5
DQ_ZERO_TOL = 1e-6
SPECTRUM_RES_TOL = 1e-7
QUADFORM_TOL = 1e-6


@dataclass
class SuiteReport:
    name: str
    rows: list
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures


def suite_identities(omegas, L=60.0, N=1024, c0=1.0) -> SuiteReport:
    grid = g.make_grid(L, N)
    rows, failures = [], []
    for w in omegas:
        r = identity_report(w, grid, c0)
        row = asdict(r)
        ok = r.passed(IDENTITY_TOL, DQ_FD_TOL)
        if abs(w * w - 0.5) < 1e-12:
            row["dq_zero_ok"] = abs(r.dq_domega_fd) < DQ_ZERO_TOL
            ok = ok and row["dq_zero_ok"]
        row["pass"] = ok
        rows.append(row)
        if not ok:
            failures.append(f"identities at omega={w!r}")
    return SuiteReport("identities", rows, failures)


def spectrum_checks(omega, grid, c0=1.0, count=8):
    """Spectral facts of the Hessian at one frequency, as a flat dict."""
    op = assemble_hessian(omega, c0, grid)
    fam = sol.family(grid, omega)
    rep = spectrum(op, count, coercivity=omega != 0.0)

    def rel(out, ref):
        # absolute when the reference vanishes (Ψ and F at omega = 0)
        den = tuple_norm(grid, ref)
        return tuple_norm(grid, out) / den if den > 0 else tuple_norm(grid, out)

    res_ups = rel(op.apply(fam.Upsilon), fam.Upsilon.components())
    res_dx = rel(op.apply(fam.dxPhi), fam.dxPhi.components())
    SF = op.apply(fam.F)
    res_F = rel([x - y for x, y in zip(SF, fam.Psi.components())], fam.Psi.components())
    phi0 = sol.ground_state(grid)
    closed = -omega ** 2 / math.sqrt(1 - omega ** 2) * g.inner(grid, phi0, phi0)
    qf = op.quadratic_form(fam.F)
    qf_def = abs(qf - closed) / abs(closed) if closed != 0 else abs(qf)
    out = rep.as_dict()
    out.update(residual_Upsilon=res_ups, residual_dxPhi=res_dx, residual_F_minus_Psi=res_F,
               quadform_F=qf, quadform_closed=closed, quadform_defect=qf_def,
               L=grid.length, N=grid.points)
    if omega == 0.0:
        out["coercivity_note"] = "omega = 0 excluded: coercivity assumes omega != 0"
    return out


def spectrum_verdicts(row):
    """Per-check pass flags for a :func:`spectrum_checks` row."""
    v = {
        "one_negative": row["n_negative"] == 1,
        "kernel_two": row["kernel_dimension"] == 2,
        "kernel_residuals": max(row["residual_Upsilon"], row["residual_dxPhi"]) < SPECTRUM_RES_TOL,
        "F_residual": row["residual_F_minus_Psi"] < SPECTRUM_RES_TOL,
        "quadform": row["quadform_defect"] < QUADFORM_TOL,
    }
    if row["omega"] != 0.0:
        v["coercive"] = row["coercivity_min"] > 0
    return v


def suite_spectra(omegas, L=40.0, N=256, c0=1.0, count=8) -> SuiteReport:
    grid = g.make_grid(L, N)
    rows, failures = [], []
    for w in omegas:
        row = spectrum_checks(w, grid, c0, count)
        checks = spectrum_verdicts(row)
        if w == 0.0:
            # the negative direction F degenerates at omega = 0
            checks.pop("quadform")
        row["checks"] = checks
        row["pass"] = all(checks.values())
        rows.append(row)
        if not row["pass"]:
            bad = ", ".join(k for k, ok in checks.items() if not ok)
            failures.append(f"spectrum at omega={w!r}: {bad}")
    return SuiteReport("spectra", rows, failures)


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0
