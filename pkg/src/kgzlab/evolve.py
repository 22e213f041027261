"""Fixed-step RK4 integration of KGZ in the variables ``(u, v, n, m)``.

    u_t = v,  v_t = u_xx - u - n u,  n_t = m_xx,  m_t = c0² (n + |u|²)

Space derivatives are spectral. With ``dealias`` the quadratic products
``n u`` and ``|u|²`` are projected on the 2/3-rule band.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from . import grid as g
from .backend import kernel
from .errors import BlowUp
from .functionals import charge, energy, momentum
from .state import KGZState


@dataclass(frozen=True)
class EvolveConfig:
    c0: float = 1.0
    dt: float = 0.01
    T: float = 1.0
    record_every: int = 1
    dealias: bool = True
    blowup: float = 1e6

    def __post_init__(self):
        if not self.c0 > 0 or not self.dt > 0 or not self.T > 0:
            raise ValueError("c0, dt and T must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be a positive integer")

    @property
    def nsteps(self) -> int:
        return int(round(self.T / self.dt))

    def check(self, grid: g.Grid1D):
        lim = dt_max(grid, self.c0)
        if self.dt > lim:
            raise ValueError(f"dt = {self.dt} exceeds the stability guard {lim:.4g}")


def dt_max(grid: g.Grid1D, c0: float = 1.0) -> float:
    return 0.5 * grid.h / max(1.0, c0)


def pack(s: KGZState) -> np.ndarray:
    return np.concatenate([s.u.view(float), s.v.view(float), s.n, s.m])


def unpack(grid: g.Grid1D, y) -> KGZState:
    N = grid.points
    y = np.ascontiguousarray(y, dtype=float)
    return KGZState(grid, y[: 2 * N].view(complex), y[2 * N: 4 * N].view(complex),
                    y[4 * N: 5 * N], y[5 * N:])


def _project(grid, f):
    if np.isrealobj(f):
        nh = grid.points // 2 + 1
        return np.fft.irfft(grid.dealias_mask[:nh] * np.fft.rfft(f), n=grid.points)
    return np.fft.ifft(grid.dealias_mask * np.fft.fft(f))


def rhs(s: KGZState, c0: float = 1.0, dealias: bool = False):
    """Time derivative ``(u_t, v_t, n_t, m_t)``."""
    gr = s.grid
    nu = s.n * s.u
    sq = np.abs(s.u) ** 2
    if dealias:
        nu, sq = _project(gr, nu), _project(gr, sq)
    return (s.v.copy(), g.derivative(gr, s.u, 2) - s.u - nu, g.derivative(gr, s.m, 2),
            c0 * c0 * (s.n + sq))


def _advance(s: KGZState, cfg: EvolveConfig, nsteps: int):
    y = pack(s)
    done, blew = kernel.advance(y, s.grid.length, cfg.dt, nsteps, cfg.c0, cfg.dealias, cfg.blowup)
    return unpack(s.grid, y), int(done), bool(blew)


def step(s: KGZState, cfg: EvolveConfig) -> KGZState:
    """One RK4 step of size ``cfg.dt``."""
    out, _, blew = _advance(s, cfg, 1)
    if blew:
        raise BlowUp("field norm left the admissible range", t=cfg.dt, state=out)
    return out


def time_reversed(s: KGZState) -> KGZState:
    """``(u, -v, n, -m)``: the state that retraces the trajectory backwards."""
    return KGZState(s.grid, s.u, -s.v, s.n, -s.m)


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    Q: float
    P: float
    dE_rel: float
    orbit_distance: float = np.nan
    theta: float = np.nan
    y: float = np.nan
    lam: float = np.nan
    I_virial: float = np.nan
    I_tilde: float = np.nan
    xnorm_xi: float = np.nan
    moment0: float = np.nan
    moment1: float = np.nan

    @staticmethod
    def columns():
        return tuple("lambda" if f.name == "lam" else f.name for f in fields(DiagnosticsRecord))

    def values(self):
        return tuple(getattr(self, f.name) for f in fields(self))


@dataclass
class Trajectory:
    grid: g.Grid1D
    config: EvolveConfig
    E0: float
    Q0: float
    P0: float
    records: list = field(default_factory=list)
    states: list = field(default_factory=list)
    stopped: bool = False
    final_state: KGZState | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name) -> np.ndarray:
        name = "lam" if name == "lambda" else name
        return np.array([getattr(r, name) for r in self.records])

    def max_drift(self):
        """Largest relative drift of ``E``, ``Q``, ``P`` over the records."""
        def drift(vals, ref):
            scale = max(abs(ref), 1.0)
            return float(np.max(np.abs(vals - ref)) / scale)
        return {"E": drift(self.column("E"), self.E0), "Q": drift(self.column("Q"), self.Q0),
                "P": drift(self.column("P"), self.P0)}


def make_record(t: float, s: KGZState, c0: float, E0: float | None = None) -> DiagnosticsRecord:
    gr = s.grid
    E = energy(s, c0)
    ref = E if E0 is None else E0
    nu = s.nu
    return DiagnosticsRecord(
        t=t, E=E, Q=charge(s), P=momentum(s, c0),
        dE_rel=abs(E - ref) / max(abs(ref), np.finfo(float).tiny),
        moment0=g.integrate(gr, nu), moment1=g.integrate(gr, gr.x * nu))


def evolve(s0: KGZState, cfg: EvolveConfig, observers=(), keep_states: bool = False) -> Trajectory:
    """Integrate to ``cfg.T``, recording every ``cfg.record_every`` steps.

    Each observer is called as ``obs(record, state)`` after a record is
    made and may fill in further record fields; a truthy return value
    stops the run. On blow-up :class:`BlowUp` is raised carrying the
    partial trajectory.
    """
    cfg.check(s0.grid)
    s0.check_zero_mean_nu()
    c0 = cfg.c0
    rec = make_record(0.0, s0, c0)
    traj = Trajectory(s0.grid, cfg, rec.E, rec.Q, rec.P)

    def emit(rec, s):
        traj.records.append(rec)
        if keep_states:
            traj.states.append(s)
        stop = False
        for obs in observers:
            stop = bool(obs(rec, s)) or stop
        return stop

    s = s0
    if emit(rec, s):
        traj.stopped = True
        traj.final_state = s
        return traj
    total = cfg.nsteps
    done = 0
    while done < total:
        chunk = min(cfg.record_every, total - done)
        s, taken, blew = _advance(s, cfg, chunk)
        done += taken
        t = done * cfg.dt
        if blew:
            traj.final_state = s
            raise BlowUp(f"field norm left the admissible range at t = {t:.4g}",
                         t=t, state=s, trajectory=traj)
        if emit(make_record(t, s, c0, traj.E0), s):
            traj.stopped = True
            break
    traj.final_state = s
    return traj
