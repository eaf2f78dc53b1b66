"""Pseudospectral time integration of ``u_t + (u^2/2)_x = N[u]``.

The linear part is diagonal in Fourier space and is integrated exactly with
an integrating factor; the quadratic flux is dealiased with the 2/3 rule and
advanced by classical RK4 (Lawson's IFRK4).  With the 2/3 rule every cubic
integral that enters the energy identities is evaluated without aliasing on
the grid, so the semi-discrete system inherits them exactly.

A run stops when the slope blows up past ``m_cap_factor * m(0)``, when the
spectrum piles up in the top band (resolution loss), or at ``max_time``.  The
breaking time is then extrapolated from the line through ``1 / m(t)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import interpolate as sp_interp

from .operators import ModelSpec, grid_multiplier
from .spectral import Field, GridSpec, dealias_mask, derivative_symbol, extremum, interpolate, tail_ratio

__all__ = [
    "BreakingEstimate",
    "CharacteristicState",
    "InitialData",
    "SimConfig",
    "SimulationTrace",
    "FLUX_COLUMNS",
    "TRACE_COLUMNS",
    "estimate_tstar",
    "rhs",
    "run",
    "step",
    "track_characteristics",
]

TRACE_COLUMNS = ("t", "m", "M", "z0", "z1", "z2", "z3", "tail_ratio")
# int u_x^3, int u_x u_xx^2, int u_x u_xxx^2: the fluxes of the energy identities
FLUX_COLUMNS = ("flux1", "flux2", "flux3")
_ALL = TRACE_COLUMNS + FLUX_COLUMNS


class UnresolvedData(ValueError):
    """Initial data is under-resolved or does not decay at the box edges."""


@dataclass(frozen=True)
class InitialData:
    """Initial profile.

    ``kind`` is ``"gaussian_slope"`` for ``-a x exp(-x^2 / (2 w^2))``,
    ``"sine"`` for ``-a sin(x)`` (periodic on a box of half-width ``pi``) or
    ``"tabulated"`` for samples ``(x, values)`` interpolated by a cubic spline
    and extended by zero.
    """

    kind: str = "gaussian_slope"
    amplitude: float = 1.0
    width: float = 1.0
    x: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("gaussian_slope", "sine", "tabulated"):
            raise ValueError(f"unknown initial data kind {self.kind!r}")
        if self.kind == "tabulated" and len(self.x) < 4:
            raise ValueError("tabulated data needs at least 4 samples")
        if self.width <= 0:
            raise ValueError("width must be positive")

    @property
    def periodic(self) -> bool:
        return self.kind == "sine"

    def sample(self, grid: GridSpec) -> Field:
        x = grid.x
        a = self.amplitude
        if self.kind == "gaussian_slope":
            v = -a * x * np.exp(-x ** 2 / (2 * self.width ** 2))
        elif self.kind == "sine":
            v = -a * np.sin(x)
        else:
            xs, ys = np.asarray(self.x, float), np.asarray(self.values, float)
            spline = sp_interp.CubicSpline(xs, ys)
            inside = (x >= xs[0]) & (x <= xs[-1])
            v = np.where(inside, spline(np.clip(x, xs[0], xs[-1])), 0.0)
        return Field(grid, v)

    def scaled(self, a: float) -> "InitialData":
        if self.kind == "tabulated":
            return replace(self, values=tuple(a * np.asarray(self.values)))
        return replace(self, amplitude=a * self.amplitude)


@dataclass(frozen=True)
class SimConfig:
    model: ModelSpec
    grid: GridSpec
    data: InitialData
    cfl_number: float = 0.4
    m_cap_factor: float = 50.0
    tail_stop: float = 1e-4
    fit_window: int = 20
    max_time: float = 10.0
    n_max: int = 4096  # retry ceiling for resolution loss
    min_growth: float = 3.0  # m_last / m0 needed to trust an extrapolation
    max_steps: int = 200_000

    def __post_init__(self):
        if not 0 < self.cfl_number < 1:
            raise ValueError("cfl_number must lie in (0, 1)")
        if not self.m_cap_factor > 1:
            raise ValueError("m_cap_factor must exceed 1")
        if self.fit_window < 5:
            raise ValueError("fit_window must be at least 5")
        if not self.max_time > 0:
            raise ValueError("max_time must be positive")


@dataclass
class SimulationTrace:
    columns: dict
    n: int
    final: Field | None = None

    @classmethod
    def empty(cls, n: int) -> "SimulationTrace":
        return cls({c: [] for c in _ALL}, n)

    def append(self, row: dict):
        for c in _ALL:
            self.columns[c].append(float(row[c]))

    def freeze(self):
        self.columns = {c: np.asarray(v, float) for c, v in self.columns.items()}
        return self

    def __getitem__(self, name) -> np.ndarray:
        return np.asarray(self.columns[name])

    def __len__(self):
        return len(self.columns["t"])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for i in range(len(self)):
                w.writerow([repr(float(self.columns[c][i])) for c in TRACE_COLUMNS])


@dataclass
class BreakingEstimate:
    t_star_est: float
    stop_reason: str
    fit_slope: float
    fit_quality: float
    valid: bool = True
    note: str = ""
    growth: float = math.nan  # m_last / m0
    n: int = 0

    def to_dict(self) -> dict:
        return {k: (v if not isinstance(v, float) or math.isfinite(v) else None)
                for k, v in self.__dict__.items()}


@dataclass
class CharacteristicState:
    """Characteristic curves sampled at every trace time (rows) per seed (columns)."""

    beta: np.ndarray
    t: np.ndarray
    xi: np.ndarray
    v: np.ndarray
    frozen: np.ndarray  # per-seed flag: left the trusted interior
    nux_sup: np.ndarray  # grid sup of |N[u_x]| at each sample time


# -- right-hand side and stepper ---------------------------------------------------

class _Operators:
    """Spectral symbols for one (model, grid) pair."""

    def __init__(self, model: ModelSpec, grid: GridSpec):
        self.grid = grid
        self.mask = dealias_mask(grid)
        self.dx1 = derivative_symbol(grid, 1)
        self.lin = np.array(grid_multiplier(model, grid)) * self.mask
        self.nl_sym = -0.5 * self.dx1 * self.mask

    def nonlinear(self, uh: np.ndarray) -> np.ndarray:
        u = np.fft.ifft(uh * self.mask).real
        return self.nl_sym * np.fft.fft(u * u)

    def stages(self, uh: np.ndarray, dt: float, nonlinear: bool = True):
        """One IFRK4 step; returns the new spectrum and the four stage spectra."""
        e = np.exp(self.lin * (dt / 2))
        e2 = e * e
        nl = self.nonlinear if nonlinear else (lambda v: np.zeros_like(v))
        s1 = uh
        k1 = nl(s1)
        s2 = e * (uh + dt / 2 * k1)
        k2 = nl(s2)
        s3 = e * uh + dt / 2 * k2
        k3 = nl(s3)
        s4 = e2 * uh + dt * e * k3
        k4 = nl(s4)
        new = e2 * uh + dt / 6 * (e2 * k1 + 2 * e * (k2 + k3) + k4)
        return new * self.mask, (s1, s2, s3, s4)


def rhs(u: Field, model: ModelSpec) -> Field:
    """``-(P(u^2)/2)_x + N[u]`` with ``u`` truncated to the 2/3 band first."""
    ops = _Operators(model, u.grid)
    uh = u.spectrum * ops.mask
    return Field.from_spectrum(u.grid, ops.nonlinear(uh) + ops.lin * uh)


def step(u: Field, dt: float, model: ModelSpec, nonlinear: bool = True) -> Field:
    """One IFRK4 step of size ``dt``."""
    if dt == 0:
        return u
    ops = _Operators(model, u.grid)
    new, _ = ops.stages(u.spectrum * ops.mask, dt, nonlinear)
    return Field.from_spectrum(u.grid, new)


# -- diagnostics per row -------------------------------------------------------------

def _row(t: float, uh: np.ndarray, grid: GridSpec) -> tuple[dict, Field]:
    # resolution is monitored on u_x: the slope is what blows up and what m reads
    u = Field.from_spectrum(grid, uh)
    k = 1j * grid.wavenumbers
    k[grid.n // 2] = 0.0
    ux = Field.from_spectrum(grid, uh * k)
    uxx = np.fft.ifft(uh * k * k).real
    uxxx = np.fft.ifft(uh * k ** 3).real
    a = ux.values
    lo = extremum(ux, "min")[1]
    hi = extremum(ux, "max")[1]
    # Parseval keeps the z's exact for band-limited fields
    power = np.abs(uh) ** 2 * (grid.length / grid.n ** 2)
    kk = grid.wavenumbers ** 2
    row = {
        "t": t, "m": -lo, "M": max(abs(lo), abs(hi)),
        "z0": power.sum(), "z1": (power * kk).sum(), "z2": (power * kk ** 2).sum(),
        "z3": (power * kk ** 3).sum(), "tail_ratio": tail_ratio(ux),
        "flux1": grid.dx * np.sum(a ** 3), "flux2": grid.dx * np.sum(a * uxx ** 2),
        "flux3": grid.dx * np.sum(a * uxxx ** 2),
    }
    return row, u


def _check_data(u: Field, data: InitialData, tail_stop: float):
    if not data.periodic:
        edge = max(abs(u.values[0]), abs(u.values[-1]))
        if edge >= 1e-10:
            raise UnresolvedData(f"initial data does not decay at the box edges (|u| = {edge:.3g})")
    k = 1j * u.grid.wavenumbers
    k[u.grid.n // 2] = 0.0
    tr = tail_ratio(Field.from_spectrum(u.grid, u.spectrum * k))
    if tr > tail_stop:
        raise UnresolvedData(f"initial data under-resolved (tail ratio {tr:.3g} > {tail_stop:g})")


def _integrate(cfg: SimConfig, seeds=None):
    grid = cfg.grid
    u0 = cfg.data.sample(grid)
    _check_data(u0, cfg.data, cfg.tail_stop)
    ops = _Operators(cfg.model, grid)
    uh = u0.spectrum * ops.mask
    trace = SimulationTrace.empty(grid.n)
    row, u = _row(0.0, uh, grid)
    trace.append(row)
    m0 = row["m"]
    if not m0 > 0:
        raise ValueError("initial data has no negative slope; nothing to break")

    chars = None
    if seeds is not None:
        beta = np.asarray(seeds, float)
        nlx = ops.lin * ops.dx1  # symbol of N[u_x]
        y_xi = beta.copy()
        y_v = -interpolate(u0, beta, (1,))[0]
        frozen = np.zeros(beta.size, bool)
        hist_xi, hist_v = [y_xi.copy()], [y_v.copy()]
        hist_n = [_nux_sup(uh, nlx)]
        # periodic characteristics wrap around; on the open box they leave the trusted interior
        limit = math.inf if cfg.data.periodic else 0.9 * grid.half_width

    t, reason, steps = 0.0, "max_time", 0
    while True:
        if row["m"] >= cfg.m_cap_factor * m0:
            reason = "m_cap"
            break
        if row["tail_ratio"] > cfg.tail_stop:
            reason = "resolution_loss"
            break
        if t >= cfg.max_time * (1 - 1e-14) or steps >= cfg.max_steps:
            reason = "max_time"
            break
        umax = max(np.max(np.abs(u.values)), 1e-12)
        dt = min(cfg.cfl_number * grid.dx / umax, 0.5 / row["m"], cfg.max_time - t)
        new, st = ops.stages(uh, dt)
        if seeds is not None:
            y_xi, y_v = _advance_chars(y_xi, y_v, frozen, st, dt, grid, nlx)
            frozen |= np.abs(y_xi) > limit
            hist_xi.append(y_xi.copy())
            hist_v.append(y_v.copy())
            hist_n.append(_nux_sup(new, nlx))
        uh = new
        t += dt
        steps += 1
        row, u = _row(t, uh, grid)
        trace.append(row)
    trace.freeze()
    trace.final = u
    if seeds is not None:
        chars = CharacteristicState(beta, trace["t"], np.array(hist_xi), np.array(hist_v), frozen,
                                    np.array(hist_n))
    return trace, reason, chars


def _nux_sup(uh, nlx) -> float:
    return float(np.max(np.abs(np.fft.ifft(uh * nlx).real)))


def _advance_chars(xi, v, frozen, stages, dt, grid, nlx):
    """RK4 for ``xi' = u(xi)``, ``v' = v^2 - N[u_x](xi)`` using the stepper's stage states."""
    live = ~frozen

    def f(stage, x, vv):
        u = Field.from_spectrum(grid, stage)
        nux = Field.from_spectrum(grid, stage * nlx)
        ux = interpolate(u, x, (0,))[0]
        n = interpolate(nux, x, (0,))[0]
        return ux, vv * vv - n

    x, w = xi[live], v[live]
    a1, b1 = f(stages[0], x, w)
    a2, b2 = f(stages[1], x + dt / 2 * a1, w + dt / 2 * b1)
    a3, b3 = f(stages[2], x + dt / 2 * a2, w + dt / 2 * b2)
    a4, b4 = f(stages[3], x + dt * a3, w + dt * b3)
    xi, v = xi.copy(), v.copy()
    xi[live] = x + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
    v[live] = w + dt / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
    return xi, v


# -- breaking-time extrapolation ------------------------------------------------------

def estimate_tstar(trace, window: int = 20, stop_reason: str = "m_cap") -> BreakingEstimate:
    """Least-squares line through ``(t, 1/m)`` over the last ``window`` rows.

    ``trace`` may be a :class:`SimulationTrace` or a pair of arrays ``(t, m)``.
    """
    if isinstance(trace, SimulationTrace):
        t, m = trace["t"], trace["m"]
    else:
        t, m = (np.asarray(a, float) for a in trace)
    if len(t) < window:
        return BreakingEstimate(math.nan, stop_reason, math.nan, math.nan, False,
                                f"only {len(t)} samples, window needs {window}")
    tw, mw = t[-window:], m[-window:]
    if np.any(mw <= 0) or np.any(np.diff(mw) <= 0):
        return BreakingEstimate(math.nan, stop_reason, math.nan, math.nan, False,
                                "m not increasing over the fit window")
    y = 1.0 / mw
    slope, intercept = np.polyfit(tw, y, 1)
    resid = y - (slope * tw + intercept)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss if ss > 0 else 1.0
    if not slope < 0:
        return BreakingEstimate(math.nan, stop_reason, float(slope), float(r2), False,
                                "1/m not decreasing over the fit window")
    return BreakingEstimate(float(-intercept / slope), stop_reason, float(slope), float(r2),
                            growth=float(m[-1] / m[0]))


def _judge(est: BreakingEstimate, trace: SimulationTrace, cfg: SimConfig) -> BreakingEstimate:
    est.n = trace.n
    if not est.valid:
        return est
    if est.stop_reason == "max_time":
        est.valid = False
        est.note = "max_time reached before breaking"
    elif est.stop_reason == "resolution_loss" and est.growth < cfg.min_growth:
        est.valid = False
        est.note = (f"resolution lost at m/m0 = {est.growth:.3g} < {cfg.min_growth:g} "
                    f"with n = {trace.n}")
    elif est.t_star_est < trace["t"][-1]:
        est.valid = False
        est.note = "extrapolated root precedes the last sample"
    elif est.stop_reason == "resolution_loss":
        est.note = f"resolution lost at m/m0 = {est.growth:.3g}; extrapolated from the resolved window"
    return est


def run(config: SimConfig, seeds=None):
    """Integrate to breaking; returns ``(trace, estimate)`` or, with ``seeds``,
    ``(trace, estimate, characteristics)``.

    On resolution loss before ``m_cap`` the run is repeated at doubled ``n``
    while ``n <= n_max``; the finest attempt is returned.
    """
    cfg = config
    while True:
        trace, reason, chars = _integrate(cfg, seeds)
        est = _judge(estimate_tstar(trace, cfg.fit_window, reason), trace, cfg)
        if reason != "resolution_loss" or cfg.grid.n * 2 > cfg.n_max:
            break
        cfg = replace(cfg, grid=cfg.grid.refined(2))
    if seeds is None:
        return trace, est
    return trace, est, chars


def track_characteristics(config: SimConfig, seeds) -> CharacteristicState:
    """Characteristics from ``seeds`` integrated alongside a single run (no retry)."""
    _, _, chars = _integrate(config, seeds)
    return chars
