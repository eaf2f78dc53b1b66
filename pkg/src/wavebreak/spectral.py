"""Periodic grids, sampled fields and their spectral calculus.

The real line is replaced by the periodic box ``[-L, L)`` sampled at ``n``
equispaced points.  Fields are stored by their samples; the discrete Fourier
coefficients (numpy ``fft`` ordering, no normalization) are computed lazily.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import _backend


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid on ``[-half_width, half_width)`` with ``n`` points."""

    half_width: float
    n: int

    def __post_init__(self):
        n = int(self.n)
        if n < 16 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def length(self) -> float:
        return 2.0 * self.half_width

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n)

    @property
    def base(self) -> float:
        """Fundamental wavenumber ``pi / L``."""
        return np.pi / self.half_width

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers in fft order (``-n/2`` appears once, last)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return self.base * self.modes

    @property
    def cutoff(self) -> int:
        """Largest mode kept by the 2/3 rule."""
        return self.n // 3

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.half_width, self.n * factor)


class Field:
    """Real samples of a function on a :class:`GridSpec`.

    Treated as immutable: operations return new fields.
    """

    def __init__(self, grid: GridSpec, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} samples, got shape {values.shape}")
        self.grid = grid
        self.values = values

    @classmethod
    def from_spectrum(cls, grid: GridSpec, spectrum) -> "Field":
        spectrum = np.asarray(spectrum, dtype=np.complex128)
        f = cls(grid, np.fft.ifft(spectrum).real)
        f.__dict__["spectrum"] = spectrum
        return f

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "Field":
        return cls(grid, func(grid.x))

    @cached_property
    def spectrum(self) -> np.ndarray:
        return np.fft.fft(self.values)

    def __add__(self, other):
        if isinstance(other, Field):
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - other)

    def __mul__(self, a):
        if isinstance(a, Field):
            return Field(self.grid, self.values * a.values)
        return Field(self.grid, self.values * a)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __repr__(self):
        return f"Field(n={self.grid.n}, L={self.grid.half_width:g})"


class Norms(NamedTuple):
    sup_norm: float
    inf_value: float
    l2_norm_squared: float


def derivative_symbol(grid: GridSpec, order: int) -> np.ndarray:
    """``(i xi)^order`` with the Nyquist mode zeroed for odd orders."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    sym = (1j * grid.wavenumbers) ** order
    if order % 2:
        sym[grid.n // 2] = 0.0
    return sym


def derivative(f: Field, order: int = 1) -> Field:
    if order == 0:
        return f
    return Field.from_spectrum(f.grid, f.spectrum * derivative_symbol(f.grid, order))


def norms(f: Field) -> Norms:
    v = f.values
    return Norms(float(np.max(np.abs(v))), float(np.min(v)), float(f.grid.dx * np.dot(v, v)))


def l2_squared(f: Field) -> float:
    return float(f.grid.dx * np.dot(f.values, f.values))


def dealias_mask(grid: GridSpec) -> np.ndarray:
    return np.abs(grid.modes) <= grid.cutoff


def dealias(f: Field) -> Field:
    return Field.from_spectrum(f.grid, np.where(dealias_mask(f.grid), f.spectrum, 0.0))


def tail_ratio(f: Field) -> float:
    """Fraction of spectral energy in the top eighth of the retained band."""
    power = np.abs(f.spectrum) ** 2
    total = power.sum()
    if total == 0.0:
        return 0.0
    kc = f.grid.cutoff
    k = np.abs(f.grid.modes)
    top = (k > kc - kc // 8) & (k <= kc)
    return float(power[top].sum() / total)


def is_resolved(f: Field, threshold: float = 1e-4) -> bool:
    return tail_ratio(f) <= threshold


# -- off-grid evaluation -------------------------------------------------------

def _one_sided(f: Field, orders) -> np.ndarray:
    """Rows of one-sided coefficients for each derivative order."""
    grid = f.grid
    n = grid.n
    half = n // 2
    s = f.spectrum[: half + 1] / n
    c = s.copy()
    c[1:half] *= 2.0
    k = grid.base * np.arange(half + 1)
    rows = []
    for d in orders:
        r = c * (1j * k) ** d
        if d % 2:
            r[half] = 0.0
        rows.append(r)
    return np.ascontiguousarray(np.array(rows))


def interpolate(f: Field, points, orders=(0,)) -> np.ndarray:
    """Trigonometric interpolant (and derivatives) of ``f`` at ``points``.

    Returns an array of shape ``(len(orders), len(points))``.
    """
    points = np.ascontiguousarray(np.atleast_1d(points), dtype=np.float64)
    coef = _one_sided(f, orders)
    return _backend.trig_sum(coef, f.grid.base, -f.grid.half_width, points)


def interpolate_value(f: Field, point: float, order: int = 0) -> float:
    return float(interpolate(f, [point], (order,))[0, 0])


def extremum(f: Field, kind: str = "min", max_iter: int = 12) -> tuple[float, float]:
    """Location and value of the global min (or max) of the interpolant.

    Starts from the best grid sample and polishes with safeguarded Newton
    steps on the interpolated derivative, confined to one cell either side.
    """
    sign = 1.0 if kind == "min" else -1.0
    if kind not in ("min", "max"):
        raise ValueError(f"kind must be 'min' or 'max', got {kind!r}")
    v = sign * f.values
    j = int(np.argmin(v))
    x0 = f.grid.x[j]
    best_x, best_v = x0, v[j]
    dx = f.grid.dx
    coef = _one_sided(f, (0, 1, 2))
    base, left = f.grid.base, -f.grid.half_width
    y = x0
    for _ in range(max_iter):
        d0, d1, d2 = _backend.trig_sum(coef, base, left, np.array([y]))[:, 0]
        if sign * d0 < best_v:
            best_x, best_v = y, sign * d0
        if sign * d2 <= 0.0:
            break  # not locally convex; keep the best point seen
        step = d1 / d2
        y_new = min(max(y - step, x0 - dx), x0 + dx)
        if abs(y_new - y) < 1e-15 * max(1.0, abs(y)):
            break
        y = y_new
    d0 = _backend.trig_sum(coef[:1], base, left, np.array([y]))[0, 0]
    if sign * d0 < best_v:
        best_x, best_v = y, sign * d0
    return float(best_x), float(sign * best_v)


def sup_norm(f: Field, refine: bool = True) -> float:
    if not refine:
        return float(np.max(np.abs(f.values)))
    return max(abs(extremum(f, "min")[1]), abs(extremum(f, "max")[1]))
