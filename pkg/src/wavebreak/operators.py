"""The nonlocal source operators N of the perturbed Burgers family.

Every model is a Fourier multiplier on the periodic grid.  Real-space
evaluators (Whitham and Bessel kernels, the fractional principal-value
integral) are kept alongside so the multiplier path can be cross-checked and
the kernel bounds used by the criteria can be verified numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .special import bessel_normalization, gamma_fn
from .spectral import Field, GridSpec, derivative, interpolate

KINDS = ("burgers", "fkdv", "whitham", "fw", "tabulated")
SIGNS = ("standard", "reversed")


class UnsupportedCase(ValueError):
    """The requested model/parameter combination has no proved estimate."""


@dataclass(frozen=True)
class ModelSpec:
    """Which equation to solve.

    ``sign`` chooses between the two sign conventions in circulation for the
    Whitham and Fornberg-Whitham operators: ``"standard"`` gives
    ``N = -K * u_x`` (Whitham) and ``N = +G_s * u_x`` (Fornberg-Whitham);
    ``"reversed"`` flips both.  Burgers, fractional KdV and tabulated kernels
    ignore it.
    """

    kind: str
    alpha: float | None = None
    s: float | None = None
    kernel_x: tuple = field(default=(), repr=False)
    kernel_values: tuple = field(default=(), repr=False)
    sign: str = "standard"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if self.sign not in SIGNS:
            raise ValueError(f"sign must be one of {SIGNS}, got {self.sign!r}")
        if self.kind == "fkdv":
            if self.alpha is None or not -1.0 < self.alpha < 0.0:
                raise ValueError(f"fractional KdV needs alpha in (-1, 0), got {self.alpha}")
        if self.kind == "fw":
            if self.s is None or not self.s > 0.0:
                raise ValueError(f"Fornberg-Whitham needs s > 0, got {self.s}")
        if self.kind == "tabulated":
            x = np.asarray(self.kernel_x, dtype=float)
            k = np.asarray(self.kernel_values, dtype=float)
            if x.size < 3 or x.shape != k.shape:
                raise ValueError("tabulated kernel needs matching x and K samples")
            if np.any(np.diff(x) <= 0):
                raise ValueError("kernel abscissae must be strictly increasing")
            scale = max(np.max(np.abs(k)), 1e-300)
            if not (np.allclose(x, -x[::-1], rtol=0, atol=1e-12 * np.max(np.abs(x)))
                    and np.allclose(k, -k[::-1], rtol=0, atol=1e-12 * scale)):
                raise ValueError("tabulated kernel must be odd: K(-x) = -K(x) on a symmetric grid")

    # constructors -----------------------------------------------------------
    @classmethod
    def burgers(cls):
        return cls("burgers")

    @classmethod
    def fkdv(cls, alpha):
        return cls("fkdv", alpha=float(alpha))

    @classmethod
    def whitham(cls, sign="standard"):
        return cls("whitham", sign=sign)

    @classmethod
    def fornberg_whitham(cls, s, sign="standard"):
        return cls("fw", s=float(s), sign=sign)

    @classmethod
    def tabulated(cls, x, values):
        return cls("tabulated", kernel_x=tuple(map(float, x)), kernel_values=tuple(map(float, values)))

    @property
    def label(self) -> str:
        if self.kind == "fkdv":
            return f"fkdv(alpha={self.alpha:g})"
        if self.kind == "fw":
            return f"fw(s={self.s:g})"
        return self.kind

    @property
    def sigma(self) -> float:
        """Sign in front of the convolution for Whitham / Fornberg-Whitham."""
        if self.kind == "whitham":
            return -1.0 if self.sign == "standard" else 1.0
        if self.kind == "fw":
            return 1.0 if self.sign == "standard" else -1.0
        return 1.0


@dataclass(frozen=True)
class OperatorParams:
    """Constants of the sup-norm estimate

    ``|N g|_inf <= lam1 eta^-a1 |g|_inf + lam2 eta^a2 |g'|_2 + lam3 eta^a3 |g'|_inf``

    valid for ``0 < eta < eta0``.  Absent branches have ``lam = 0``.  When both
    ``lam2`` and ``lam3`` vanish and ``a1 == 0`` the estimate is the plain
    ``|N g|_inf <= lam1 |g|_inf`` bound of an integrable kernel.
    """

    lam1: float
    lam2: float = 0.0
    lam3: float = 0.0
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    eta0: float = math.inf
    case: str = ""

    @property
    def is_l1(self) -> bool:
        return self.lam2 == 0.0 and self.lam3 == 0.0 and self.a1 == 0.0

    @property
    def applicable(self) -> bool:
        """Whether ``a1 < min(2 a2, 3 a3 / 2)`` over the present branches."""
        if self.is_l1:
            return True
        caps = []
        if self.lam2 > 0:
            caps.append(2.0 * self.a2)
        if self.lam3 > 0:
            caps.append(1.5 * self.a3)
        return self.a1 > 0 and bool(caps) and self.a1 < min(caps)

    def bound(self, eta, g_sup, dg_l2, dg_sup):
        """Right-hand side of the estimate at ``eta``."""
        eta = np.asarray(eta, dtype=float)
        out = self.lam1 * eta ** (-self.a1) * g_sup
        if self.lam2:
            out = out + self.lam2 * eta ** self.a2 * dg_l2
        if self.lam3:
            out = out + self.lam3 * eta ** self.a3 * dg_sup
        return out


# -- multipliers ---------------------------------------------------------------

def multiplier(model: ModelSpec, xi):
    """Fourier symbol of N at wavenumber(s) ``xi`` (complex, odd, imaginary)."""
    xi = np.asarray(xi, dtype=float)
    out = np.zeros(xi.shape, dtype=complex)
    nz = xi != 0.0
    x = xi[nz]
    if model.kind == "burgers":
        return out if out.ndim else complex(out)
    if model.kind == "fkdv":
        out[nz] = 1j * x * np.abs(x) ** model.alpha
    elif model.kind == "whitham":
        out[nz] = model.sigma * 1j * x * np.sqrt(np.tanh(x) / x)
    elif model.kind == "fw":
        out[nz] = model.sigma * 1j * x * (1.0 + x * x) ** (-model.s / 2.0)
    elif model.kind == "tabulated":
        out[nz] = _tabulated_transform(model, x)
    return out if out.ndim else complex(out)


def _tabulated_transform(model: ModelSpec, xi: np.ndarray) -> np.ndarray:
    # K odd: int K(x) e^{-i xi x} dx = -i int K(x) sin(xi x) dx, trapezoid rule
    x = np.asarray(model.kernel_x)
    k = np.asarray(model.kernel_values)
    w = np.empty_like(x)
    dx = np.diff(x)
    w[0], w[-1] = dx[0] / 2, dx[-1] / 2
    w[1:-1] = (dx[:-1] + dx[1:]) / 2
    return -1j * (np.sin(np.outer(xi, x)) @ (w * k))


@lru_cache(maxsize=64)
def grid_multiplier(model: ModelSpec, grid: GridSpec) -> np.ndarray:
    """Multiplier sampled on the grid, Nyquist mode zeroed (it is odd)."""
    m = multiplier(model, grid.wavenumbers)
    m[grid.n // 2] = 0.0
    m.flags.writeable = False
    return m


def apply_N(model: ModelSpec, g: Field) -> Field:
    if model.kind == "burgers":
        return Field(g.grid, np.zeros(g.grid.n))
    return Field.from_spectrum(g.grid, g.spectrum * grid_multiplier(model, g.grid))


def verify_A1(model: ModelSpec, g: Field) -> dict:
    """Commutation with d/dx and skew-symmetry residuals of N on ``g``."""
    commute = derivative(apply_N(model, g), 1) - apply_N(model, derivative(g, 1))
    ng = apply_N(model, g)
    return {
        "commute_error": float(np.max(np.abs(commute.values))),
        "orthogonality_error": float(abs(g.grid.dx * np.dot(ng.values, g.values))),
    }


# -- sup-norm estimate parameter tables -------------------------------------------------------

def a2_params(model: ModelSpec, case: str | None = None, tau: float | None = None) -> OperatorParams:
    """Proved sup-norm estimate constants for ``model``.

    Fornberg-Whitham has four regimes: ``"i"`` (2/5 < s < 1), ``"ii"``
    (2/3 < s < 1), ``"iii"`` (s = 1, auxiliary ``tau`` in (2/3, 1)) and
    ``"iv"`` (s > 1, integrable derivative kernel).
    """
    if model.kind == "burgers":
        return OperatorParams(0.0, case="burgers")
    if model.kind == "tabulated":
        x = np.asarray(model.kernel_x)
        return OperatorParams(float(integrate.trapezoid(np.abs(model.kernel_values), x)), case="tabulated")
    if model.kind == "fkdv":
        a = model.alpha
        return OperatorParams(4.0 / (1.0 + a), 0.0, 2.0 / abs(a), 1.0 + a, 0.0, -a, math.inf, "fkdv")
    if model.kind == "whitham":
        c = math.sqrt(2.0 / math.pi)
        return OperatorParams(c, 0.0, 3.0 * c, 0.5, 0.0, 0.5, math.inf, "whitham")
    return _fw_params(model.s, case, tau)


def fw_default_case(s: float) -> str:
    if 0.4 < s < 1.0:
        return "i"
    if s == 1.0:
        return "iii"
    if s > 1.0:
        return "iv"
    raise UnsupportedCase(f"Fornberg-Whitham with s = {s}: no proved estimate for s <= 2/5")


def _fw_params(s: float, case: str | None, tau: float | None) -> OperatorParams:
    case = case or fw_default_case(s)
    if case == "i":
        if not 0.4 < s < 1.0:
            raise UnsupportedCase(f"case (i) requires s in (2/5, 1), got s = {s}")
        g = gamma_fn(s)
        c = 2.0 ** (1.0 - s)
        return OperatorParams(c * g, 0.0, c * (1.0 + s) * g / s, 1.0 - s, 0.0, s, math.inf, "fw-case-i")
    if case == "ii":
        if not 2.0 / 3.0 < s < 1.0:
            raise UnsupportedCase(f"case (ii) requires s in (2/3, 1), got s = {s}")
        g = gamma_fn(s)
        lam1 = 2.0 ** (2.0 - s) * g
        lam2 = 2.0 ** (0.5 - s) * g / math.sqrt(2.0 * s - 1.0)
        return OperatorParams(lam1, lam2, 0.0, 1.0 - s, s - 0.5, 0.0, math.inf, "fw-case-ii")
    if case == "iii":
        if s != 1.0:
            raise UnsupportedCase(f"case (iii) requires s = 1, got s = {s}")
        if tau is None:
            raise UnsupportedCase("case (iii) (s = 1) requires the auxiliary exponent tau in (2/3, 1)")
        if not 2.0 / 3.0 < tau < 1.0:
            raise UnsupportedCase(f"case (iii) requires tau in (2/3, 1), got tau = {tau}")
        lam = 4.0 / (math.pi * (1.0 - tau))
        return OperatorParams(lam, lam, 0.0, 1.0 - tau, tau - 0.5, 0.0, 1.0, "fw-case-iii")
    if case == "iv":
        if not s > 1.0:
            raise UnsupportedCase(f"case (iv) requires s > 1, got s = {s}")
        return OperatorParams(gamma_fn(s), case="fw-case-iv")
    raise UnsupportedCase(f"unknown Fornberg-Whitham case {case!r}")


# -- real-space kernels ------------------------------------------------------------

def _whitham_scalar(x: float) -> float:
    # correction integral after xi = w^2: 2 int_0^W cos(x w^2) (1 - sqrt(tanh w^2)) dw;
    # the integrand is below 1e-17 beyond w^2 = 20
    def f(w):
        w2 = w * w
        return 2.0 * math.cos(x * w2) * (1.0 - math.sqrt(math.tanh(w2)))

    corr, _ = integrate.quad(f, 0.0, math.sqrt(20.0), epsabs=1e-12, epsrel=1e-12, limit=400)
    return 1.0 / math.sqrt(2.0 * math.pi * x) - corr / math.pi


def whitham_kernel(x):
    """Inverse Fourier transform of ``sqrt(tanh(xi)/xi)`` at ``x > 0``."""
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0):
        raise ValueError("whitham_kernel is evaluated for x > 0 (it is even)")
    out = np.array([_whitham_scalar(v) for v in xs.ravel()]).reshape(xs.shape)
    return float(out) if out.ndim == 0 else out


def _bessel_scalar(s: float, x: float) -> float:
    x = abs(x)
    if x == 0.0:
        if s <= 1.0:
            raise ValueError(f"G_s(0) diverges for s <= 1 (s = {s})")
        return gamma_fn(s) / 2.0
    nu = (s - 1.0) / 2.0
    x2 = x * x / 4.0

    def g(tau):
        return nu * tau - x2 * np.exp(-tau) - np.exp(tau)

    # peak of the log-integrand in tau = log t
    e_star = (nu + math.sqrt(nu * nu + 4.0 * x2)) / 2.0
    t_star = math.log(e_star)
    g_star = float(g(t_star))
    drop = 40.0  # e^-40 ~ 4e-18 relative to the peak
    lo = hi = t_star
    step = 1.0
    while g(lo) > g_star - drop:
        lo -= step
        step *= 1.5
    step = 1.0
    while g(hi) > g_star - drop:
        hi += step
        step *= 1.5
    h = 0.25
    prev = None
    while True:
        tau = np.arange(lo, hi + 0.5 * h, h)
        total = h * np.sum(np.exp(g(tau) - g_star))
        if prev is not None and abs(total - prev) <= 1e-13 * total:
            break
        if h < 1.0 / 4096:
            break
        prev = total
        h /= 2.0
    return bessel_normalization(s) * math.exp(g_star) * total


def bessel_kernel(s: float, x):
    """Bessel potential kernel ``G_s(x)``: the transform of ``(1+xi^2)^(-s/2)``."""
    if not s > 0:
        raise ValueError(f"Bessel kernel needs s > 0, got {s}")
    xs = np.asarray(x, dtype=float)
    out = np.array([_bessel_scalar(float(s), v) for v in xs.ravel()]).reshape(xs.shape)
    return float(out) if out.ndim == 0 else out


# -- real-space fractional operator ----------------------------------------------

def _pv_rule(grid: GridSpec, alpha: float, eta: float, near_nodes: int, per_panel: int):
    beta = 2.0 + alpha
    period = grid.length
    # inner part: Gauss-Jacobi with weight y^(1-beta) on [0, eta]
    u, w = special.roots_jacobi(near_nodes, 0.0, 1.0 - beta)
    y_in = eta * (1.0 + u) / 2.0
    w_in = w * (eta / 2.0) ** (2.0 - beta)
    # outer part: one period with the lattice-summed kernel (Hurwitz zeta)
    panels = max(32, grid.n)
    gl_u, gl_w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(eta, eta + period, panels + 1)
    mid = (edges[1:] + edges[:-1]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    y_out = (mid[:, None] + half[:, None] * gl_u[None, :]).ravel()
    w_out = (half[:, None] * gl_w[None, :]).ravel()
    w_out = w_out * period ** (-beta) * special.zeta(beta, y_out / period)
    return beta, y_in, w_in, y_out, w_out


def pv_constant(alpha: float) -> float:
    """Ratio between the singular integral and the multiplier ``i xi |xi|^alpha``.

    ``int sgn(y)|y|^-(2+alpha) (1 - e^{-i xi y}) dy = c(alpha) i xi |xi|^alpha``
    with ``c(alpha) = 2 Gamma(-1-alpha) sin(pi (-1-alpha) / 2)``; it lies in
    ``(pi, inf)`` for ``alpha`` in ``(-1, 0)``.
    """
    return 2.0 * math.gamma(-1.0 - alpha) * math.sin(math.pi * (-1.0 - alpha) / 2.0)


def fractional_pv(g: Field, x=None, alpha: float = -0.5, eta: float | None = None,
                  near_nodes: int = 48, per_panel: int = 10, normalized: bool = True):
    """Real-space evaluation of ``int sgn(y)|y|^-(2+alpha) [g(x) - g(x-y)] dy``.

    ``g`` is taken as its periodic trigonometric interpolant, so the integral
    over the whole line is folded onto one period with the kernel summed over
    all periodic images.  Near ``y = 0`` the first-order Taylor term is
    integrated analytically and the remainder by Gauss-Jacobi quadrature.
    ``x=None`` evaluates at every grid point.

    With ``normalized=True`` the integral is divided by :func:`pv_constant`, so
    the result is ``|D|^alpha g'`` and matches ``apply_N`` for fractional KdV.
    """
    if not -1.0 < alpha < 0.0:
        raise ValueError(f"alpha must lie in (-1, 0), got {alpha}")
    grid = g.grid
    if eta is None:
        eta = min(1.0, grid.half_width / 4.0)
    beta, y_in, w_in, y_out, w_out = _pv_rule(grid, alpha, eta, near_nodes, per_panel)
    scale = 1.0 / pv_constant(alpha) if normalized else 1.0
    if x is None:
        return scale * _pv_on_grid(g, beta, eta, y_in, w_in, y_out, w_out)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.size)
    for i, x0 in enumerate(xs):
        dg0 = interpolate(g, [x0], (1,))[0, 0]
        p_in = interpolate(g, x0 + y_in)[0] - interpolate(g, x0 - y_in)[0]
        inner = np.dot(w_in, (p_in - 2.0 * dg0 * y_in) / y_in)
        inner += 2.0 * dg0 * eta ** (2.0 - beta) / (2.0 - beta)
        p_out = interpolate(g, x0 + y_out)[0] - interpolate(g, x0 - y_out)[0]
        out[i] = inner + np.dot(w_out, p_out)
    out *= scale
    return float(out[0]) if np.ndim(x) == 0 else out


def _pv_on_grid(g, beta, eta, y_in, w_in, y_out, w_out):
    # shifted copies g(x_j +- y) for all grid points at once via phase shifts
    grid = g.grid
    ghat = g.spectrum.copy()
    ghat[grid.n // 2] = 0.0
    k = grid.wavenumbers
    dg = derivative(g, 1).values

    def diff(y):
        # g(x+y) - g(x-y) = ifft(ghat * 2i sin(k y))
        return np.fft.ifft(ghat[None, :] * (2j * np.sin(np.outer(y, k))), axis=1).real

    total = 2.0 * dg * eta ** (2.0 - beta) / (2.0 - beta)
    p = diff(y_in)
    total += w_in @ ((p - 2.0 * dg[None, :] * y_in[:, None]) / y_in[:, None])
    for start in range(0, y_out.size, 256):
        sl = slice(start, start + 256)
        total += w_out[sl] @ diff(y_out[sl])
    return total
