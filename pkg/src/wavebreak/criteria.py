"""Explicit wave-breaking criteria and blow-up time bounds.

The general criterion works from the sup-norm estimate constants of the
operator (:class:`~wavebreak.operators.OperatorParams`); the model-specific
criteria are its closed-form specializations.  Every evaluator returns a
:class:`CriterionReport`.

Two numbers are reported for each criterion:

``rhs``
    the right-hand side exactly as the criterion is stated (for the general
    criterion it depends on the data through the shape ratio ``gamma_u``);
``threshold``
    the critical slope: the value of ``-inf u'`` at which the criterion turns
    into an equality when ``|u'|_inf`` and the L2 norms of higher derivatives
    are held fixed.  For the model-specific criteria ``threshold == rhs``.

``holds`` is equivalent to ``lhs > rhs`` and to ``lhs > threshold``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from .cgn import estimate_cgn
from .operators import ModelSpec, OperatorParams, UnsupportedCase, a2_params
from .special import gamma_fn
from .spectral import Field, derivative, extremum, l2_squared

__all__ = [
    "CriterionConstants",
    "CriterionRangeError",
    "CriterionReport",
    "Exponents",
    "NotApplicable",
    "SlopeData",
    "beta1",
    "beta2",
    "constants",
    "critical_amplitude",
    "estimate_cgn",
    "evaluate",
    "exponents",
    "fkdv_constant",
    "fkdv_criterion",
    "fw_criterion",
    "gamma_fn",
    "interval",
    "l1_criterion",
    "select_theta",
    "slope_data",
    "theorem_criterion",
    "theta_ceiling",
    "whitham_criterion",
]


class NotApplicable(ValueError):
    """The data has no negative slope, so no criterion can hold."""


class CriterionRangeError(ValueError):
    """A parameter (theta, alpha, s, tau) is outside its admissible range."""


@dataclass(frozen=True)
class Exponents:
    abar2: float | None
    abar3: float | None
    theta0: float
    l1: bool = False


@dataclass(frozen=True)
class CriterionConstants:
    c2: float
    c3: float
    c_gn: float


@dataclass(frozen=True)
class SlopeData:
    """The norms of the initial data that enter the criteria."""

    lhs: float  # -inf u'
    sup_slope: float  # |u'|_inf
    d2_l2: float  # |u''|_L2
    d3_l2: float  # |u'''|_L2

    @property
    def gamma(self) -> float:
        return self.lhs / self.sup_slope if self.sup_slope > 0 else 0.0

    def scaled(self, a: float) -> "SlopeData":
        return SlopeData(a * self.lhs, a * self.sup_slope, a * self.d2_l2, a * self.d3_l2)


@dataclass
class CriterionReport:
    lhs: float
    rhs: float
    gamma_u: float
    theta: float
    theta0: float
    holds: bool
    t_lo: float
    t_hi: float
    case_label: str
    c_gn: float | None
    threshold: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        return _finite(d)


def _finite(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    return obj


def slope_data(ubar) -> SlopeData:
    """Slope and derivative norms of a field (extrema refined off-grid)."""
    if isinstance(ubar, SlopeData):
        return ubar
    if not isinstance(ubar, Field):
        raise TypeError("expected a Field or SlopeData")
    du = derivative(ubar, 1)
    lo = extremum(du, "min")[1]
    hi = extremum(du, "max")[1]
    return SlopeData(
        lhs=-lo,
        sup_slope=max(abs(lo), abs(hi)),
        d2_l2=math.sqrt(l2_squared(derivative(ubar, 2))),
        d3_l2=math.sqrt(l2_squared(derivative(ubar, 3))),
    )


def interval(m0: float, theta: float) -> tuple[float, float]:
    """Bounds ``1/((1+theta) m0) <= T* <= 1/((1-theta) m0)``."""
    if not m0 > 0:
        raise ValueError(f"m0 must be positive, got {m0}")
    hi = math.inf if theta >= 1.0 else 1.0 / ((1.0 - theta) * m0)
    return 1.0 / ((1.0 + theta) * m0), hi


# -- general criterion ---------------------------------------------------------------

def exponents(params: OperatorParams) -> Exponents:
    if params.is_l1:
        return Exponents(None, None, 1.0, l1=True)
    a1, a2, a3 = params.a1, params.a2, params.a3
    abar2 = abar3 = None
    caps = []
    if params.lam2 > 0:
        abar2 = a1 / (2.0 * a1 + a2)
        caps.append((2.0 * a2 - a1) / (4.0 * a1 + 2.0 * a2))
    if params.lam3 > 0:
        abar3 = 2.0 * a1 / (5.0 * a1 + 3.0 * a3)
        caps.append((3.0 * a3 - 2.0 * a1) / (5.0 * a1 + 3.0 * a3))
    return Exponents(abar2, abar3, min(caps) if caps else 1.0)


def constants(params: OperatorParams, exps: Exponents, c_gn: float) -> CriterionConstants:
    if not c_gn > 0:
        raise ValueError(f"c_gn must be positive, got {c_gn}")
    c2 = c3 = 0.0
    if exps.abar2 is not None:
        b = exps.abar2
        c2 = 3.0 ** (1 - b) * params.lam1 ** (1 - 2 * b) * params.lam2 ** b
    if exps.abar3 is not None:
        b = exps.abar3
        c3 = 3.0 ** (1 - b) * params.lam1 ** ((2 - 5 * b) / 2) * (c_gn * params.lam3) ** (1.5 * b)
    return CriterionConstants(c2, c3, c_gn)


def _report(data: SlopeData, rhs, threshold, theta, theta0, label, c_gn, details=None):
    if not data.lhs > 0:
        raise NotApplicable(f"initial data has no negative slope (inf u' = {-data.lhs:g})")
    gamma = data.gamma
    holds = bool(data.lhs > rhs and 0 < theta <= theta0 and gamma > 0)
    t_lo, t_hi = interval(data.lhs, theta)
    return CriterionReport(
        lhs=data.lhs, rhs=float(rhs), gamma_u=gamma, theta=float(theta), theta0=float(theta0),
        holds=holds, t_lo=t_lo, t_hi=t_hi, case_label=label, c_gn=c_gn,
        threshold=float(threshold), details=details or {},
    )


def theorem_criterion(ubar, theta: float, params: OperatorParams,
                      consts: CriterionConstants | None = None, exps: Exponents | None = None,
                      c_gn: float | None = None, label: str = "theorem") -> CriterionReport:
    """General criterion built from the operator's sup-norm estimate constants."""
    data = slope_data(ubar)
    if params.is_l1:
        return l1_criterion(data, theta, params.lam1, label="l1")
    if not params.applicable:
        raise CriterionRangeError(
            f"estimate exponents violate a1 < min(2 a2, 3 a3 / 2): {params}")
    exps = exps or exponents(params)
    if consts is None:
        if c_gn is None:
            raise ValueError("pass either consts or c_gn")
        consts = constants(params, exps, c_gn)
    if not 0 < theta <= exps.theta0:
        raise CriterionRangeError(f"theta = {theta} outside (0, theta0] with theta0 = {exps.theta0}")
    if not data.lhs > 0:
        raise NotApplicable(f"initial data has no negative slope (inf u' = {-data.lhs:g})")

    def first(gamma):
        if params.lam1 == 0 or math.isinf(params.eta0):
            return 0.0
        return 3.0 * params.lam1 / (theta * gamma * params.eta0 ** params.a1)

    def second(gamma):
        out = 0.0
        if consts.c2:
            b = exps.abar2
            out += consts.c2 / (theta ** (1 - b) * gamma ** (1 - 2 * b)) * data.d2_l2 ** b
        if consts.c3:
            b = exps.abar3
            out += consts.c3 / (theta ** (1 - b) * gamma ** (1 - 2 * b)) * data.d3_l2 ** b
        return out

    rhs = max(first(data.gamma), second(data.gamma))
    threshold = max(_fixed_point(first, data.sup_slope), _fixed_point(second, data.sup_slope))
    details = {"C2": consts.c2, "C3": consts.c3, "abar2": exps.abar2, "abar3": exps.abar3,
               "params": asdict(params)}
    return _report(data, rhs, threshold, theta, exps.theta0, label, consts.c_gn, details)


def _fixed_point(branch, sup_slope: float) -> float:
    """Solve ``l = branch(l / sup_slope)``; ``branch`` is decreasing in gamma."""
    if branch(1.0) == 0.0:
        return 0.0

    def f(logl):
        l = math.exp(logl)
        return logl - math.log(branch(l / sup_slope))

    lo, hi = math.log(sup_slope) - 1.0, math.log(sup_slope) + 1.0
    while f(lo) > 0:
        lo -= 2.0 * (hi - lo)
    while f(hi) < 0:
        hi += 2.0 * (hi - lo)
    return math.exp(optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))


def l1_criterion(ubar, theta: float, lam1: float, label: str = "l1") -> CriterionReport:
    """Square-root criterion for operators bounded by ``lam1`` in sup norm."""
    data = slope_data(ubar)
    if not 0 < theta <= 1:
        raise CriterionRangeError(f"theta = {theta} outside (0, 1)")
    threshold = math.sqrt(3.0 * lam1 / theta) * math.sqrt(data.sup_slope)
    return _report(data, threshold, threshold, theta, 1.0, label, None, {"lambda1": lam1})


# -- model-specific criteria ----------------------------------------------------------

def fkdv_constant(alpha: float, c_gn: float) -> float:
    return (math.sqrt(3.0) * ((1.0 + alpha) / 4.0) ** (alpha / 2.0)
            * (2.0 * c_gn / abs(alpha)) ** ((1.0 + alpha) / 2.0))


def fkdv_criterion(ubar, theta: float, alpha: float, c_gn: float) -> CriterionReport:
    if not -1.0 < alpha < -0.4:
        raise CriterionRangeError(f"fractional KdV criterion needs alpha in (-1, -2/5), got {alpha}")
    cap = (-2.0 - 5.0 * alpha) / (5.0 + 2.0 * alpha)
    if not 0 < theta < cap:
        raise CriterionRangeError(f"theta = {theta} outside (0, {cap}) for alpha = {alpha}")
    data = slope_data(ubar)
    t = (fkdv_constant(alpha, c_gn) / math.sqrt(theta)
         * data.sup_slope ** (1 / 6 - alpha / 3) * data.d3_l2 ** (1 / 3 + alpha / 3))
    return _report(data, t, t, theta, cap, "fkdv", c_gn, {"alpha": alpha})


def whitham_criterion(ubar, theta: float, c_gn: float) -> CriterionReport:
    if not 0 < theta < 0.125:
        raise CriterionRangeError(f"theta = {theta} outside (0, 1/8)")
    data = slope_data(ubar)
    coef = 3 ** 0.75 * 2 ** 0.25 * c_gn ** 0.25 / (math.pi ** 0.25 * math.sqrt(theta))
    t = coef * data.sup_slope ** (1 / 3) * data.d3_l2 ** (1 / 6)
    return _report(data, t, t, theta, 0.125, "whitham", c_gn)


def beta1(s: float, c_gn: float) -> float:
    return math.sqrt(3.0 * gamma_fn(s)) * ((2.0 + 2.0 * s) / s * c_gn) ** ((1.0 - s) / 2.0)


def beta2(s: float) -> float:
    return math.sqrt(3.0 * gamma_fn(s)) * math.sqrt(2.0 ** (2 * s - 1) / (2 * s - 1) ** (1 - s))


def theta_ceiling(s: float, case: str, tau: float | None = None) -> float:
    if case == "i":
        return (5 * s - 2) / (5 - 2 * s)
    if case == "ii":
        return (3 * s - 2) / (3 - 2 * s)
    if case == "iii":
        return (3 * tau - 2) / (3 - 2 * tau)
    return 1.0


def fw_criterion(ubar, theta: float, s: float, tau: float | None = None,
                 c_gn: float | None = None) -> CriterionReport:
    """Fornberg-Whitham criterion, choosing the case from ``s``.

    For ``2/3 < s < 1`` both case (i) and case (ii) apply; the smaller
    threshold is reported and both are kept in ``details["alternatives"]``.
    """
    data = slope_data(ubar)
    if s > 1.0:
        rep = l1_criterion(data, theta, gamma_fn(s), label="fw-case-iv")
        rep.details["s"] = s
        return rep
    if s == 1.0:
        if tau is None:
            raise CriterionRangeError("s = 1 needs the auxiliary exponent tau in (2/3, 1)")
        if not 2 / 3 < tau < 1:
            raise CriterionRangeError(f"tau = {tau} outside (2/3, 1)")
        cap = theta_ceiling(1.0, "iii", tau)
        if not 0 < theta < cap:
            raise CriterionRangeError(f"theta = {theta} outside (0, {cap}) for tau = {tau}")
        coef = math.sqrt(12.0 / (math.pi * (1.0 - tau) * theta))
        t = max(coef * math.sqrt(data.sup_slope),
                coef * data.sup_slope ** (tau - 0.5) * data.d2_l2 ** (1.0 - tau))
        return _report(data, t, t, theta, cap, "fw-case-iii", c_gn, {"s": s, "tau": tau})
    if not 0.4 < s < 1.0:
        raise UnsupportedCase(f"no proved Fornberg-Whitham criterion for s = {s} (needs s > 2/5)")

    options = {}
    cap_i = theta_ceiling(s, "i")
    if 0 < theta < cap_i:
        if c_gn is None:
            raise ValueError("case (i) needs c_gn")
        options["fw-case-i"] = (beta1(s, c_gn) / math.sqrt(theta)
                                * data.sup_slope ** (1 / 6 + s / 3) * data.d3_l2 ** (1 / 3 - s / 3), cap_i)
    if s > 2 / 3:
        cap_ii = theta_ceiling(s, "ii")
        if 0 < theta < cap_ii:
            options["fw-case-ii"] = (beta2(s) / math.sqrt(theta)
                                     * data.sup_slope ** (s - 0.5) * data.d2_l2 ** (1 - s), cap_ii)
    if not options:
        caps = f"(0, {cap_i})" + (f" or (0, {theta_ceiling(s, 'ii')})" if s > 2 / 3 else "")
        raise CriterionRangeError(f"theta = {theta} outside {caps} for s = {s}")
    label = min(options, key=lambda k: options[k][0])
    t, cap = options[label]
    details = {"s": s, "alternatives": {k: v[0] for k, v in options.items()}}
    return _report(data, t, t, theta, cap, label, c_gn, details)


# -- dispatch and helpers -------------------------------------------------------------

def evaluate(model: ModelSpec, ubar, theta: float, c_gn: float | None = None,
             tau: float | None = None) -> CriterionReport:
    """Model-specific criterion for ``model`` (general one for tabulated kernels)."""
    if model.kind == "burgers":
        return l1_criterion(ubar, theta, 0.0, label="burgers")
    if model.kind == "fkdv":
        return fkdv_criterion(ubar, theta, model.alpha, c_gn)
    if model.kind == "whitham":
        return whitham_criterion(ubar, theta, c_gn)
    if model.kind == "fw":
        return fw_criterion(ubar, theta, model.s, tau=tau, c_gn=c_gn)
    return l1_criterion(ubar, theta, a2_params(model).lam1, label="odd-kernel-l1")


def max_theta(model: ModelSpec, tau: float | None = None) -> float:
    """Supremum of admissible theta for the model-specific criterion."""
    if model.kind in ("burgers", "tabulated"):
        return 1.0
    if model.kind == "fkdv":
        return (-2.0 - 5.0 * model.alpha) / (5.0 + 2.0 * model.alpha)
    if model.kind == "whitham":
        return 0.125
    s = model.s
    if s > 1:
        return 1.0
    if s == 1:
        if tau is None:
            raise CriterionRangeError("s = 1 needs tau")
        return theta_ceiling(1.0, "iii", tau)
    caps = [theta_ceiling(s, "i")]
    if s > 2 / 3:
        caps.append(theta_ceiling(s, "ii"))
    return max(caps)


def select_theta(model: ModelSpec, ubar, c_gn: float | None = None, tau: float | None = None,
                 points: int = 64) -> CriterionReport:
    """Sweep theta on a log grid below its ceiling and keep the smallest threshold."""
    top = max_theta(model, tau) * (1 - 1e-9)
    data = slope_data(ubar)
    best = None
    for theta in np.geomspace(top * 1e-3, top, points):
        try:
            rep = evaluate(model, data, float(theta), c_gn, tau)
        except CriterionRangeError:
            continue
        if best is None or rep.threshold < best.threshold:
            best = rep
    if best is None:
        raise CriterionRangeError(f"no admissible theta for {model.label}")
    return best


def critical_amplitude(model: ModelSpec, profile, theta: float, c_gn: float | None = None,
                       tau: float | None = None) -> float:
    """Smallest ``a`` such that the criterion holds for ``a * profile``.

    Every threshold grows sublinearly in the amplitude while ``-inf u'`` grows
    linearly, so the verdict flips exactly once.
    """
    base = slope_data(profile)

    def gap(loga):
        rep = evaluate(model, base.scaled(math.exp(loga)), theta, c_gn, tau)
        return math.log(rep.lhs) - math.log(rep.threshold) if rep.threshold > 0 else math.inf

    if math.isinf(gap(0.0)):
        return 0.0
    lo, hi = -1.0, 1.0
    while gap(lo) > 0:
        lo -= 4.0
    while gap(hi) < 0:
        hi += 4.0
    return math.exp(optimize.brentq(gap, lo, hi, xtol=1e-14))
