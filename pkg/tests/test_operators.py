import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, special

from wavebreak.operators import (
    ModelSpec,
    OperatorParams,
    UnsupportedCase,
    a2_params,
    apply_N,
    bessel_kernel,
    fractional_pv,
    grid_multiplier,
    multiplier,
    pv_constant,
    verify_A1,
    whitham_kernel,
)
from wavebreak.special import gamma_fn
from wavebreak.spectral import Field, GridSpec, interpolate, interpolate_value

MODELS = [ModelSpec.fkdv(-0.5), ModelSpec.whitham(), ModelSpec.whitham("reversed"),
          ModelSpec.fornberg_whitham(0.8), ModelSpec.fornberg_whitham(2.0)]


def bessel_closed_form(s, x):
    nu = (s - 1) / 2
    x = abs(x)
    return (x / 2) ** nu * special.kv(nu, x) / (math.sqrt(math.pi) * math.gamma(s / 2))


def whitham_oracle(x):
    f = lambda k: mpmath.cos(x * k) * mpmath.sqrt(mpmath.tanh(k) / k)  # noqa: E731
    return float(mpmath.quadosc(f, [0, mpmath.inf], omega=x) / mpmath.pi)


def test_model_validation():
    with pytest.raises(ValueError):
        ModelSpec("kdv")
    with pytest.raises(ValueError):
        ModelSpec.fkdv(0.5)
    with pytest.raises(ValueError):
        ModelSpec.fornberg_whitham(-1.0)
    with pytest.raises(ValueError):
        ModelSpec.whitham("section2")


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.label)
def test_multiplier_is_odd_and_imaginary(model):
    xi = np.linspace(-30, 30, 241)
    m = multiplier(model, xi)
    assert np.all(m.real == 0)
    assert np.allclose(m, -m[::-1], atol=1e-15)
    assert multiplier(model, 0.0) == 0


def test_sign_conventions():
    xi = np.array([0.5, 2.0])
    assert np.allclose(multiplier(ModelSpec.whitham(), xi), -multiplier(ModelSpec.whitham("reversed"), xi))
    fw = ModelSpec.fornberg_whitham(0.8)
    assert np.allclose(multiplier(fw, xi).imag, xi * (1 + xi ** 2) ** -0.4)


def test_grid_multiplier_read_only(box):
    m = grid_multiplier(ModelSpec.whitham(), box)
    assert m[box.n // 2] == 0
    with pytest.raises(ValueError):
        m[0] = 1.0


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.label)
def test_A1_on_gaussian(model, box):
    g = Field.from_function(box, lambda x: np.exp(-(x - 0.3) ** 2) * np.cos(1.3 * x))
    res = verify_A1(model, g)
    assert res["commute_error"] <= 1e-10
    assert res["orthogonality_error"] <= 1e-13


def test_burgers_operator_vanishes(box):
    g = Field.from_function(box, lambda x: np.exp(-x ** 2))
    assert np.all(apply_N(ModelSpec.burgers(), g).values == 0)


@pytest.mark.parametrize("x", [0.05, 0.3, 1.0, 2.5, 6.0])
def test_whitham_kernel_against_oscillatory_quadrature(x):
    assert whitham_kernel(x) == pytest.approx(whitham_oracle(x), rel=1e-9, abs=1e-14)


def test_whitham_kernel_bound_and_domain():
    xs = np.geomspace(0.01, 10, 15)
    k = whitham_kernel(xs)
    assert np.all(np.sqrt(2 * np.pi * xs) * k <= 1 + 1e-6)
    assert np.all(np.diff(k) < 0)
    with pytest.raises(ValueError):
        whitham_kernel(0.0)


def test_whitham_convolution_matches_multiplier(box):
    # N g = -K * g' by real-space quadrature (y = w^2 removes the y^-1/2 singularity)
    g = Field.from_function(box, lambda x: np.exp(-x ** 2))
    x0 = 0.4
    dg = lambda z: -2 * z * np.exp(-z ** 2)  # noqa: E731
    f = lambda w: 2 * w * whitham_kernel(w * w) * (dg(x0 - w * w) + dg(x0 + w * w))  # noqa: E731
    conv, _ = integrate.quad(f, 1e-9, 4.0, limit=200, epsabs=1e-12)
    assert interpolate_value(apply_N(ModelSpec.whitham(), g), x0) == pytest.approx(-conv, abs=1e-8)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.9, 1.0, 1.5, 3.0])
@pytest.mark.parametrize("x", [0.01, 0.2, 1.0, 4.0, 12.0])
def test_bessel_kernel_closed_form(s, x):
    assert bessel_kernel(s, x) == pytest.approx(bessel_closed_form(s, x), rel=1e-10)


def test_bessel_kernel_special_values():
    assert bessel_kernel(3.0, 0.0) == pytest.approx(gamma_fn(3.0) / 2, rel=1e-15)
    with pytest.raises(ValueError):
        bessel_kernel(0.8, 0.0)
    with pytest.raises(ValueError):
        bessel_kernel(0.0, 1.0)


@pytest.mark.parametrize("s", [0.5, 1.5, 3.0])
def test_bessel_kernel_unit_mass(s):
    val, _ = integrate.quad(lambda x: bessel_kernel(s, x), 0, np.inf, limit=200)
    assert 2 * val == pytest.approx(1.0, rel=1e-8)


def test_pv_constant_closed_form():
    # alpha = -1/2: 2 Gamma(-1/2) sin(-pi/4) = 2 sqrt(2 pi)
    assert pv_constant(-0.5) == pytest.approx(2 * math.sqrt(2 * math.pi), rel=1e-14)


@pytest.mark.parametrize("alpha", [-0.45, -0.6, -0.9])
def test_fractional_pv_matches_multiplier(alpha):
    grid = GridSpec(20.0, 512)
    g = Field.from_function(grid, lambda x: np.exp(-x ** 2))
    spec = apply_N(ModelSpec.fkdv(alpha), g)
    real = fractional_pv(g, alpha=alpha)
    assert np.max(np.abs(real - spec.values)) <= 1e-9
    pts = np.array([-0.7, 0.123])
    assert np.allclose(fractional_pv(g, pts, alpha=alpha), interpolate(spec, pts)[0], atol=1e-9)
    raw = fractional_pv(g, pts, alpha=alpha, normalized=False)
    assert np.allclose(raw, pv_constant(alpha) * interpolate(spec, pts)[0], atol=1e-8)


def test_a2_tables():
    p = a2_params(ModelSpec.fkdv(-0.5))
    assert (p.lam1, p.lam3, p.a1, p.a3) == (8.0, 4.0, 0.5, 0.5)
    w = a2_params(ModelSpec.whitham())
    assert w.lam1 == pytest.approx(math.sqrt(2 / math.pi)) and w.lam3 == pytest.approx(3 * math.sqrt(2 / math.pi))
    i = a2_params(ModelSpec.fornberg_whitham(0.8), "i")
    assert i.a1 == pytest.approx(0.2) and i.a3 == 0.8
    assert i.lam1 == pytest.approx(2 ** 0.2 * gamma_fn(0.8))
    ii = a2_params(ModelSpec.fornberg_whitham(0.8), "ii")
    assert ii.lam2 == pytest.approx(2 ** -0.3 * gamma_fn(0.8) / math.sqrt(0.6))
    iii = a2_params(ModelSpec.fornberg_whitham(1.0), tau=0.8)
    assert iii.eta0 == 1.0 and iii.lam1 == iii.lam2 == pytest.approx(4 / (math.pi * 0.2))
    iv = a2_params(ModelSpec.fornberg_whitham(2.0))
    assert iv.is_l1 and iv.lam1 == pytest.approx(1.0)
    assert a2_params(ModelSpec.burgers()).lam1 == 0


def test_a2_unsupported_cases():
    with pytest.raises(UnsupportedCase):
        a2_params(ModelSpec.fornberg_whitham(0.3))
    with pytest.raises(UnsupportedCase):
        a2_params(ModelSpec.fornberg_whitham(0.6), "ii")
    with pytest.raises(UnsupportedCase):
        a2_params(ModelSpec.fornberg_whitham(1.0))
    with pytest.raises(UnsupportedCase):
        a2_params(ModelSpec.fornberg_whitham(1.0), tau=0.5)


def test_tabulated_kernel_l1_and_transform():
    x = np.linspace(-8, 8, 1601)
    k = x * np.exp(-x ** 2)
    model = ModelSpec.tabulated(x, k)
    assert a2_params(model).lam1 == pytest.approx(1.0, rel=1e-4)  # int |x| e^{-x^2} = 1; trapezoid across the kink at 0
    xi = np.array([0.5, 1.7])
    # transform of x e^{-x^2}: -i sqrt(pi) xi/2 e^{-xi^2/4}
    exact = -0.5j * math.sqrt(math.pi) * xi * np.exp(-xi ** 2 / 4)
    assert np.allclose(multiplier(model, xi), exact, atol=1e-10)


def test_params_bound_and_applicability():
    p = OperatorParams(1.0, 0.0, 2.0, 0.5, 0.0, 0.5)
    assert p.applicable
    assert p.bound(1.0, 1.0, 5.0, 1.0) == pytest.approx(3.0)
    assert not OperatorParams(1.0, 0.0, 1.0, 1.0, 0.0, 0.5).applicable
