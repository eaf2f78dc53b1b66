import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavebreak import evolution as E
from wavebreak.operators import ModelSpec, apply_N
from wavebreak.spectral import Field, GridSpec, dealias, derivative

PERIODIC = GridSpec(math.pi, 256)
MODELS = [ModelSpec.burgers(), ModelSpec.whitham(), ModelSpec.fkdv(-0.5), ModelSpec.fornberg_whitham(0.8)]


def sine_run(a=1.0, n=256):
    cfg = E.SimConfig(ModelSpec.burgers(), GridSpec(math.pi, n), E.InitialData("sine", a))
    return E.run(cfg)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.label)
def test_rhs_of_zero_is_zero(box, model):
    assert np.all(E.rhs(Field(box, np.zeros(box.n)), model).values == 0)


def test_rhs_single_mode_burgers():
    u = Field.from_function(PERIODIC, np.sin)
    r = E.rhs(u, ModelSpec.burgers())
    assert np.max(np.abs(r.values + np.sin(PERIODIC.x) * np.cos(PERIODIC.x))) < 1e-13


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.label)
def test_rhs_is_orthogonal_to_u(box, model):
    u = dealias(Field.from_function(box, lambda x: -x * np.exp(-x ** 2 / 2) + 0.3 * np.exp(-(x - 1) ** 2)))
    r = E.rhs(u, model)
    scale = np.sqrt(np.sum(u.values ** 2) * np.sum(r.values ** 2))
    assert abs(np.sum(u.values * r.values)) / scale < 1e-12


def test_zero_step_is_identity(box):
    u = Field.from_function(box, lambda x: np.exp(-x ** 2))
    assert E.step(u, 0.0, ModelSpec.whitham()) is u


def test_fourth_order_convergence():
    model = ModelSpec.whitham()
    grid = GridSpec(math.pi, 128)
    u0 = dealias(Field.from_function(grid, lambda x: 0.5 * np.sin(x)))

    def integrate(nsteps):
        u = u0
        for _ in range(nsteps):
            u = E.step(u, 0.4 / nsteps, model)
        return u.values

    ref = integrate(256)
    errs = [np.max(np.abs(integrate(n) - ref)) for n in (8, 16, 32)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.7)


def test_linear_part_is_exact(box):
    model = ModelSpec.whitham()
    u = dealias(Field.from_function(box, lambda x: np.exp(-x ** 2)))
    out = E.step(u, 0.7, model, nonlinear=False)
    from wavebreak.operators import grid_multiplier
    exact = Field.from_spectrum(box, u.spectrum * np.exp(np.asarray(grid_multiplier(model, box)) * 0.7))
    assert np.max(np.abs(out.values - exact.values)) < 1e-13


def test_burgers_sine_breaks_at_one():
    trace, est = sine_run(n=256)
    assert est.valid and abs(est.t_star_est - 1.0) < 0.02
    assert est.fit_slope == pytest.approx(-1.0, abs=0.05)


def test_doubling_amplitude_halves_tstar():
    _, e1 = sine_run(1.0)
    _, e2 = sine_run(2.0)
    assert e2.t_star_est == pytest.approx(e1.t_star_est / 2, rel=0.01)


def test_estimate_exact_line():
    t = np.linspace(0, 0.9, 50)
    est = E.estimate_tstar((t, 1 / (1 - t)), 20)
    assert est.valid and est.t_star_est == pytest.approx(1.0, rel=1e-12)
    assert est.fit_slope == pytest.approx(-1.0, rel=1e-12) and est.fit_quality == pytest.approx(1.0)


def test_estimate_upper_envelope_for_concave_data():
    # 1/m concave in t: the chord extrapolation overshoots the true root
    t = np.linspace(0, 0.95, 100)
    est = E.estimate_tstar((t, 1 / (1 - t ** 2)), 20)
    assert est.t_star_est >= 1.0


def test_estimate_noisy():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 0.8, 60)
    m = 1 / (1 - t) * (1 + 0.01 * rng.standard_normal(t.size))
    m = np.maximum.accumulate(m) + np.arange(t.size) * 1e-9
    est = E.estimate_tstar((t, m), 20)
    assert abs(est.t_star_est - 1.0) < 0.02


def test_estimate_rejects_short_and_flat():
    assert not E.estimate_tstar((np.arange(5.0), np.arange(1.0, 6.0)), 20).valid
    t = np.linspace(0, 1, 30)
    assert not E.estimate_tstar((t, np.ones_like(t)), 20).valid


def test_characteristics_riccati_burgers():
    # Burgers: v = -u'(beta) / (1 + u'(beta) t) exactly along characteristics
    grid = GridSpec(math.pi, 512)
    cfg = E.SimConfig(ModelSpec.burgers(), grid, E.InitialData("sine", 1.0), m_cap_factor=5)
    beta = np.array([0.0, 0.3, -0.4, 1.0])
    ch = E.track_characteristics(cfg, beta)
    d0 = -np.cos(beta)
    exact = -d0[None, :] / (1 + d0[None, :] * ch.t[:, None])
    assert np.max(np.abs(ch.v - exact) / np.abs(exact).max()) < 1e-8
    # xi(t) = beta + u0(beta) t
    assert np.max(np.abs(ch.xi - (beta - np.sin(beta) * ch.t[:, None]))) < 1e-8


def test_characteristic_at_extremum_tracks_m():
    grid = GridSpec(math.pi, 512)
    cfg = E.SimConfig(ModelSpec.burgers(), grid, E.InitialData("sine", 1.0), m_cap_factor=5)
    trace, _ = E._integrate(cfg)[:2]
    ch = E.track_characteristics(cfg, [0.0])
    assert np.max(np.abs(ch.v[:, 0] - trace["m"]) / trace["m"]) < 1e-6


def test_whitham_characteristic_defect(box):
    cfg = E.SimConfig(ModelSpec.whitham(), box, E.InitialData("gaussian_slope", 5.0), m_cap_factor=4)
    ch = E.track_characteristics(cfg, np.linspace(-2, 2, 7))
    t = ch.t
    dv = np.gradient(ch.v, t, axis=0, edge_order=2)
    defect = np.abs(dv - ch.v ** 2)[2:-2]
    assert np.all(defect <= ch.nux_sup[2:-2, None] * 1.02 + 1e-6)


def test_unresolved_data_rejected():
    cfg = E.SimConfig(ModelSpec.burgers(), GridSpec(40.0, 64), E.InitialData("gaussian_slope", 1.0, 0.3))
    with pytest.raises(E.UnresolvedData, match="under-resolved"):
        E.run(cfg)
    cfg = E.SimConfig(ModelSpec.burgers(), GridSpec(5.0, 512), E.InitialData("gaussian_slope", 1.0, 2.0))
    with pytest.raises(E.UnresolvedData, match="decay"):
        E.run(cfg)


def test_config_validation(box):
    m, d = ModelSpec.burgers(), E.InitialData()
    for kw in ({"cfl_number": 0}, {"cfl_number": 1.2}, {"m_cap_factor": 1}, {"fit_window": 2},
               {"max_time": 0}):
        with pytest.raises(ValueError):
            E.SimConfig(m, box, d, **kw)
    with pytest.raises(ValueError):
        E.InitialData("square")
    with pytest.raises(ValueError):
        E.InitialData(width=0)


def test_max_time_is_invalid(box):
    cfg = E.SimConfig(ModelSpec.burgers(), box, E.InitialData("gaussian_slope", 1.0), max_time=0.2)
    trace, est = E.run(cfg)
    assert est.stop_reason == "max_time" and not est.valid
    assert trace["t"][-1] == pytest.approx(0.2)


@settings(max_examples=5, deadline=None)
@given(a=st.floats(1.0, 4.0))
def test_trace_invariants(a):
    cfg = E.SimConfig(ModelSpec.whitham(), GridSpec(40.0, 1024), E.InitialData("gaussian_slope", a),
                      m_cap_factor=3)
    trace, est = E.run(cfg)
    t = trace["t"]
    assert t[0] == 0 and np.all(np.diff(t) > 0)
    assert np.all(trace["M"] >= trace["m"] * (1 - 1e-14))
    assert np.all(trace["z0"] > 0)
    # the operator conserves the L2 norm; truncation error only
    assert np.max(np.abs(trace["z0"] / trace["z0"][0] - 1)) < 1e-6
    assert set(E.TRACE_COLUMNS) <= set(trace.columns)


def test_trace_csv_roundtrip(tmp_path):
    trace, _ = sine_run()
    path = tmp_path / "t.csv"
    trace.to_csv(path)
    arr = np.genfromtxt(path, delimiter=",", names=True)
    assert list(arr.dtype.names) == list(E.TRACE_COLUMNS)
    assert np.array_equal(arr["m"], trace["m"])
