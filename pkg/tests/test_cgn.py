import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavebreak.cgn import CGNSearch, estimate_cgn, rayleigh_quotient, sech_quotient, seed_family
from wavebreak.spectral import Field, GridSpec

GRID = GridSpec(20.0, 1024)


@pytest.fixture(scope="module")
def estimate():
    with pytest.warns(RuntimeWarning):
        return estimate_cgn(CGNSearch(iterations=60))


def test_sech_closed_form():
    f = Field.from_function(GRID, lambda x: 1 / np.cosh(x))
    assert rayleigh_quotient(f) == pytest.approx(sech_quotient(), abs=1e-6)
    assert sech_quotient() == pytest.approx(0.5 / (14 / 15) ** (1 / 3), rel=1e-15)


@settings(max_examples=20, deadline=None)
@given(amp=st.floats(0.01, 100.0), lam=st.floats(0.6, 1.8))
def test_quotient_scale_invariance(amp, lam):
    f = Field.from_function(GRID, lambda x: np.exp(-x ** 2 / 2) * (1 + 0.3 * np.sin(x)))
    g = Field.from_function(GRID, lambda x: amp * np.exp(-(x / lam) ** 2 / 2) * (1 + 0.3 * np.sin(x / lam)))
    assert abs(rayleigh_quotient(g) - rayleigh_quotient(f)) < 1e-10


def test_estimate_dominates_seeds(estimate):
    for name, v in seed_family(GRID).items():
        assert estimate.value >= rayleigh_quotient(Field(GRID, v))
    assert estimate.value >= max(estimate.seed_values.values())
    assert estimate.maximizer is not None
    assert rayleigh_quotient(estimate.maximizer) == pytest.approx(estimate.value, rel=1e-12)


def test_non_convergence_flag(estimate):
    assert not estimate.converged and estimate.warning


def test_ascent_improves_every_seed(estimate):
    for name in seed_family(GRID):
        assert estimate.seed_values[name + "*"] > estimate.seed_values[name]
