import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import dblquad

from cavitydet import quad
from cavitydet.errors import ConfigError
from cavitydet.profiles import GaussianSwitching, SuddenSwitching


def _sudden_ordered(T, a, b):
    """Analytic simplex integral over 0 < t_b < t_a < T of exp(i a t_a + i b t_b)."""
    return (np.exp(1j * a * T) * (np.exp(1j * b * T) - 1) / (1j * b)
            - (np.exp(1j * (a + b) * T) - 1) / (1j * (a + b))) / (1j * a)


@given(st.floats(0.3, 3.0), st.floats(-6, 6).filter(lambda x: abs(x) > 0.1),
       st.floats(-6, 6).filter(lambda x: abs(x) > 0.1))
def test_sudden_ordered_against_analytic(T, a, b):
    if abs(a + b) < 0.1:
        return
    sw = SuddenSwitching(T, 0.0)
    assert np.isclose(quad.ordered(sw, sw, a, b), _sudden_ordered(T, a, b), atol=1e-11, rtol=1e-10)


@given(st.floats(0.3, 2.0), st.floats(-8, 8), st.floats(-8, 8))
def test_gaussian_closed_form_against_gl(T, a, b):
    sw = GaussianSwitching(T)
    exact = quad.ordered(sw, sw, a, b, method="exact")
    gl = quad.ordered(sw, sw, a, b, method="gl", nodes=96)
    assert abs(exact - gl) < 1e-11


def test_gaussian_closed_form_against_scipy():
    sw = GaussianSwitching(1.0)
    a, b = 2.3, -0.7
    f = lambda tb, ta: sw.chi(ta) * sw.chi(tb) * np.exp(1j * (a * ta + b * tb))
    re = dblquad(lambda tb, ta: f(tb, ta).real, -10, 10, lambda ta: -10, lambda ta: ta, epsabs=1e-13)[0]
    im = dblquad(lambda tb, ta: f(tb, ta).imag, -10, 10, lambda ta: -10, lambda ta: ta, epsabs=1e-13)[0]
    assert abs(quad.ordered_gaussian(1.0, a, b) - (re + 1j * im)) < 1e-10


def test_ordered_pair_sums_to_product():
    # ordered(a, b) + ordered(b, a) covers the full square
    sw = GaussianSwitching(0.8)
    a, b = 1.1, 2.5
    full = quad.single(sw, a) * quad.single(sw, b)
    assert np.isclose(quad.ordered(sw, sw, a, b) + quad.ordered(sw, sw, b, a), full, atol=1e-13)
    sw2 = SuddenSwitching(1.0)
    full = quad.single(sw2, a) * quad.single(sw2, b)
    assert np.isclose(quad.ordered(sw2, sw2, a, b) + quad.ordered(sw2, sw2, b, a), full, atol=1e-12)


def test_single_gl_matches_exact():
    for sw in (GaussianSwitching(0.7), SuddenSwitching(1.2, -0.3)):
        nu = np.array([0.0, 1.0, -5.0, 30.0])
        assert np.allclose(quad.single(sw, nu, "gl"), quad.single(sw, nu), atol=1e-11)


def test_vectorized_and_errors():
    sw = GaussianSwitching(1.0)
    out = quad.ordered(sw, sw, np.ones((2, 3)), np.zeros((2, 3)), method="gl")
    assert out.shape == (2, 3)
    with pytest.raises(ConfigError):
        quad.ordered(sw, sw, 1.0, 1.0, method="simpson")
    with pytest.raises(ConfigError):
        quad.ordered(SuddenSwitching(1.0), SuddenSwitching(1.0), 1.0, 1.0, method="exact")
    assert quad.auto_nodes(1000.0, 10.0) == 5040
