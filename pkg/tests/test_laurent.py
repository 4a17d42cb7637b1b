import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma

from alpharen.laurent import (
    LaurentFitError,
    LaurentSeries,
    fit_laurent,
    laurent_add,
    laurent_mul,
    pole_part,
    subtract_pole,
    z_circle,
)

EULER_GAMMA = 0.5772156649015329


def L(d, order=None):
    return LaurentSeries.from_dict(d, order)


def test_addition_cancels():
    assert laurent_add(L({-1: 1}), L({-1: -1, 0: 2})) == L({0: 2})


def test_product_of_inverse_powers():
    assert laurent_mul(L({-1: 1}), L({1: 1})) == L({0: 1})


def test_product_with_window():
    p = laurent_mul(L({-1: 1, 0: 1}), L({-1: 1, 0: -1}))
    assert p.to_dict() == {-2: 1, -1: 0, 0: -1}


def test_truncation_is_inherited():
    a = L({-1: 1, 0: 1}, order=1)
    b = L({0: 2, 1: 3, 2: 5})
    assert (a + b).order == 1
    assert (a * b).order == 1
    assert (a * b).to_dict() == {-1: 2, 0: 5}
    c = L({0: 2, 1: 3}, order=2)
    assert (a * c).order == 1
    assert (c * L({-1: 1})).order == 1
    with pytest.raises(KeyError):
        (c * L({-1: 1}))[1]


def test_normal_form():
    s = LaurentSeries(-3, (0, 0, 1, 2, 0))
    assert s.min_exponent == -1
    assert s.coefficients == (1, 2)
    assert LaurentSeries(2, (0, 0)).is_zero


def test_pole_part_examples():
    a = L({-2: 1, -1: 3, 0: 5, 1: 2})
    assert pole_part(a) == L({-2: 1, -1: 3, 0: 5})
    assert pole_part(L({1: 7, 2: 1})).is_zero
    assert pole_part(L({0: 4})) == L({0: 4})
    assert pole_part(L({0: 4}), "minimal").is_zero


def test_pole_part_rejects_unknown_scheme_and_short_series():
    with pytest.raises(ValueError):
        pole_part(L({0: 1}), "msbar")
    with pytest.raises(LaurentFitError):
        pole_part(L({-1: 1}, order=0))


series = st.dictionaries(
    st.integers(-4, 4), st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), max_size=6
).map(L)


@given(series, st.sampled_from(["paper", "minimal"]))
def test_projector_laws(a, scheme):
    T = pole_part(a, scheme)
    assert pole_part(T, scheme) == T
    r = subtract_pole(a, scheme)
    assert subtract_pole(r, scheme) == r
    assert (T + r).allclose(a, 1e-9)


def test_fit_inverse_z():
    zs = z_circle(0.1, 16)
    s = fit_laurent((zs, 1 / zs), (-2, 2))
    assert abs(s[-1] - 1) < 1e-12
    assert all(abs(s[k]) < 1e-12 for k in range(-2, 3) if k != -1)


def test_fit_gamma():
    zs = z_circle(0.1, 32)
    s = fit_laurent((zs, gamma(zs)), (-1, 1))
    assert abs(s[-1] - 1) < 1e-12
    assert abs(s[0] + EULER_GAMMA) < 1e-12


def test_fit_constant():
    zs = z_circle(0.1, 32)
    s = fit_laurent((zs, np.full(zs.shape, 2.5 - 1j)), (-2, 2))
    assert s.allclose(L({0: 2.5 - 1j}), 1e-13)


def test_fit_accepts_pairs():
    zs = z_circle(0.2, 8)
    s = fit_laurent([(z, z + 1 / z) for z in zs], (-2, 2))
    assert s.allclose(L({-1: 1, 1: 1}), 1e-12)


@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=5, max_size=5))
def test_fit_exact_on_laurent_polynomials(cs):
    truth = L(dict(zip(range(-2, 3), cs)))
    scale = max(1.0, max(abs(c) for c in cs))
    zs = z_circle(1.0, 32)
    assert fit_laurent((zs, truth(zs)), (-4, 4)).allclose(truth, 1e-12 * scale)
    # on a small circle the roundoff of c_k grows like rho**-k times the sample size
    rho = 0.1
    zs = z_circle(rho, 32)
    vals = truth(zs)
    s = fit_laurent((zs, vals), (-4, 4))
    for k in range(-4, 5):
        assert abs(s[k] - truth[k]) * rho**k <= 1e-12 * np.max(np.abs(vals)) + 1e-300


def test_fit_reproduces_function_on_smaller_circle():
    f = lambda z: gamma(z) * gamma(1 + z) / (1 - 2 * z)
    zs = z_circle(0.1, 32)
    s = fit_laurent((zs, f(zs)), (-2, None))
    inner = z_circle(0.05, 7)
    assert np.max(np.abs(s(inner) - f(inner))) <= max(s.residual, 1e-12) * 10


def test_fit_reports_deep_pole():
    zs = z_circle(0.1, 32)
    with pytest.raises(LaurentFitError) as exc:
        fit_laurent((zs, zs**-3), (-2, 2))
    assert exc.value.residual > 1e-8


def test_fit_rejects_bad_sampling():
    zs = z_circle(0.1, 16)
    with pytest.raises(LaurentFitError, match="circle"):
        fit_laurent((zs * np.linspace(1, 2, 16), zs), (-1, 1))
    with pytest.raises(LaurentFitError, match="resolve"):
        fit_laurent((zs[:4], zs[:4]), (-3, 3))
    with pytest.raises(LaurentFitError, match="spaced"):
        w = np.exp(1j * np.array([0, 0.1, 0.5, 2.0, 4.0]))
        fit_laurent((w, w), (-1, 1))
    with pytest.raises(LaurentFitError, match="empty"):
        fit_laurent((zs, zs), (2, 1))


def test_z_circle():
    zs = z_circle(0.3, 12)
    assert np.allclose(np.abs(zs), 0.3)
    assert not np.any(np.isclose(zs.imag, 0))
    with pytest.raises(ValueError):
        z_circle(-1, 4)
