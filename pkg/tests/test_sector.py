import itertools
import math

import mpmath
import numpy as np
import pytest
from scipy.special import beta as beta_fn
from scipy.special import gamma, roots_genlaguerre

from alpharen import library
from alpharen.graph import GraphError
from alpharen.laurent import fit_laurent, z_circle
from alpharen.sector import (
    UnsupportedDivergence,
    analytic_lambda,
    build_partition,
    integrate,
    lambda_split_amplitude,
    radial_profile,
    sector_eval,
)
from alpharen.subgraph import painted_components

from .conftest import make_diagram

PI2 = math.pi**2
ZS = z_circle(0.1, 32)


def bubble_closed(z, m=1.0):
    return PI2 * gamma(1 + z) ** 2 * gamma(2 * z) / gamma(2 + 2 * z) * m ** (-4 * z)


def tadpole_closed(z, m=1.0):
    return PI2 * gamma(z - 1) * m ** (2 - 2 * z)


def _simplex_grid(n, k):
    pts = [c for c in itertools.product(range(k + 1), repeat=n) if sum(c) == k]
    beta = np.array(pts, dtype=float) / k
    return beta


# ----------------------------------------------------------------- partition


def test_partition_single_line():
    part = build_partition(1)
    assert part.subsets == (frozenset(),)
    assert np.allclose(part.eta_tilde(frozenset(), np.array([[1.0]])), 1.0)


@pytest.mark.parametrize("n,k", [(2, 400), (3, 120), (4, 40)])
def test_partition_sums_to_one(n, k):
    part = build_partition(n)
    beta = _simplex_grid(n, k)
    total = sum(part.eta_tilde(A, beta) for A in part.subsets)
    assert np.max(np.abs(total - 1)) <= 1e-12
    assert frozenset(range(n)) not in part.subsets


def test_partition_support_rule():
    n = 3
    part = build_partition(n)
    beta = _simplex_grid(n, 240)
    inner = part.delta * (1 - part.gamma)
    for A in part.subsets:
        near = np.all(beta[:, sorted(A)] < inner, axis=1) if A else np.ones(len(beta), bool)
        for A2 in part.subsets:
            if not A <= A2:
                assert np.all(part.eta_tilde(A2, beta[near]) == 0)


def test_partition_is_c2_smooth():
    part = build_partition(2)
    x = np.linspace(0, 0.5, 20001)
    beta = np.stack([x, 1 - x], axis=1)
    e = part.eta_tilde(frozenset({0}), beta)
    d2 = np.diff(e, 2) / (x[1] - x[0]) ** 2
    assert np.max(np.abs(np.diff(d2))) < 1e-2 * np.max(np.abs(d2))


def test_partition_parameter_check():
    with pytest.raises(GraphError):
        build_partition(3, delta=0.4)
    with pytest.raises(GraphError):
        build_partition(0)
    with pytest.raises(GraphError):
        build_partition(2).eta_tilde(frozenset({0, 1}), np.array([[0.5, 0.5]]))


# ------------------------------------------------------------------ integrate


def test_integrate_bubble_closed_form(std):
    res = integrate(std["bubble"], [None], ZS)
    assert np.max(np.abs(res.values[0] - bubble_closed(ZS))) <= 1e-10 * np.max(np.abs(bubble_closed(ZS)))
    assert res.error < 1e-8


def test_integrate_tadpole_closed_form(std):
    for m in (1.0, 0.6):
        v = integrate(std["tadpole"].with_masses(m), [None], ZS).values[0]
        assert np.max(np.abs(v - tadpole_closed(ZS, m))) <= 1e-10 * np.max(np.abs(v))


def test_integrate_bubble_with_momentum_matches_1d_oracle(std):
    p = 0.8
    pt = {"e1": [p, 0, 0, 0], "e3": [-p, 0, 0, 0]}
    z = np.array([0.3, 0.55 + 0.1j])
    v = integrate(std["bubble"], [pt], z).values[0]
    for zi, vi in zip(z, v):
        f = lambda x: (x * (1 - x)) ** zi * (1 + x * (1 - x) * p * p) ** (-2 * zi)
        ref = PI2 * gamma(2 * zi) * complex(mpmath.quad(f, [0, 1]))
        assert abs(vi - ref) <= 1e-10 * abs(ref)


def test_integrate_rejects_quadratic_subdivergence():
    # two self-loops at one vertex: each loop alone is quadratically divergent
    d = make_diagram({"l1": ("v", "v"), "l2": ("v", "v")}, {"e1": ("v", "in"), "e2": ("v", "out")})
    with pytest.raises(UnsupportedDivergence):
        integrate(d, [None], ZS)


# ---------------------------------------------------------------- sector_eval


@pytest.mark.parametrize("name,z", [("bubble", 0.7), ("sunset", 2.0)])
def test_partition_completeness(std, name, z):
    d = std[name]
    p = {"e1": [0.6, 0.2, 0, 0], "e2" if name == "sunset" else "e3": [-0.6, -0.2, 0, 0]}
    part = build_partition(len(d.internal))
    lines = list(d.internal)
    total = sum(sector_eval(d, [lines[i] for i in A], p, z, part) for A in part.subsets)
    direct = integrate(d, [p], [z], adaptive=False, m0=48, power=2).values[0, 0]
    assert abs(total - direct) <= 1e-8 * abs(direct)
    accurate = integrate(d, [p], [z]).values[0, 0]
    assert abs(total - accurate) <= 1e-4 * abs(accurate)


def test_empty_sector_dominates_for_small_delta(std):
    d = std["bubble"]
    part = build_partition(2, delta=1e-3)
    e0 = abs(sector_eval(d, [], None, 1.0, part))
    rest = abs(sector_eval(d, ["l1"], None, 1.0, part)) + abs(sector_eval(d, ["l2"], None, 1.0, part))
    assert rest < 1e-3 * e0


@pytest.mark.parametrize("A", [("l1", "l2"), ("l1", "l3"), ("l2", "l3")])
def test_sunset_factorization(std, A):
    d = std["sunset"]
    assert [c.lines for c in painted_components(d, A)] == [frozenset(A)]
    p = {"e1": [0.5, 0.1, 0, 0], "e2": [-0.5, -0.1, 0, 0]}
    fac = sector_eval(d, A, p, 2.0, method="factorized")
    direct = sector_eval(d, A, p, 2.0)
    assert abs(fac - direct) <= 1e-6 * abs(direct)


def test_sector_eval_errors(std):
    with pytest.raises(GraphError):
        sector_eval(std["bubble"], ["l9"], None, 1.0)
    with pytest.raises(ValueError):
        sector_eval(std["bubble"], [], None, 1.0, method="magic")


def test_flip_invariance_of_integration(std):
    d = std["nested_double_bubble"]
    p = {"e1": [0.4, 0, 0, 0], "e3": [-0.1, 0.2, 0, 0], "e4": [-0.3, -0.2, 0, 0]}
    z = [0.3 + 0.1j]
    a = integrate(d, [p], z).values[0, 0]
    b = integrate(d.flipped("l3"), [p], z).values[0, 0]
    assert abs(a - b) <= 1e-12 * abs(a)


# ------------------------------------------------------------------- radial


def test_radial_profile_tadpole(std):
    lam = np.logspace(-3, 1, 9)
    for z in (0.2, 0.4 + 0.1j):
        g = radial_profile(std["tadpole"], None, z, lam)[:, 0]
        assert np.allclose(g, lam ** (z - 2) * PI2 * np.exp(-lam), rtol=1e-13, atol=0)


def test_radial_profile_bubble_at_zero_momentum(std):
    lam = np.logspace(-2, 1, 7)
    z = 0.3
    g = radial_profile(std["bubble"], None, z, lam)[:, 0]
    ref = lam ** (2 * z - 1) * PI2 * np.exp(-lam) * beta_fn(1 + z, 1 + z)
    assert np.allclose(g, ref, rtol=1e-9, atol=0)


def test_radial_profile_decays(std):
    g = radial_profile(std["bubble"], None, 0.0, [1.0, 40.0])[:, 0]
    assert abs(g[1]) < 1e-15 * abs(g[0])


def test_radial_profile_integrates_to_amplitude(std):
    # the radial profile integrated over lambda is the amplitude
    z = 0.4
    # g ~ lam^{2z-1} e^{-lam}: generalised Gauss-Laguerre with that weight
    x, w = roots_genlaguerre(40, 2 * z - 1)
    g = radial_profile(std["bubble"], None, z, x)[:, 0]
    total = np.sum(w * g * x ** (1 - 2 * z) * np.exp(x))
    assert abs(total - bubble_closed(z)) <= 1e-6 * abs(bubble_closed(z))


def test_radial_profile_rejects_divergent_regulator(std):
    with pytest.raises(GraphError):
        radial_profile(std["sunset"], None, 0.0, [1.0])


# ----------------------------------------------------------- analytic lambda


def test_analytic_lambda_textbook_pole():
    zs = z_circle(0.1, 16)
    vals, series = analytic_lambda(lambda l: np.ones_like(l), [1.0], -1.0, 1.0, zs)
    assert np.allclose(vals, 1 / zs, rtol=1e-14)
    assert series.to_dict() == {-1: 1}


def test_analytic_lambda_incomplete_gamma():
    zs = z_circle(0.1, 16)
    taylor = [(-1) ** k / math.factorial(k) for k in range(3)]
    vals, series = analytic_lambda(lambda l: np.exp(-l), taylor, -1.0, 1.0, zs)
    ref = np.array([complex(mpmath.gammainc(z, 0, 1)) for z in zs])
    assert np.max(np.abs(vals - ref)) <= 1e-10 * np.max(np.abs(ref))
    assert series.to_dict() == {-1: 1}


def test_analytic_lambda_two_line_sector():
    zs = z_circle(0.05, 16)
    f0 = 0.75
    f = lambda l: f0 * np.exp(-2 * l)
    vals, series = analytic_lambda(f, [f0, -2 * f0], -1.0, 2.0, zs)
    assert series[-1] == pytest.approx(f0 / 2)
    assert fit_laurent((zs, vals), (-1, 2))[-1] == pytest.approx(f0 / 2, abs=1e-12)


def test_analytic_lambda_infinite_tail():
    z = np.array([0.3, 0.5 + 0.2j])
    vals, _ = analytic_lambda(lambda l: np.exp(-l), [1.0, -1.0], -1.0, 1.0, z, infinite=True, nodes=96)
    assert np.allclose(vals, gamma(z), rtol=1e-9)


def test_analytic_lambda_sample_on_pole():
    with pytest.raises(ZeroDivisionError):
        analytic_lambda(lambda l: np.ones_like(l), [1.0], -1.0, 1.0, [0.0])


def test_lambda_split_matches_fit(std):
    d = std["bubble"]
    vals = lambda_split_amplitude(d, None, ZS)
    ref = bubble_closed(ZS)
    assert np.max(np.abs(vals - ref)) <= 1e-10 * np.max(np.abs(ref))
    split = fit_laurent((ZS, vals), (-2, 2))
    direct = fit_laurent((ZS, integrate(d, [None], ZS).values[0]), (-2, 2))
    assert abs(split[-1] - direct[-1]) <= 1e-6 * abs(direct[-1])
    assert split[-1] == pytest.approx(PI2 / 2, rel=1e-10)
