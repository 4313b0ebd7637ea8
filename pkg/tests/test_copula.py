import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.legendre import leggauss
from scipy.stats import kendalltau, norm

from conftest import all_copulas, copula_id
from vineinfer.copula import (
    BivariateCopula,
    CopulaFamily,
    EdgeFit,
    Reflection,
    copula_cdf,
    copula_pdf,
    fit_edge_mle,
    hfunc,
    hinv,
    information_criteria,
    simulate_pair,
)
from vineinfer.copula._tdist import t_cdf, t_ppf
from vineinfer.exceptions import CopulaDomainError

COPULAS = all_copulas()
GRID = np.linspace(0.025, 0.975, 20)


# -- families ------------------------------------------------------------------

def test_independence_has_no_reflection():
    with pytest.raises(CopulaDomainError):
        CopulaFamily("I", Reflection.SURVIVAL)


@pytest.mark.parametrize("kind,k", [("I", 0), ("N", 1), ("t", 2), ("C", 1), ("G", 1), ("F", 1), ("BB1", 2),
                                    ("BB8", 2)])
def test_parameter_counts(kind, k):
    assert CopulaFamily(kind).nparams == k


@pytest.mark.parametrize("code", ["N", "t", "C.s", "G.u", "BB1.v", "BB8.s", "F"])
def test_code_roundtrip(code):
    assert CopulaFamily.from_code(code).code == code


@pytest.mark.parametrize("kind,theta", [("N", (1.0,)), ("t", (0.5, 1.5)), ("t", (0.5, 31.0)), ("C", (0.0,)),
                                        ("C", (29.0,)), ("G", (0.9,)), ("F", (0.0,)), ("F", (36.0,)),
                                        ("BB1", (0.0, 1.5)), ("BB1", (1.0, 0.9)), ("BB8", (0.9, 0.5)),
                                        ("BB8", (2.0, 1.1)), ("N", (0.2, 0.3))])
def test_domain_errors(kind, theta):
    with pytest.raises(CopulaDomainError):
        BivariateCopula(CopulaFamily(kind), theta)


# -- cdf -----------------------------------------------------------------------

def test_cdf_gaussian_zero_is_product():
    assert copula_cdf(BivariateCopula("N", (0.0,)), 0.3, 0.7) == pytest.approx(0.21, abs=1e-12)


def test_cdf_clayton_independence_limit():
    assert copula_cdf(BivariateCopula("C", (1e-8,)), 0.5, 0.5) == pytest.approx(0.25, abs=1e-6)


def test_cdf_frank_closed_form():
    th, u, v = 5.0, 0.5, 0.5
    expected = -np.log1p(np.expm1(-th * u) * np.expm1(-th * v) / np.expm1(-th)) / th
    assert copula_cdf(BivariateCopula("F", (th,)), u, v) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("cop", COPULAS, ids=copula_id)
def test_cdf_frechet_bounds(cop):
    u, v = np.meshgrid(GRID, GRID)
    c = cop.cdf(u, v)
    assert np.all(c >= np.maximum(u + v - 1.0, 0.0) - 1e-12)
    assert np.all(c <= np.minimum(u, v) + 1e-12)


# -- density ---------------------------------------------------------------------

def test_pdf_gaussian_zero_is_one():
    u, v = np.meshgrid(GRID, GRID)
    assert np.allclose(copula_pdf(BivariateCopula("N", (0.0,)), u, v), 1.0)


def test_pdf_frank_near_zero():
    assert copula_pdf(BivariateCopula("F", (1e-6,)), 0.4, 0.9) == pytest.approx(1.0, abs=1e-4)


def test_pdf_gaussian_centre():
    assert copula_pdf(BivariateCopula("N", (0.5,)), 0.5, 0.5) == pytest.approx(1 / np.sqrt(0.75), abs=1e-10)


@pytest.mark.parametrize("kind,theta", [("C", (2.0,)), ("G", (2.5,)), ("BB1", (1.0, 2.0)), ("BB8", (3.0, 0.8))])
def test_survival_identity(kind, theta):
    base = BivariateCopula(CopulaFamily(kind), theta)
    surv = BivariateCopula(CopulaFamily(kind, Reflection.SURVIVAL), theta)
    u, v = np.meshgrid(GRID, GRID)
    assert np.array_equal(surv.pdf(u, v), base.pdf(1 - u, 1 - v))


@pytest.mark.parametrize("kind,theta", [("C", (2.0,)), ("G", (2.5,)), ("BB1", (1.0, 2.0))])
def test_reflection_cdf_formulas(kind, theta):
    base = BivariateCopula(CopulaFamily(kind), theta)
    u, v = np.meshgrid(GRID, GRID)
    s = BivariateCopula(CopulaFamily(kind, "s"), theta).cdf(u, v)
    r1 = BivariateCopula(CopulaFamily(kind, "u"), theta).cdf(u, v)
    r2 = BivariateCopula(CopulaFamily(kind, "v"), theta).cdf(u, v)
    assert np.allclose(s, u + v - 1 + base.cdf(1 - u, 1 - v), atol=1e-12)
    assert np.allclose(r1, v - base.cdf(1 - u, v), atol=1e-12)
    assert np.allclose(r2, u - base.cdf(u, 1 - v), atol=1e-12)


def _z_quadrature(m=300, half_width=8.5):
    x, w = leggauss(m)
    z = half_width * x
    wz = half_width * w * norm.pdf(z)
    u = norm.cdf(z)
    return np.meshgrid(u, u, indexing="ij"), np.outer(wz, wz)


@pytest.mark.parametrize("cop", COPULAS, ids=copula_id)
def test_pdf_integrates_to_one(cop):
    (u, v), w = _z_quadrature()
    assert abs(np.sum(cop.pdf(u, v) * w) - 1.0) < 1e-4


# -- h-functions -------------------------------------------------------------------

def test_h_independence_point():
    cop = BivariateCopula("N", (0.0,))
    assert hfunc(cop, "second", 0.3, 0.8) == pytest.approx(0.3, abs=1e-12)


def test_h_gaussian_symmetric_point():
    assert hfunc(BivariateCopula("N", (0.5,)), "second", 0.5, 0.5) == pytest.approx(0.5, abs=1e-12)


def test_h_clayton_finite_difference():
    cop = BivariateCopula("C", (2.0,))
    step = 1e-6
    fd = (cop.cdf(0.3, 0.6 + step) - cop.cdf(0.3, 0.6 - step)) / (2 * step)
    assert hfunc(cop, "second", 0.3, 0.6) == pytest.approx(float(fd), abs=1e-7)


@pytest.mark.parametrize("cop", COPULAS, ids=copula_id)
def test_h_matches_finite_difference(cop):
    g = np.linspace(0.1, 0.9, 9)
    u, v = np.meshgrid(g, g)
    step = 1e-6
    fd1 = (cop.cdf(u, v + step) - cop.cdf(u, v - step)) / (2 * step)
    fd2 = (cop.cdf(u + step, v) - cop.cdf(u - step, v)) / (2 * step)
    assert np.max(np.abs(cop.h1(u, v) - fd1)) < 1e-5
    assert np.max(np.abs(cop.h2(u, v) - fd2)) < 1e-5


@pytest.mark.parametrize("cop", COPULAS, ids=copula_id)
def test_evaluate_matches_separate_calls(cop):
    u, v = np.meshgrid(GRID, GRID)
    lp, h1, h2 = cop.evaluate(u, v)
    assert np.allclose(lp, cop.logpdf(u, v), atol=1e-12)
    assert np.allclose(h1, cop.h1(u, v), atol=1e-12)
    assert np.allclose(h2, cop.h2(u, v), atol=1e-12)


# -- inverses ----------------------------------------------------------------------

def test_hinv_independence_point():
    assert hinv(BivariateCopula("N", (0.0,)), "second", 0.37, 0.9) == pytest.approx(0.37, abs=1e-12)


def test_hinv_gumbel_roundtrip():
    cop = BivariateCopula("G", (2.0,))
    p = hfunc(cop, "second", 0.2, 0.9)
    assert hinv(cop, "second", p, 0.9) == pytest.approx(0.2, abs=1e-8)


def test_hinv_gaussian_median():
    val = hinv(BivariateCopula("N", (0.8,)), "second", 0.5, 0.95)
    assert val == pytest.approx(norm.cdf(0.8 * norm.ppf(0.95)), abs=1e-10)
    assert val == pytest.approx(0.9059, abs=1e-4)


@pytest.mark.parametrize("cop", COPULAS, ids=copula_id)
def test_hinv_roundtrip_grid(cop):
    p, v = np.meshgrid(GRID, GRID)
    assert np.max(np.abs(cop.h1(cop.hinv1(p, v), v) - p)) < 1e-8
    assert np.max(np.abs(cop.h2(v, cop.hinv2(v, p)) - p)) < 1e-8


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(COPULAS), st.floats(1e-4, 1 - 1e-4), st.floats(1e-4, 1 - 1e-4))
def test_hinv_roundtrip_property(cop, p, v):
    assert abs(float(cop.h1(cop.hinv1(p, v), v)) - p) < 1e-8


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(COPULAS), st.floats(0.01, 0.99), st.floats(0.01, 0.98), st.floats(0.001, 0.02))
def test_h_monotone_property(cop, v, u, du):
    assert float(cop.h1(u + du, v)) >= float(cop.h1(u, v)) - 1e-12


def test_hinv_rejects_boundary_probability():
    with pytest.raises(ValueError):
        hinv(BivariateCopula("N", (0.5,)), "second", 1.0, 0.5)


# -- simulation ---------------------------------------------------------------------

def test_simulate_independence_tau():
    x = simulate_pair(BivariateCopula("N", (0.0,)), 10000, seed=1)
    assert abs(kendalltau(x[:, 0], x[:, 1])[0]) < 0.03


def test_simulate_gaussian_tau():
    x = simulate_pair(BivariateCopula("N", (0.7,)), 10000, seed=2)
    assert kendalltau(x[:, 0], x[:, 1])[0] == pytest.approx(2 / np.pi * np.arcsin(0.7), abs=0.03)


def test_simulate_deterministic():
    cop = BivariateCopula("BB1", (1.0, 2.0))
    assert np.array_equal(cop.simulate(100, seed=5), cop.simulate(100, seed=5))


@pytest.mark.parametrize("cop", [c for c in COPULAS if c.theta == (2.0,) or c.theta == (1.0, 2.0)], ids=copula_id)
def test_simulated_tau_matches_theoretical(cop):
    x = cop.simulate(8000, seed=3)
    assert kendalltau(x[:, 0], x[:, 1])[0] == pytest.approx(cop.tau, abs=0.03)


# -- Student t helpers ----------------------------------------------------------------

@pytest.mark.parametrize("nu", [2.0, 3.5, 8.0, 30.0])
def test_t_ppf_roundtrip(nu):
    p = np.concatenate([np.logspace(-10, -1, 10), np.linspace(0.1, 0.9, 17), 1 - np.logspace(-10, -1, 10)])
    assert np.max(np.abs(t_cdf(nu, t_ppf(nu, p)) - p) / np.minimum(p, 1 - p)) < 1e-10


# -- edge fitting -----------------------------------------------------------------------

def test_information_criteria():
    aic, bic = information_criteria(100.0, 2, 500)
    assert aic == pytest.approx(-196.0)
    assert bic == pytest.approx(-200.0 + np.log(500) * 2)


def test_fit_gaussian_recovery():
    x = BivariateCopula("N", (0.8,)).simulate(2000, seed=11)
    fit = fit_edge_mle(CopulaFamily("N"), x)
    assert 0.77 <= fit.copula.theta[0] <= 0.83
    assert isinstance(fit, EdgeFit) and fit.n == 2000


def test_fit_gumbel_recovery():
    x = BivariateCopula("G", (2.0,)).simulate(2000, seed=12)
    assert 1.85 <= fit_edge_mle(CopulaFamily("G"), x).copula.theta[0] <= 2.15


@pytest.mark.parametrize("code,theta", [("t", (0.6, 5.0)), ("C.s", (3.0,)), ("F", (-6.0,)), ("BB1", (0.8, 1.6)),
                                        ("BB8.u", (3.0, 0.8)), ("G.v", (1.8,))])
def test_fit_recovery_other_families(code, theta):
    true = BivariateCopula(code, theta)
    fit = fit_edge_mle(true.family, true.simulate(3000, seed=13))
    assert fit.copula.tau == pytest.approx(true.tau, abs=0.03)


def test_edgefit_criteria_consistent():
    x = BivariateCopula("t", (0.5, 6.0)).simulate(500, seed=4)
    fit = fit_edge_mle(CopulaFamily("t"), x)
    assert fit.aic == pytest.approx(-2 * fit.loglik + 4)
    assert fit.bic == pytest.approx(-2 * fit.loglik + np.log(500) * 2)
    assert fit.loglik == pytest.approx(float(np.sum(fit.copula.logpdf(x[:, 0], x[:, 1]))), rel=1e-9)
