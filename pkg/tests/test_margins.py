import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from vineinfer import _backend, _recursions_py
from vineinfer.exceptions import CopulaDomainError, InputError
from vineinfer.margins import (
    LogNormalMargin,
    MarginModel,
    MarginPipeline,
    NormalMargin,
    ParametricMargins,
    arch_lm,
    find_outliers,
    fit_arma_garch,
    fit_skewt,
    garch_filter,
    inverse_pit,
    ljung_box,
    pit,
    simulate_arma_garch,
    skewt_cdf,
    skewt_quantile,
    smooth_outliers,
    sstd_cdf,
    sstd_logpdf,
    sstd_ppf,
)

# -- skewed t ------------------------------------------------------------------------


def test_skewt_symmetric_median():
    assert skewt_cdf(MarginModel(0.0, 1.0, 1.0, 5.0), 0.0) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("skew,df", [(1.0, 5.0), (1.5, 4.0), (0.7, 12.0), (2.5, 2.5)])
def test_skewt_roundtrip(skew, df):
    m = MarginModel(0.3, 1.7, skew, df)
    x = np.arange(-3.0, 3.5, 0.5)
    assert np.max(np.abs(skewt_quantile(m, skewt_cdf(m, x)) - x)) < 1e-8


def test_skewt_normal_limit():
    assert skewt_cdf(MarginModel(0.0, 1.0, 1.0, 200.0), 1.645) == pytest.approx(0.95, abs=2e-3)


@pytest.mark.parametrize("skew,df", [(1.0, 6.0), (1.8, 5.0), (0.6, 9.0)])
def test_standardised_moments(skew, df):
    f = lambda z: np.exp(sstd_logpdf(z, df, skew))  # noqa: E731
    mass = integrate.quad(f, -np.inf, np.inf)[0]
    mean = integrate.quad(lambda z: z * f(z), -np.inf, np.inf)[0]
    var = integrate.quad(lambda z: z * z * f(z), -np.inf, np.inf)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert mean == pytest.approx(0.0, abs=1e-7)
    assert var == pytest.approx(1.0, abs=1e-6)


def test_cdf_is_integral_of_pdf():
    z = 0.8
    num = integrate.quad(lambda t: np.exp(sstd_logpdf(t, 5.0, 1.4)), -np.inf, z)[0]
    assert sstd_cdf(z, 5.0, 1.4) == pytest.approx(num, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6), st.floats(2.2, 60.0), st.floats(0.3, 3.0))
def test_sstd_ppf_inverse_property(p, df, skew):
    assert float(sstd_cdf(sstd_ppf(p, df, skew), df, skew)) == pytest.approx(p, abs=1e-10)


def test_skewt_domain_errors():
    with pytest.raises(CopulaDomainError):
        MarginModel(0.0, 1.0, 1.0, 2.0)
    with pytest.raises(CopulaDomainError):
        MarginModel(0.0, 0.0, 1.0, 5.0)
    with pytest.raises(CopulaDomainError):
        MarginModel(0.0, 1.0, -1.0, 5.0)


def test_fit_skewt_recovers():
    true = MarginModel(0.5, 2.0, 1.5, 6.0)
    x = true.ppf(np.random.default_rng(3).random(5000))
    fit = fit_skewt(x)
    assert fit.location == pytest.approx(0.5, abs=0.1)
    assert fit.scale == pytest.approx(2.0, rel=0.08)
    assert fit.skew == pytest.approx(1.5, rel=0.1)
    assert 4.0 < fit.df < 10.0
    assert MarginModel.from_dict(fit.to_dict()) == fit


# -- PIT -------------------------------------------------------------------------------

def test_pit_standard_normal():
    assert pit(NormalMargin(), 0.0) == pytest.approx(0.5)


def test_pit_roundtrip_all_margins():
    margins = [NormalMargin(1.0, 2.0), LogNormalMargin(0.2, 0.8), MarginModel(0.0, 1.3, 0.8, 5.0)]
    u = np.linspace(0.001, 0.999, 101)
    for m in margins:
        assert np.max(np.abs(pit(m, inverse_pit(m, u)) - u)) < 1e-8
        x = inverse_pit(m, u)
        assert np.max(np.abs(inverse_pit(m, pit(m, x)) - x) / np.maximum(1.0, np.abs(x))) < 1e-8


def test_fitted_pit_uniform():
    x = MarginModel(0.0, 1.0, 1.3, 5.0).ppf(np.random.default_rng(5).random(2000))
    u = pit(fit_skewt(x), x)
    assert stats.kstest(u, "uniform").pvalue > 0.01


def test_parametric_margins_roundtrip():
    rng = np.random.default_rng(0)
    x = np.exp(rng.normal(size=(300, 3)))
    pm = ParametricMargins.fit(x, LogNormalMargin)
    assert np.allclose(pm.ppf(pm.cdf(x)), x, rtol=1e-8)
    again = ParametricMargins.from_dict(pm.to_dict())
    assert np.allclose(again.cdf(x), pm.cdf(x))
    with pytest.raises(InputError):
        pm.cdf(x[:, :2])


# -- GARCH -----------------------------------------------------------------------------

def test_backends_agree():
    z = np.random.default_rng(1).standard_normal(500)
    pars = (0.01, 0.3, -0.2, 0.05, 0.1, 0.85, 1.0)
    x_py, s_py = _recursions_py.garch_simulate(z, *pars)
    x_be, s_be = _backend.garch_simulate(z, *pars)
    assert np.allclose(x_py, x_be, atol=1e-13) and np.allclose(s_py, s_be, atol=1e-13)
    e_py, v_py = _recursions_py.arma_garch_recursion(x_py, *pars)
    e_be, v_be = _backend.arma_garch_recursion(np.ascontiguousarray(x_py), *pars)
    assert np.allclose(e_py, e_be, atol=1e-13) and np.allclose(v_py, v_be, atol=1e-13)
    # the recursion recovers the innovations that generated the path
    assert np.allclose(e_py / np.sqrt(v_py), z, atol=1e-10)


def test_backend_name():
    assert _backend.BACKEND in ("cython", "python")


@pytest.fixture(scope="module")
def garch_fit():
    x = simulate_arma_garch(5000, omega=0.05, alpha=0.1, beta=0.85, df=7.0, skew=1.2, seed=21)
    return x, fit_arma_garch(x)


def test_garch_recovery(garch_fit):
    _, g = garch_fit
    assert 0.05 <= g.alpha <= 0.15
    assert 0.80 <= g.beta <= 0.90
    assert g.omega > 0 and g.alpha + g.beta < 1 and abs(g.phi) < 1 and g.df > 2
    assert not g.at_boundary


def test_garch_residuals_standardised(garch_fit):
    _, g = garch_fit
    assert abs(np.mean(g.residuals)) < 0.05
    assert 0.9 <= np.var(g.residuals) <= 1.1


def test_garch_sigma_reconstruction(garch_fit):
    x, g = garch_fit
    resid, sigma = g.filter(x)
    assert np.array_equal(sigma, g.sigma)
    assert np.array_equal(resid, g.residuals)
    resid2, _ = garch_filter(x, g.mu, g.phi, g.theta, g.omega, g.alpha, g.beta, g.sigma2_0)
    assert np.array_equal(resid2, g.residuals)


def test_garch_iid_gaussian():
    ok = 0
    for seed in range(10):
        x = np.random.default_rng(seed).standard_normal(1000)
        g = fit_arma_garch(x)
        assert g.alpha < 0.1
        ok += ljung_box(g.residuals**2) > 0.05
    assert ok >= 9


def test_garch_input_errors():
    with pytest.raises(InputError):
        fit_arma_garch(np.zeros(100))
    with pytest.raises(InputError):
        fit_arma_garch(np.ones(400))
    bad = np.random.default_rng(0).standard_normal(400)
    bad[5] = np.nan
    with pytest.raises(InputError):
        fit_arma_garch(bad)


def test_arch_lm_detects_garch(garch_fit):
    x, g = garch_fit
    assert arch_lm(x) < 0.01
    assert arch_lm(g.residuals) > 0.01


# -- outliers ---------------------------------------------------------------------------

def _quiet(n=2000, d=3, seed=0):
    return np.clip(np.random.default_rng(seed).standard_normal((n, d)), -2.5, 2.5)


def test_isolated_spike_flagged():
    x = _quiet()
    x[500] = [0.1, -0.2, 0.0]
    x[500, 1] = 5.0
    out = find_outliers(x)
    assert any(o.row == 500 and o.column == 1 for o in out)


def test_spike_with_joint_move_not_flagged():
    x = _quiet()
    x[500] = [3.0, 5.0, -3.0]
    out = find_outliers(x)
    assert not any(o.row == 500 for o in out)


def test_smoothing_preserves_sums_and_untouched_columns():
    x = _quiet(seed=3)
    x[100] = [0.0, 6.0, 0.1]
    x[1000] = [0.2, -0.1, -5.5]
    res = smooth_outliers(x, seed=1)
    flagged_cols = {o.column for o in res.outliers}
    assert flagged_cols == {1, 2}
    assert np.array_equal(res.data[:, 0], x[:, 0])
    for j in range(3):
        cs, cs0 = np.cumsum(res.data[:, j]), np.cumsum(x[:, j])
        changed = np.nonzero(res.data[:, j] != x[:, j])[0]
        tail = np.arange(len(x)) > (changed.max() if changed.size else -1)
        assert np.allclose(cs[tail], cs0[tail], rtol=1e-9, atol=1e-9)
    assert abs(res.data[100, 1]) < 3.0


def test_triple_sum_identity():
    x = _quiet(seed=4)
    x[700, 0] = 7.0
    x[700, 1:] = 0.0
    res = smooth_outliers(x, seed=2)
    assert res.data[699:702, 0].sum() == pytest.approx(x[699:702, 0].sum(), abs=1e-12)


def test_boundary_outlier():
    x = _quiet(seed=5)
    x[0] = [6.0, 0.0, 0.0]
    res = smooth_outliers(x, seed=3)
    (o,) = [o for o in res.outliers if o.row == 0]
    assert o.boundary is True
    assert res.data[:2, 0].sum() == pytest.approx(x[:2, 0].sum(), abs=1e-12)


def test_smoothing_reproducible():
    x = _quiet(seed=6)
    x[10, 2] = 8.0
    x[10, :2] = 0.0
    assert np.array_equal(smooth_outliers(x, seed=4).data, smooth_outliers(x, seed=4).data)


def test_outlier_input_errors():
    with pytest.raises(InputError):
        find_outliers(np.zeros((2, 2)))
    with pytest.raises(InputError):
        find_outliers(np.zeros((10, 2)))


# -- pipeline ---------------------------------------------------------------------------

@pytest.mark.slow
def test_margin_pipeline_uscores_uniform():
    cols = [simulate_arma_garch(1500, phi=0.2, omega=0.05, alpha=0.08, beta=0.9, df=6.0, skew=1.3, seed=s)
            for s in range(2)]
    pipe, resid = MarginPipeline.fit_series(np.column_stack(cols), ["a", "b"])
    u = pipe.cdf(resid)
    for j in range(2):
        assert stats.kstest(u[:, j], "uniform").pvalue > 0.01
    doc = pipe.to_dict()
    assert doc["names"] == ["a", "b"] and len(doc["filters"]) == 2
    assert np.allclose(MarginPipeline.from_dict(doc).cdf(resid), u)
