import json

import numpy as np
import pytest
from scipy.stats import norm

from oracles import gaussian_copula_logpdf, gaussian_vine_correlation
from vineinfer.copula import BivariateCopula, CopulaFamily
from vineinfer.evaluation.scenarios import get_scenario
from vineinfer.exceptions import FitError, InputError, SelectionError
from vineinfer.fit import (
    APPLICATION_CANDIDATES,
    DEFAULT_CANDIDATES,
    VineModel,
    fit_vine,
    format_report,
    model_report,
    parse_candidates,
    refit_families,
    select_edge_family,
    vine_copula_density,
)
from vineinfer.infer import rosenblatt_simulate
from vineinfer.vine import dvine_array, validate_array


def _random_model(d, seed, families=("N", "t", "C", "G.s", "F", "BB1", "C.u")):
    rng = np.random.default_rng(seed)
    arr = dvine_array(rng.permutation(np.arange(1, d + 1)))
    fam = [[None] * d for _ in range(d - 1)]
    par = [[None] * d for _ in range(d - 1)]
    picks = {"N": lambda: (rng.uniform(-0.7, 0.7),), "t": lambda: (rng.uniform(-0.6, 0.6), rng.uniform(3, 10)),
             "C": lambda: (rng.uniform(0.3, 3),), "G.s": lambda: (rng.uniform(1.1, 2.5),),
             "F": lambda: (rng.uniform(-5, 5),), "BB1": lambda: (rng.uniform(0.2, 1.0), rng.uniform(1.1, 2.0)),
             "C.u": lambda: (rng.uniform(0.3, 2),)}
    for level, col in arr.slots():
        f = families[rng.integers(len(families))]
        fam[level - 1][col - 1] = f
        par[level - 1][col - 1] = picks[f]()
    return VineModel.from_matrices(arr, fam, par)


# -- candidates -----------------------------------------------------------------

def test_default_candidates_content():
    codes = {f.code for f in DEFAULT_CANDIDATES}
    assert {"N", "t", "F", "C", "C.s", "C.u", "C.v", "G.s", "BB1.v"} <= codes
    assert not any(f.kind == "BB8" for f in DEFAULT_CANDIDATES)
    assert any(f.code == "BB8.s" for f in APPLICATION_CANDIDATES)


def test_parse_candidates():
    assert parse_candidates("default") == DEFAULT_CANDIDATES
    assert [f.code for f in parse_candidates("N,G.s")] == ["N", "G.s"]
    assert len(parse_candidates("C")) == 4


# -- selection ---------------------------------------------------------------------

@pytest.mark.slow
def test_gumbel_selected_most_of_the_time():
    cands = tuple(CopulaFamily(k) for k in ("N", "G", "C", "F"))
    cop = BivariateCopula("G", (2.0,))
    hits = sum(select_edge_family(cop.simulate(1500, seed=s), cands).copula.kind == "G" for s in range(100))
    assert hits >= 90


def test_bic_prefers_one_parameter_near_independence():
    x = np.random.default_rng(3).random((800, 2))
    cands = parse_candidates("N,t,BB1,F")
    fit = select_edge_family(x, cands, "bic")
    assert fit.copula.nparams == 1


def test_single_candidate_returned():
    x = BivariateCopula("C", (2.0,)).simulate(300, seed=1)
    fit = select_edge_family(x, (CopulaFamily("F"),))
    assert fit.copula.kind == "F"


def test_negative_dependence_avoids_unreflected_clayton():
    x = BivariateCopula("C.u", (3.0,)).simulate(1000, seed=2)
    fit = select_edge_family(x, DEFAULT_CANDIDATES)
    assert fit.copula.tau < 0
    assert fit.copula.family.reflection.negates or fit.copula.kind in ("N", "t", "F")


def test_selection_error(monkeypatch):
    import vineinfer.fit as fitmod

    def boom(*a, **k):
        raise FitError("nope")

    monkeypatch.setattr(fitmod, "fit_edge_mle", boom)
    with pytest.raises(SelectionError) as err:
        select_edge_family(np.random.default_rng(0).random((50, 2)), parse_candidates("N,F"))
    assert set(err.value.failures) == {"N", "F"}


def test_too_few_pairs():
    with pytest.raises(InputError):
        select_edge_family(np.random.default_rng(0).random((10, 2)))


# -- density --------------------------------------------------------------------------

def test_independence_density_is_one():
    m = VineModel.independence(4)
    u = np.random.default_rng(0).random((20, 4))
    assert np.allclose(m.pdf(u), 1.0)


def test_d2_density_equals_pair_copula():
    cop = BivariateCopula("BB1", (0.8, 1.5))
    m = VineModel.from_matrices(dvine_array([1, 2]), [[None, "BB1"]], [[None, (0.8, 1.5)]])
    u = np.random.default_rng(1).random((30, 2))
    assert np.allclose(m.pdf(u), cop.pdf(u[:, 0], u[:, 1]), rtol=1e-12)


def test_d3_gaussian_density_oracle():
    m = VineModel.from_matrices(dvine_array([2, 1, 3]),
                                [[None, "N", "N"], [None, None, "N"]],
                                [[None, 0.5, 0.3], [None, None, -0.4]])
    corr = gaussian_vine_correlation(m)
    u = np.array([0.3, 0.5, 0.7])
    assert vine_copula_density(m, u) == pytest.approx(float(np.exp(gaussian_copula_logpdf(corr, u))[0]), abs=1e-6)


@pytest.mark.parametrize("d", [3, 4])
def test_gaussian_density_oracle_random(d):
    rng = np.random.default_rng(d)
    m = _random_model(d, d, families=("N",))
    corr = gaussian_vine_correlation(m)
    u = rng.uniform(0.01, 0.99, size=(100, d))
    assert np.max(np.abs(m.pdf(u) - np.exp(gaussian_copula_logpdf(corr, u)))) < 1e-6


def test_density_integrates_to_one_d3():
    from numpy.polynomial.legendre import leggauss

    m = _random_model(3, 7)
    x, w = leggauss(50)
    z, wz = 7.0 * x, 7.0 * w * norm.pdf(7.0 * x)
    g = norm.cdf(z)
    uu = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    ww = np.einsum("i,j,k->ijk", wz, wz, wz).ravel()
    assert abs(np.sum(m.pdf(uu) * ww) - 1.0) < 5e-3


def test_loglik_consistency():
    m = _random_model(5, 3)
    u = rosenblatt_simulate(m, n=500, seed=1)
    fitted = fit_vine(u, array=m.array)
    assert fitted.loglik == pytest.approx(float(np.sum(fitted.logpdf(u))), abs=1e-6)


# -- fit_vine --------------------------------------------------------------------------

def test_fit_vine_d2_matches_selection():
    x = BivariateCopula("G", (1.7,)).simulate(500, seed=4)
    m = fit_vine(x, array=dvine_array([1, 2]))
    s = select_edge_family(x, DEFAULT_CANDIDATES)
    assert m.copulas[(1, 2)] == s.copula


def test_fit_vine_case1_recovery_and_aic():
    sc = get_scenario(1)
    u = rosenblatt_simulate(sc.model, n=800, seed=5)
    m = fit_vine(u, array=sc.model.array, candidates=parse_candidates("N"))
    rho12 = m.edge_keyed()[(frozenset({1, 2}), frozenset())][1].theta[0]
    assert 0.76 <= rho12 <= 0.84
    true_ll = float(np.sum(sc.model.logpdf(u)))
    # 10 extra free parameters: the fitted likelihood can only exceed the truth by a chi-square-sized amount
    assert 0.0 <= m.loglik - true_ll < 15.0


def test_fit_vine_mst_all_gaussian_report():
    sc = get_scenario(1)
    u = rosenblatt_simulate(sc.model, n=800, seed=6)
    m = fit_vine(u, candidates="N")
    rep = model_report(m)
    assert all(code == "N" for row in rep["families"] for code in row)
    edge_aic = [a for row in rep["edge_aic"] for a in row]
    assert sum(edge_aic) == pytest.approx(m.aic)
    validate_array(m.array.matrix)
    assert "families:" in format_report(m)


def test_fit_vine_counts_and_penalty():
    m = _random_model(5, 8)
    u = rosenblatt_simulate(m, n=400, seed=2)
    f = fit_vine(u)
    assert len(f.copulas) == 10
    k = sum(c.nparams for c in f.copulas.values())
    assert f.aic == pytest.approx(-2 * f.loglik + 2 * k)
    assert f.bic == pytest.approx(-2 * f.loglik + np.log(400) * k)


def test_fit_vine_rejects_boundary_uscores():
    u = np.random.default_rng(0).random((100, 3))
    u[0, 0] = 1.0
    with pytest.raises(InputError):
        fit_vine(u)


def test_fit_error_has_coordinates(monkeypatch):
    import vineinfer.fit as fitmod

    def boom(*a, **k):
        raise SelectionError("all failed")

    monkeypatch.setattr(fitmod, "select_edge_family", boom)
    with pytest.raises(FitError) as err:
        fit_vine(np.random.default_rng(0).random((100, 3)), array=dvine_array([1, 2, 3]))
    assert err.value.where == (1, 2)


def test_fit_error_location_during_structure_learning(monkeypatch):
    import vineinfer.fit as fitmod

    real = fitmod.select_edge_family

    def fail_in_tree2(pairs, *a, **k):
        # tree-2 inputs are h-function outputs, never equal to raw columns
        if not any(np.array_equal(pairs[:, 0], u[:, c]) for c in range(3)):
            raise SelectionError("all failed")
        return real(pairs, *a, **k)

    u = rosenblatt_simulate(_random_model(3, 1), n=200, seed=2)
    monkeypatch.setattr(fitmod, "select_edge_family", fail_in_tree2)
    with pytest.raises(FitError) as err:
        fit_vine(u)
    assert err.value.where == (2, None)
    pair, cond = err.value.edge
    assert len(pair) == 2 and len(cond) == 1


def test_model_report_d2():
    m = VineModel.from_matrices(dvine_array([1, 2]), [[None, "N"]], [[None, 0.4]])
    assert model_report(m)["families"] == [["N"]]


# -- persistence and re-encoding -----------------------------------------------------

def test_serialization_idempotent():
    m = fit_vine(rosenblatt_simulate(_random_model(4, 9), n=300, seed=3))
    doc = m.dumps()
    again = VineModel.loads(doc)
    assert again.dumps() == doc
    assert json.loads(doc)["families"]
    u = np.random.default_rng(0).random((10, 4))
    assert np.allclose(again.pdf(u), m.pdf(u), rtol=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_reroot_preserves_density(seed):
    m = _random_model(5, seed)
    u = np.random.default_rng(seed).random((25, 5))
    for v in range(1, 6):
        r = m.reroot(v)
        assert r.array.entry(1, 1) == v
        assert np.allclose(r.pdf(u), m.pdf(u), rtol=1e-10)
    for v in m.last_tree_vars():
        w = m.with_last(v)
        assert w.array.entry(5, 5) == v
        assert np.allclose(w.pdf(u), m.pdf(u), rtol=1e-10)


def test_refit_families_gaussian():
    m = _random_model(4, 11)
    u = rosenblatt_simulate(m, n=500, seed=4)
    g = refit_families(m, u, lambda level, col, cop: CopulaFamily("N"))
    assert g.array == m.array
    assert all(c.kind == "N" for c in g.copulas.values())
