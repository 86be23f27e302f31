import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgcausal.catalog import VariableCatalog
from kgcausal.errors import CycleError, DegenerateColumn, DomainError
from kgcausal.graph import DirectedGraph
from kgcausal.stats import Dataset, bic_score, fisher_z_pvalue, ols_fit, partial_correlation, zscore


def _residual_corr(M, i, j, S):
    """Oracle: correlate the residuals of i and j after regressing both on S."""
    if not S:
        return np.corrcoef(M[:, i], M[:, j])[0, 1]
    Z = np.column_stack([np.ones(len(M)), M[:, S]])
    ri = M[:, i] - Z @ np.linalg.lstsq(Z, M[:, i], rcond=None)[0]
    rj = M[:, j] - Z @ np.linalg.lstsq(Z, M[:, j], rcond=None)[0]
    return np.corrcoef(ri, rj)[0, 1]


def test_partial_correlation_empty_set_is_pearson():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(200, 3))
    assert partial_correlation(M, 0, 1) == pytest.approx(np.corrcoef(M[:, 0], M[:, 1])[0, 1])


def test_partial_correlation_identical_columns():
    rng = np.random.default_rng(1)
    x = rng.normal(size=100)
    M = np.column_stack([x, x, rng.normal(size=100)])
    assert partial_correlation(M, 0, 1) == pytest.approx(1.0)


def test_chain_is_conditionally_independent():
    rng = np.random.default_rng(2)
    n = 5000
    i = rng.normal(size=n)
    k = 0.8 * i + rng.normal(size=n)
    j = 0.8 * k + rng.normal(size=n)
    M = np.column_stack([i, j, k, rng.normal(size=n)])
    assert abs(partial_correlation(M, 0, 1)) > 0.3
    assert abs(partial_correlation(M, 0, 1, [2])) < 0.05


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 3))
def test_partial_correlation_matches_residual_oracle(seed, k):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(80, 6)) @ rng.normal(size=(6, 6))
    S = list(range(2, 2 + k))
    assert partial_correlation(M, 0, 1, S) == pytest.approx(_residual_corr(M, 0, 1, S), abs=1e-8)


def test_partial_correlation_argument_checks():
    M = np.random.default_rng(0).normal(size=(20, 3))
    with pytest.raises(ValueError):
        partial_correlation(M, 0, 0)
    with pytest.raises(ValueError):
        partial_correlation(M, 0, 1, [1])


def test_fisher_z_examples():
    assert fisher_z_pvalue(0.0, 100, 0) == 1.0
    # oracle: two-sided normal tail written with erfc, independent of scipy
    z = math.atanh(0.5) * math.sqrt(97)
    assert fisher_z_pvalue(0.5, 100, 0) == pytest.approx(math.erfc(z / math.sqrt(2)), rel=1e-10)
    assert fisher_z_pvalue(0.5, 100, 0) == pytest.approx(6.30e-8, rel=1e-2)
    assert fisher_z_pvalue(-0.5, 100, 0) == fisher_z_pvalue(0.5, 100, 0)


def test_fisher_z_domain():
    with pytest.raises(DomainError):
        fisher_z_pvalue(0.2, 5, 2)
    with pytest.raises(DomainError):
        fisher_z_pvalue(1.5, 100, 0)


def test_ols_exact_line():
    x = np.linspace(-1, 1, 50)
    fit = ols_fit(1, [0], np.column_stack([x, 2 * x + 1]))
    assert fit.intercept == pytest.approx(1.0)
    assert fit.coefficients[0] == pytest.approx(2.0)
    assert fit.residual_variance == pytest.approx(0.0, abs=1e-20)


def test_ols_no_parents():
    y = np.array([1.0, 2.0, 4.0, 9.0])
    fit = ols_fit(0, [], y[:, None])
    assert fit.intercept == pytest.approx(y.mean())
    assert fit.residual_variance == pytest.approx(y.var())


def test_ols_recovers_generating_coefficients():
    rng = np.random.default_rng(4)
    n = 5000
    x1, x2 = rng.normal(size=(2, n))
    y = 0.3 * x1 + 0.4 * x2 + rng.normal(scale=0.1, size=n)
    fit = ols_fit(2, [0, 1], np.column_stack([x1, x2, y]))
    assert fit.coefficients[0] == pytest.approx(0.3, abs=0.02)
    assert fit.coefficients[1] == pytest.approx(0.4, abs=0.02)


def test_ols_matches_lstsq():
    rng = np.random.default_rng(5)
    M = rng.normal(size=(60, 4))
    fit = ols_fit(3, [0, 2], M)
    Z = np.column_stack([np.ones(60), M[:, [0, 2]]])
    beta = np.linalg.lstsq(Z, M[:, 3], rcond=None)[0]
    assert (fit.intercept, fit.coefficients[0], fit.coefficients[2]) == pytest.approx(tuple(beta))


def test_bic_prefers_true_edge_and_rejects_cycles():
    rng = np.random.default_rng(6)
    x = rng.normal(size=500)
    M = np.column_stack([x, 2 * x + rng.normal(size=500)])
    assert bic_score(DirectedGraph(2, [(0, 1)]), M) > bic_score(DirectedGraph(2), M)
    with pytest.raises(CycleError):
        bic_score(DirectedGraph(2, [(0, 1), (1, 0)]), M)


def test_bic_closed_form():
    rng = np.random.default_rng(7)
    M = rng.normal(size=(100, 2))
    n = 100
    var = M[:, 0].var()
    ll = -0.5 * n * (math.log(2 * math.pi * var) + 1)
    fit = ols_fit(1, [0], M)
    ll += -0.5 * n * (math.log(2 * math.pi * fit.residual_variance) + 1)
    expected = ll - 0.5 * (2 + 3) * math.log(n)
    assert bic_score(DirectedGraph(2, [(0, 1)]), M) == pytest.approx(expected)


def test_zscore_and_degenerate_column():
    rng = np.random.default_rng(8)
    Z = zscore(rng.normal(3, 5, size=(40, 3)))
    assert np.all(np.abs(Z.mean(axis=0)) < 1e-12)
    assert np.allclose(Z.std(axis=0), 1.0)
    with pytest.raises(DegenerateColumn):
        zscore(np.column_stack([np.ones(10), np.arange(10.0)]))


def test_dataset_csv_round_trip(tmp_path):
    cat = VariableCatalog(["a", "b"])
    X = Dataset(np.random.default_rng(9).normal(size=(30, 2)), cat).standardize()
    path = tmp_path / "x.csv"
    X.to_csv(path)
    back = Dataset.read_csv(path, cat)
    assert back.standardized
    assert np.allclose(back.X, X.X, atol=1e-11)


def test_dataset_rejects_false_standardized_flag():
    with pytest.raises(ValueError):
        Dataset(np.arange(6.0).reshape(3, 2), VariableCatalog(["a", "b"]), standardized=True)
