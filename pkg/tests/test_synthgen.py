import json

import numpy as np
import pytest

from kgcausal.catalog import FINANCIAL_CATALOG as CAT
from kgcausal.errors import DegenerateColumn
from kgcausal.graph import is_acyclic
from kgcausal.stats import ols_fit
from kgcausal.synthgen import (EDGE_TABLE, EVENT_LOGITS, GenConfig, GroundTruth, aggregate_cross_section,
                               ar1_mean_variance, event_parent_coefficients, generate_panel, generate_scenarios,
                               ground_truth, load_scenarios, population_covariance, scenarios_json)

EVENTS = ("M_and_A_Event", "Major_Product_Launch", "Regulatory_Change_Event")
GEO = ("China_Revenue_Percent", "US_Revenue_Percent", "Europe_Revenue_Percent")


@pytest.fixture(scope="module")
def big():
    return aggregate_cross_section(generate_panel(GenConfig(n_firms=4000, seed=7)))


def test_panel_shape(panel):
    assert panel.values.shape == (30000, 18)
    assert sorted(set(panel.period)) == list(range(60))


def test_same_seed_same_bytes():
    cfg = GenConfig(n_firms=20, n_periods=12, seed=5)
    assert generate_panel(cfg).to_csv() == generate_panel(cfg).to_csv()
    assert generate_panel(cfg).to_csv() != generate_panel(GenConfig(20, 12, seed=6)).to_csv()


def test_firm_streams_are_stable_under_extension():
    # firm k draws from its own streams, so adding firms leaves earlier ones untouched
    small = generate_panel(GenConfig(n_firms=5, n_periods=10, seed=3))
    large = generate_panel(GenConfig(n_firms=8, n_periods=10, seed=3))
    assert np.array_equal(small.values, large.values[:50])


def test_geographic_shares_sum_to_100(panel):
    total = sum(panel.column(g) for g in GEO) + panel.hidden["Rest_of_World_Revenue_Percent"]
    assert np.allclose(total, 100.0, atol=1e-9)
    assert panel.hidden["Rest_of_World_Revenue_Percent"].min() >= 0


def test_events_are_binary(panel):
    for name in EVENTS:
        assert set(np.unique(panel.column(name))) <= {0.0, 1.0}


def test_clipping_is_rare(panel):
    assert panel.clipped_rows <= 0.01 * panel.n_rows


def test_cross_section_is_standardized(data):
    assert data.X.shape == (500, 18)
    assert np.all(np.abs(data.X.mean(axis=0)) < 1e-9)
    assert np.all(np.abs(data.X.std(axis=0) - 1) < 1e-6)


def test_single_firm_is_degenerate():
    with pytest.raises(DegenerateColumn):
        aggregate_cross_section(generate_panel(GenConfig(n_firms=1)))


def test_config_bounds():
    with pytest.raises(ValueError):
        GenConfig(n_periods=4)
    with pytest.raises(ValueError):
        GenConfig(n_firms=0)


def test_ground_truth_table():
    gt = ground_truth()
    assert len(gt.dag) == 29 and is_acyclic(gt.dag)
    assert all(-0.5 <= c <= 0.5 for c in gt.coefficients.values())
    c = {(CAT.name(u), CAT.name(v)): b for (u, v), b in gt.coefficients.items()}
    assert c["Regulatory_Risk_Score", "Monthly_Return"] == -0.030
    assert c["Regulatory_Risk_Score", "Revenue_Growth_YoY"] == -0.040
    assert c["Revenue_Growth_YoY", "Monthly_Return"] == 0.300
    assert c["Regulatory_Risk_Score", "EBITDA_Margin"] == 0.050
    assert c["EBITDA_Margin", "Monthly_Return"] == 0.400
    assert c["Supplier_Concentration", "Supply_Chain_Risk_Score"] > 0


def test_regulatory_pathway_arithmetic():
    c = {(s, t): b for s, t, b, _ in EDGE_TABLE}
    rr, mr = "Regulatory_Risk_Score", "Monthly_Return"
    channels = (c[rr, "Revenue_Growth_YoY"] * c["Revenue_Growth_YoY", mr]
                + c[rr, "EBITDA_Margin"] * c["EBITDA_Margin", mr] + c[rr, mr])
    assert channels == pytest.approx(-0.022, abs=1e-15)
    # the event moves regulatory risk by its edge coefficient, giving -2.2 bp
    assert c["Regulatory_Change_Event", rr] * channels == pytest.approx(-0.0022, abs=1e-15)


def test_event_coefficients_match_their_moments():
    # event edges are tabulated to 4 decimals from the logistic model's moments
    table = {(s, t): c for s, t, c, _ in EDGE_TABLE}
    derived = event_parent_coefficients()
    assert set(derived) == {(p, e) for e, (_, p, *_r) in EVENT_LOGITS.items() if p is not None}
    for edge, value in derived.items():
        assert table[edge] == pytest.approx(value, abs=5e-5)


def test_ar1_mean_variance_oracle():
    # brute-force variance of the mean of a stationary AR(1) via its covariance matrix
    T, phi = 12, 0.6
    lags = np.abs(np.subtract.outer(np.arange(T), np.arange(T)))
    assert ar1_mean_variance(T, phi) == pytest.approx((phi ** lags).sum() / T ** 2, rel=1e-12)


def test_ground_truth_json_round_trip():
    gt = ground_truth()
    back = GroundTruth.from_json(gt.to_json())
    assert back.dag == gt.dag and back.coefficients == gt.coefficients


def test_population_covariance_is_a_correlation_matrix():
    S = population_covariance()
    assert np.allclose(np.diag(S), 1.0)
    assert np.allclose(S, S.T)
    assert np.linalg.eigvalsh(S).min() > 0


def test_population_covariance_matches_large_sample(big):
    # 5 standard errors of a sample correlation at n = 4000
    emp = np.corrcoef(big.X.T)
    assert np.abs(emp - population_covariance()).max() < 5 / np.sqrt(4000)


def _ols_deviations(X, targets=None):
    gt = ground_truth()
    out = {}
    for j in range(len(CAT)):
        if targets and CAT.name(j) not in targets:
            continue
        parents = gt.dag.parents(j)
        if parents:
            fit = ols_fit(j, parents, X)
            for p in parents:
                out[(CAT.name(p), CAT.name(j))] = fit.coefficients[p] - gt.coefficients[(p, j)]
    return out


def test_monthly_return_regression_recovers_table(data):
    dev = _ols_deviations(data, {"Monthly_Return"})
    assert len(dev) == 5
    assert max(map(abs, dev.values())) <= 0.05, dev


def test_all_structural_equations_within_005(data):
    dev = _ols_deviations(data)
    assert max(map(abs, dev.values())) <= 0.05, {k: round(v, 3) for k, v in dev.items() if abs(v) > 0.05}


def test_population_regression_bias_is_small():
    # exact OLS on the population covariance: only the hidden confounders pull it off the table
    S = population_covariance()
    gt = ground_truth()
    for j in range(len(CAT)):
        parents = list(gt.dag.parents(j))
        if parents:
            beta = np.linalg.solve(S[np.ix_(parents, parents)], S[parents, j])
            for p, b in zip(parents, beta):
                assert b == pytest.approx(gt.coefficients[(p, j)], abs=0.025)


def test_large_sample_recovers_every_coefficient(big):
    dev = _ols_deviations(big)
    assert max(map(abs, dev.values())) <= 0.05


def test_six_scenarios(tmp_path):
    items = generate_scenarios()
    assert len(items) == 6
    specs = {(sc.intervention_var, sc.intervention_value, sc.target_var) for sc, _ in items}
    assert ("Regulatory_Change_Event", 1.0, "Monthly_Return") in specs
    assert ("Market_Risk_Score", 0.3, "Monthly_Return") in specs
    path = tmp_path / "s.json"
    path.write_text(scenarios_json(items))
    assert load_scenarios(path) == [sc for sc, _ in items]
    assert json.loads(path.read_text())[0]["true_effect"] == pytest.approx(items[0][1], abs=1e-12)


def test_scenarios_need_counterfactual_flag():
    with pytest.raises(ValueError):
        generate_scenarios(GenConfig(include_counterfactuals=False))
