import numpy as np
import pytest

from fitr.evaluation import disagreement_rate
from fitr.scenarios import (
    generate_covariates,
    generate_dataset,
    mean_outcome,
    nonlinear_factor_printed_form,
    noise_draws,
    oracle_rule,
    optimal_value,
    scenario,
    scenario_from_id,
    sensitivity_scenario,
)


def test_covariate_marginals():
    X = generate_covariates(100_000, 10, 0)
    assert abs(X[:, 0].mean()) < 4 / np.sqrt(100_000) * 2
    assert abs(X[:, 1].mean()) < 4 / np.sqrt(100_000) * 2


def test_covariate_x3_correlation():
    # X3 = 0.8 X3' + X1: corr(X3, X1) = 1/sqrt(1.64)
    X = generate_covariates(100_000, 10, 1)
    got = np.corrcoef(X[:, 2], X[:, 0])[0, 1]
    assert got == pytest.approx(1 / np.sqrt(1.64), abs=0.01)


def test_covariates_deterministic():
    a = generate_covariates(500, 10, 42)
    b = generate_covariates(500, 10, 42)
    assert np.array_equal(a, b)


def test_covariates_dimension_guard():
    with pytest.raises(ValueError):
        generate_covariates(10, 2, 0)


def test_dataset_treatment_balance():
    ds = generate_dataset(scenario("S1"), 100_000, 2)
    assert abs(ds.A.mean()) < 0.01
    assert set(np.unique(ds.A)) == {-1.0, 1.0}
    assert (ds.propensity == 0.5).all()


def test_dataset_noise_covariance():
    spec = scenario("S1")
    ds = generate_dataset(spec, 100_000, 3)
    # exact noise recovery: subtract the known mean structure
    eps = ds.R - np.column_stack(
        [mean_outcome(spec, k, ds.X, ds.A) for k in range(spec.K)]
    )
    cov = np.cov(eps.T)
    np.testing.assert_allclose(cov, [[0.2, 0.1], [0.1, 0.2]], atol=0.01)
    assert np.abs(eps.mean(axis=0)).max() < 0.01


def test_dataset_noiseless_flag():
    spec = scenario("S2")
    ds = generate_dataset(spec, 200, 4, noiseless=True)
    expected = np.column_stack(
        [mean_outcome(spec, k, ds.X, ds.A) for k in range(spec.K)]
    )
    np.testing.assert_array_equal(ds.R, expected)


def test_noise_draw_shape_and_determinism():
    spec = scenario("S5")
    a = noise_draws(spec, 100, 5)
    b = noise_draws(spec, 100, 5)
    assert a.shape == (100, 3)
    assert np.array_equal(a, b)


def test_oracle_rule_at_origin():
    spec = scenario("S1")
    assert oracle_rule(spec, 0)(np.zeros((1, 10)))[0] == 1.0


def test_oracle_agreements_match_benchmarks():
    # agreement rates P(f1* f2* > 0): S1 98.6, S2 94.5, S3 96.4, S4 92.8 (pct)
    targets = {"S1": 0.986, "S2": 0.945, "S3": 0.964, "S4": 0.928}
    X = generate_covariates(100_000, 10, 6)
    for sid, target in targets.items():
        spec = scenario(sid)
        dis = disagreement_rate(oracle_rule(spec, 0), oracle_rule(spec, 1), X)
        assert 1.0 - dis == pytest.approx(target, abs=0.005), sid


def test_sensitivity_agreements_match_benchmarks():
    targets = {
        1.0: 1.0,
        0.9: 0.9857,
        0.8: 0.9681,
        0.7: 0.9448,
        0.6: 0.9142,
        0.5: 0.8756,
        0.4: 0.8316,
    }
    X = generate_covariates(100_000, 10, 7)
    for rho, target in targets.items():
        spec = sensitivity_scenario(rho)
        dis = disagreement_rate(oracle_rule(spec, 0), oracle_rule(spec, 1), X)
        assert 1.0 - dis == pytest.approx(target, abs=0.005), rho


def test_optimal_values_match_benchmarks():
    # (V1*, V2*) for S1-S4 and V3* for the three-outcome variants
    two = {"S1": (1.89, 2.47), "S2": (1.89, 2.33), "S3": (2.12, 2.82), "S4": (2.12, 2.83)}
    for sid, (v1, v2) in two.items():
        spec = scenario(sid)
        assert optimal_value(spec, 0, seed=8) == pytest.approx(v1, abs=0.03), sid
        assert optimal_value(spec, 1, seed=8) == pytest.approx(v2, abs=0.03), sid
    for sid, v3 in (("S5", 1.72), ("S6", 1.72), ("S7", 2.18), ("S8", 2.18)):
        assert optimal_value(scenario(sid), 2, seed=8) == pytest.approx(v3, abs=0.03), sid


def test_three_outcome_scenarios_extend_two_outcome_ones():
    s1, s5 = scenario("S1"), scenario("S5")
    assert s5.K == 3 and s1.K == 2
    X = generate_covariates(1000, 10, 9)
    A = np.ones(1000)
    for k in range(2):
        np.testing.assert_array_equal(
            mean_outcome(s1, k, X, A), mean_outcome(s5, k, X, A)
        )


def test_printed_nonlinear_form_is_degenerate():
    # the rejected sign reading collapses both oracle rules to constant -1
    spec = scenario("S3", printed_nonlinear=True)
    X = generate_covariates(5000, 10, 10)
    assert (oracle_rule(spec, 0)(X) == -1.0).all()
    assert (oracle_rule(spec, 1)(X) == -1.0).all()
    factor = nonlinear_factor_printed_form(2.3)(X)
    assert factor.max() < 0


def test_scenario_from_id_roundtrip():
    assert scenario_from_id("S3").id == "S3"
    assert scenario_from_id("SENS:0.7").params["rho"] == 0.7
    with pytest.raises(ValueError):
        scenario_from_id("S9")


def test_scenario_registry_parameters():
    assert scenario("S1").params["gamma1"] == 1.8
    assert scenario("S2").params["gamma1"] == 1.4
    assert scenario("S3").params["gamma2"] == 2.3
    assert scenario("S4").params["gamma2"] == 2.4
    spec = scenario("S7")
    assert spec.interaction_scales == (1.0, 1.5, 1.5)
