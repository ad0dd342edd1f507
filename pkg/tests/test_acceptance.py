"""Acceptance suite: one test per release criterion, each printing a verdict.

The replication benchmarks (criteria 3 and 4) run 100 replications each and
take a few minutes; everything else is seconds.  Run with ``pytest -s
tests/test_acceptance.py`` to see the per-criterion lines.
"""

import itertools
import json

import numpy as np
import pytest

from fitr.cli import main as cli_main
from fitr.evaluation import disagreement_rate
from fitr.kernels import KernelSpec, gram_matrix
from fitr.learner import fit
from fitr.objectives import (
    FitConfig,
    SecondaryRuleSet,
    TrialDataset,
    objective_value_and_grad,
    pseudo_outcomes,
    ramp_loss,
    sign_pm1,
)
from fitr.optim import OptimizerSettings, bfgs_minimize, powell_minimize
from fitr.scenarios import (
    generate_covariates,
    oracle_rule,
    optimal_value,
    scenario,
    sensitivity_scenario,
)
from fitr.simbench import run_replications

SEED = 20240801
LINEAR = KernelSpec("linear")


def report(criterion, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    print(f"[criterion {criterion}] {verdict}: {detail}")
    assert ok, detail


# ---------------------------------------------------------------------------
# Criterion 1: oracle agreement rates
# ---------------------------------------------------------------------------


def test_criterion_1_oracle_agreement_rates():
    X = generate_covariates(100_000, 10, SEED)
    checks = []
    for sid, target in (("S1", 0.986), ("S2", 0.945), ("S3", 0.964), ("S4", 0.928)):
        spec = scenario(sid)
        got = 1.0 - disagreement_rate(oracle_rule(spec, 0), oracle_rule(spec, 1), X)
        checks.append((sid, got, target, abs(got - target) <= 0.005))
    sens_targets = {
        1.0: 1.0, 0.9: 0.9857, 0.8: 0.9681, 0.7: 0.9448,
        0.6: 0.9142, 0.5: 0.8756, 0.4: 0.8316,
    }
    for rho, target in sens_targets.items():
        spec = sensitivity_scenario(rho)
        got = 1.0 - disagreement_rate(oracle_rule(spec, 0), oracle_rule(spec, 1), X)
        checks.append((f"rho={rho}", got, target, abs(got - target) <= 0.005))
    worst = max(abs(g - t) for _, g, t, _ in checks)
    report(
        1,
        all(ok for *_, ok in checks),
        f"11 agreement rates within ±0.5pp (worst gap {worst:.4f})",
    )


# ---------------------------------------------------------------------------
# Criterion 2: oracle optimal values
# ---------------------------------------------------------------------------


def test_criterion_2_oracle_optimal_values():
    targets = {
        ("S1", 0): 1.89, ("S1", 1): 2.47,
        ("S2", 0): 1.89, ("S2", 1): 2.33,
        ("S3", 0): 2.12, ("S3", 1): 2.82,
        ("S4", 0): 2.12, ("S4", 1): 2.83,
        ("S5", 2): 1.72, ("S6", 2): 1.72,
        ("S7", 2): 2.18, ("S8", 2): 2.18,
    }
    gaps = {}
    for (sid, k), target in targets.items():
        got = optimal_value(scenario(sid), k, test_size=100_000, seed=SEED)
        gaps[(sid, k)] = abs(got - target)
    worst = max(gaps.values())
    report(
        2,
        all(v <= 0.03 for v in gaps.values()),
        f"12 optimal values within ±0.03 (worst gap {worst:.4f})",
    )


# ---------------------------------------------------------------------------
# Criterion 3: sensitivity rho=1 desk-scale replication
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def rho1_rows():
    return run_replications(
        sensitivity_scenario(1.0), 200, [4], ("sepl", "fitr_ramp"),
        reps=100, kernel_policy="linear", seed=SEED,
    )


def test_criterion_3_sensitivity_rho1_row(rho1_rows):
    sepl = [r for r in rho1_rows if r.method == "sepl"]
    ramp = [r for r in rho1_rows if r.method == "fitr_ramp"]
    assert len(sepl) == len(ramp) == 100
    mis = float(np.mean([r.misclassification for r in sepl]))
    agree_s = 1.0 - float(np.mean([r.disagreement_k2 for r in sepl]))
    agree_r = 1.0 - float(np.mean([r.disagreement_k2 for r in ramp]))
    rmse_s = float(np.sqrt(np.mean([r.value_gap**2 for r in sepl])))
    rmse_r = float(np.sqrt(np.mean([r.value_gap**2 for r in ramp])))
    ok = (
        abs(mis - 0.095) <= 0.03
        and abs(agree_s - 0.905) <= 0.03
        and agree_r - agree_s >= 0.02
        and rmse_r / rmse_s <= 0.75
    )
    report(
        3,
        ok,
        f"sepl mis={mis:.3f} (0.095±0.03), sepl agree={agree_s:.3f} (0.905±0.03), "
        f"ramp gain={agree_r - agree_s:.3f} (>=0.02), "
        f"rmse ratio={rmse_r / rmse_s:.3f} (<=0.75)",
    )


# ---------------------------------------------------------------------------
# Criterion 4: disagreement-vs-ratio trend
# ---------------------------------------------------------------------------


TREND_RATIOS = (0, 2, 4, 8)


@pytest.fixture(scope="module")
def s1_trend_rows():
    return run_replications(
        scenario("S1"), 200, list(TREND_RATIOS), ("sepl", "fitr_ramp"),
        reps=100, kernel_policy="linear", seed=SEED,
    )


def test_criterion_4_trend_reproduction(s1_trend_rows):
    rows = s1_trend_rows

    def series(method):
        out = {}
        for ratio in TREND_RATIOS:
            sub = [r.disagreement_k2 for r in rows if r.method == method and r.ratio == ratio]
            out[ratio] = np.asarray(sub)
        return out

    sepl = series("sepl")
    ramp = series("fitr_ramp")
    # paired standard error of the max-min spread of the sepl curve
    spread = max(np.mean(sepl[r]) for r in sepl) - min(np.mean(sepl[r]) for r in sepl)
    paired_se = max(
        float(np.std(sepl[a] - sepl[b], ddof=1) / 10.0) for a in sepl for b in sepl if a < b
    )
    flat_ok = spread <= max(2.0 * paired_se, 1e-12)
    drop = float(np.mean(ramp[0]) - np.mean(ramp[8]))
    ok = flat_ok and drop >= 0.015
    report(
        4,
        ok,
        f"sepl spread={spread:.4f} (<=2 paired se), "
        f"ramp drop r0->r8={drop:.4f} (>=0.015)",
    )


def test_agreement_monotonicity_invariant(s1_trend_rows):
    # fusing toward a rule pre-estimated on 4n external samples strictly
    # reduces mean disagreement relative to the separate learner
    rows = s1_trend_rows
    sepl = np.mean([r.disagreement_k2 for r in rows if r.method == "sepl" and r.ratio == 4])
    ramp = np.mean([r.disagreement_k2 for r in rows if r.method == "fitr_ramp" and r.ratio == 4])
    assert ramp < sepl
    ramp8 = np.mean([r.disagreement_k2 for r in rows if r.method == "fitr_ramp" and r.ratio == 8])
    assert ramp8 < sepl


def test_sepl_misclassification_band(s1_trend_rows):
    # benchmark operating point: separate-learner misclassification on S1
    mis = np.mean(
        [r.misclassification for r in s1_trend_rows if r.method == "sepl" and r.ratio == 0]
    )
    assert 0.05 < mis < 0.15


# ---------------------------------------------------------------------------
# Criterion 5: property suite
# ---------------------------------------------------------------------------


def _random_dataset(rng, n=12, d=2, K=2):
    X = rng.normal(size=(n, d))
    A = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    R = rng.normal(size=(n, K)) + 1.0
    return TrialDataset(X, A, R, np.full(n, 0.5))


def _check_mu_zero_reduction(rng):
    rules = SecondaryRuleSet((lambda X: sign_pm1(np.atleast_2d(X)[:, 0]),))
    grid_X = rng.normal(size=(150, 2))
    for _ in range(20):
        data = _random_dataset(rng, n=14)
        sepl = fit(data, FitConfig("sepl", lam=0.03), None, LINEAR)
        intl = fit(data, FitConfig("fitr_intl", lam=0.03, mu=0.0, omega=(1.0,)), rules, LINEAR)
        ramp = fit(
            data, FitConfig("fitr_ramp", lam=0.03, mu=0.0, kappa=0.5, omega=(1.0,)),
            rules, LINEAR,
        )
        if not (
            np.array_equal(intl.decide(grid_X), sepl.decide(grid_X))
            and np.array_equal(ramp.decide(grid_X), sepl.decide(grid_X))
        ):
            return False
    return True


def _check_pseudo_outcome_identity(rng):
    n, mu = 8, 0.7
    X = rng.normal(size=(n, 1))
    A = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    R = rng.normal(size=(n, 2)) + 0.5
    data = TrialDataset(X, A, R, np.full(n, 0.5))
    omega = np.array([0.9])
    ftilde = sign_pm1(X[:, 0] - 0.2)
    rules = SecondaryRuleSet((lambda x: sign_pm1(np.atleast_2d(x)[:, 0] - 0.2),))
    r_tilde = pseudo_outcomes(data, rules, mu, omega)
    diffs = []
    for signs in itertools.product((-1.0, 1.0), repeat=n):
        s = np.asarray(signs)
        fused = np.mean(R[:, 0] * (A * s < 0) / 0.5) + mu / n * np.sum(
            omega[0] * (s * ftilde < 0)
        )
        pseudo = np.mean(r_tilde * (A * s < 0) / 0.5)
        diffs.append(fused - pseudo)
    return np.max(np.abs(np.asarray(diffs) - diffs[0])) < 1e-10


def _check_gradients(rng):
    for _ in range(50):
        method = rng.choice(["sepl", "fitr_intl"])
        n = int(rng.integers(5, 9))
        data = _random_dataset(rng, n=n)
        gram = data.X @ data.X.T
        rules = SecondaryRuleSet((lambda X: sign_pm1(np.atleast_2d(X)[:, 0]),))
        cfg = FitConfig(str(method), lam=0.04, mu=0.3, omega=(0.6,))
        x = rng.normal(size=n + 1)
        _, grad = objective_value_and_grad(x, data, cfg, rules, gram)
        h = 1e-5
        fd = np.zeros_like(x)
        for j in range(x.size):
            e = np.zeros_like(x)
            e[j] = h
            vp, _ = objective_value_and_grad(x + e, data, cfg, rules, gram)
            vm, _ = objective_value_and_grad(x - e, data, cfg, rules, gram)
            fd[j] = (vp - vm) / (2 * h)
        if np.max(np.abs(grad - fd)) / max(1.0, np.max(np.abs(fd))) >= 1e-5:
            return False
    return True


def _check_convexity(rng):
    data = _random_dataset(rng, n=9)
    gram = data.X @ data.X.T
    cfg = FitConfig("sepl", lam=0.02)
    for _ in range(200):
        u = rng.normal(size=data.n + 1)
        v = rng.normal(size=data.n + 1)
        f_u, _ = objective_value_and_grad(u, data, cfg, None, gram)
        f_v, _ = objective_value_and_grad(v, data, cfg, None, gram)
        f_mid, _ = objective_value_and_grad((u + v) / 2, data, cfg, None, gram)
        if f_mid > (f_u + f_v) / 2 + 1e-10:
            return False
    return True


def _check_ramp_indicator():
    for kappa in (1.0, 0.5, 0.2, 0.05):
        if ramp_loss(-1.0, kappa) != 1.0 or ramp_loss(1.0, kappa) != 0.0:
            return False
    return True


def _check_omega_flip(rng):
    data = _random_dataset(rng, n=10)
    gram = data.X @ data.X.T
    rule = lambda X: sign_pm1(np.atleast_2d(X)[:, 0])
    flipped = lambda X: -sign_pm1(np.atleast_2d(X)[:, 0])
    for method, kappa in (("fitr_ramp", 0.3), ("fitr_intl", None)):
        pos = FitConfig(method, lam=0.02, mu=0.6, kappa=kappa, omega=(0.8,))
        neg = FitConfig(method, lam=0.02, mu=0.6, kappa=kappa, omega=(-0.8,))
        for _ in range(5):
            x = rng.normal(size=data.n + 1)
            v_pos, _ = objective_value_and_grad(x, data, pos, SecondaryRuleSet((rule,)), gram)
            v_neg, _ = objective_value_and_grad(x, data, neg, SecondaryRuleSet((flipped,)), gram)
            if v_pos != v_neg:
                return False
    return True


def _check_gram_psd(rng):
    for n in (10, 30, 50):
        X = rng.normal(size=(n, 5))
        g = gram_matrix(KernelSpec("gaussian", 0.8), X, X)
        if np.linalg.eigvalsh(g).min() < -1e-8 * np.trace(g):
            return False
    return True


def _check_bfgs_quadratics(rng):
    settings = OptimizerSettings(wolfe_c1=1e-12, wolfe_c2=1e-10, grad_tol=1e-10)
    for m in (2, 5, 10):
        B = rng.normal(size=(m, m))
        H = B @ B.T + m * np.eye(m)
        c = rng.normal(size=m)
        exact = np.linalg.solve(H, -c)

        def fg(x):
            return float(0.5 * x @ H @ x + c @ x), H @ x + c

        res = bfgs_minimize(fg, np.zeros(m), settings)
        if res.iterations > m + 2 or np.max(np.abs(res.x - exact)) > 1e-8:
            return False
    return True


def _check_powell_monotone(rng):
    B = rng.normal(size=(5, 5))
    H = B @ B.T + np.eye(5)
    fun = lambda x: float(0.5 * x @ H @ x + np.sum(np.abs(x)))
    res = powell_minimize(fun, rng.normal(size=5))
    return bool((np.diff(res.sweep_values) <= 1e-12).all())


def _check_manifest_rerun(tmp_path):
    cfg = {
        "scenario": "S1", "n": 40, "reps": 2, "external_ratios": [0, 1],
        "methods": ["sepl", "fitr_intl"], "seed": 5, "test_size": 1000,
        "lambdas": [0.01], "mus": [1.0], "folds": 2,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    for sub in ("r1", "r2"):
        code = cli_main(["simulate", "--config", str(path), "--out", str(tmp_path / sub)])
        if code != 0:
            return False
    return (
        (tmp_path / "r1" / "results.csv").read_bytes()
        == (tmp_path / "r2" / "results.csv").read_bytes()
        and (tmp_path / "r1" / "summary.json").read_bytes()
        == (tmp_path / "r2" / "summary.json").read_bytes()
    )


def test_criterion_5_property_suite(tmp_path):
    rng = np.random.default_rng(SEED)
    checks = {
        "mu0-reduction": _check_mu_zero_reduction(rng),
        "pseudo-outcome-identity": _check_pseudo_outcome_identity(rng),
        "analytic-gradients": _check_gradients(rng),
        "convexity-probe": _check_convexity(rng),
        "ramp-indicator": _check_ramp_indicator(),
        "omega-flip": _check_omega_flip(rng),
        "gram-psd": _check_gram_psd(rng),
        "bfgs-quadratics": _check_bfgs_quadratics(rng),
        "powell-monotone": _check_powell_monotone(rng),
        "manifest-rerun": _check_manifest_rerun(tmp_path),
    }
    failed = [k for k, ok in checks.items() if not ok]
    report(5, not failed, f"10 property checks green" if not failed else f"failed: {failed}")


# ---------------------------------------------------------------------------
# Criterion 6: end-to-end on a real-data-shaped synthetic CSV
# ---------------------------------------------------------------------------


def _write_trial_csv(path, rng, n=186, d=7):
    """Synthetic randomized trial shaped like the motivating depression study:
    seven covariates, three outcomes whose optimal rules are related."""
    X = rng.normal(size=(n, d))
    X[:, 2] = (rng.random(n) < 0.5).astype(float)  # one binary covariate
    A = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    signal = 0.4 + 0.9 * X[:, 0] - 0.7 * X[:, 1] + 0.3 * X[:, 3]
    noise = rng.multivariate_normal(
        np.zeros(3), 0.1 + 0.4 * np.eye(3), size=n
    )
    R1 = 6.0 + 0.8 * X[:, 0] + A * signal + noise[:, 0]
    R2 = 3.0 + 0.5 * X[:, 1] + A * (0.9 * signal + 0.1) + noise[:, 1]
    R3 = 1.0 + 0.3 * X[:, 4] + A * (0.5 * signal - 0.2 * X[:, 4]) + noise[:, 2]
    header = [f"x{j+1}" for j in range(d)] + ["A", "R1", "R2", "R3"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            row = [f"{v:.9g}" for v in X[i]] + [str(int(A[i]))] + [
                f"{v:.9g}" for v in (R1[i], R2[i], R3[i])
            ]
            fh.write(",".join(row) + "\n")


def test_criterion_6_real_data_shaped_pipeline(tmp_path):
    rng = np.random.default_rng(SEED + 6)
    csv_path = tmp_path / "trial.csv"
    _write_trial_csv(csv_path, rng)

    fit_cfg = {"data": str(csv_path), "method": "fitr_intl", "seed": SEED}
    (tmp_path / "fit.json").write_text(json.dumps(fit_cfg))
    assert cli_main(["fit", "--config", str(tmp_path / "fit.json"),
                     "--out", str(tmp_path / "model")]) == 0
    report_json = json.loads((tmp_path / "model" / "report.json").read_text())
    assert "coefficients" in report_json
    assert len(report_json["coefficients"]) == 8  # intercept + 7 covariates

    eval_cfg = {
        "data": str(csv_path), "methods": ["sepl", "fitr_intl"], "seed": SEED,
        "eval_folds": 5,
    }
    (tmp_path / "eval.json").write_text(json.dumps(eval_cfg))
    assert cli_main(["evaluate", "--config", str(tmp_path / "eval.json"),
                     "--out", str(tmp_path / "eval")]) == 0
    payload = json.loads((tmp_path / "eval" / "evaluation.json").read_text())
    sepl = payload["methods"]["sepl"]
    intl = payload["methods"]["fitr_intl"]
    ok = intl["mean"] >= sepl["mean"] - sepl["se"]
    report(
        6,
        ok,
        f"fitr_intl cv value {intl['mean']:.3f} >= sepl {sepl['mean']:.3f} "
        f"- 1 se ({sepl['se']:.3f}) on a 7-covariate n=186 synthetic trial",
    )
