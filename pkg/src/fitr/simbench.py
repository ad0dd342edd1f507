"""Replication harness for the simulation benchmarks.

Each replication draws a shared evaluation set, a primary training sample,
and (per external-size ratio) fresh external samples from which the
secondary-outcome rules are pre-estimated.  Every method within a
replication is tuned, fitted, and evaluated on the identical test draw, so
method comparisons are paired; the test-set checksum recorded in each row
makes that pairing verifiable.

Replications run on independent sub-streams keyed by (seed, replication,
purpose), so results are bit-identical regardless of worker count.
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .kernels import KernelSpec, median_bandwidth
from .learner import TuningGrid, default_grid, fit, tune
from .objectives import SecondaryRuleSet, TrialDataset, outcome_weights
from .rng import substream
from .scenarios import (
    ScenarioSpec,
    generate_covariates,
    generate_dataset,
    mean_outcome,
    oracle_rule,
    scenario_from_id,
)

METHOD_ORDER = ("sepl", "fitr_ramp", "fitr_intl")

RESULT_COLUMNS = (
    "replication_id",
    "scenario",
    "method",
    "kernel",
    "n",
    "ratio",
    "lambda",
    "mu",
    "kappa",
    "value_gap",
    "misclassification",
    "disagreement_k2",
    "disagreement_k3",
    "wall_ms",
    "test_checksum",
)


@dataclass(frozen=True)
class ReplicationResult:
    """One (replication, ratio, method) result row."""

    replication_id: int
    scenario: str
    method: str
    kernel: str
    n: int
    ratio: float
    lam: float
    mu: float
    kappa: float | None
    value_gap: float
    misclassification: float
    disagreement_k2: float
    disagreement_k3: float | None
    wall_ms: float
    test_checksum: str
    failed: bool = False


def _normalize_ratios(ratios):
    out = []
    for r in ratios:
        if isinstance(r, str):
            r = float("inf") if r.lower() in ("inf", "infinity") else float(r)
        r = float(r)
        if r < 0 or np.isnan(r):
            raise ValueError(f"invalid external ratio {r}")
        out.append(r)
    return tuple(sorted(set(out)))


def _normalize_methods(methods):
    methods = [str(m) for m in methods]
    for m in methods:
        if m not in METHOD_ORDER:
            raise ValueError(f"unknown method {m!r}")
    return tuple(m for m in METHOD_ORDER if m in methods)


def _resolve_kernel(policy: str, X) -> KernelSpec:
    if policy == "linear":
        return KernelSpec("linear")
    if policy in ("gaussian", "auto-median"):
        return KernelSpec("gaussian", bandwidth_sigma=median_bandwidth(X))
    raise ValueError(f"unknown kernel policy {policy!r}")


def _checksum(X: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(X).tobytes()).hexdigest()[:12]


def _metrics(decisions, test_X, spec, oracle_decisions, v_star):
    value = float(np.mean(mean_outcome(spec, 0, test_X, decisions)))
    out = {
        "value_gap": v_star - value,
        "misclassification": float(np.mean(decisions != oracle_decisions[0])),
        "disagreement_k2": float(np.mean(decisions != oracle_decisions[1])),
        "disagreement_k3": (
            float(np.mean(decisions != oracle_decisions[2])) if spec.K >= 3 else None
        ),
    }
    return out


def _failure_row(rep, spec, method, kernel_kind, n, ratio, checksum):
    return ReplicationResult(
        replication_id=rep,
        scenario=spec.id,
        method=method,
        kernel=kernel_kind,
        n=n,
        ratio=ratio,
        lam=float("nan"),
        mu=float("nan"),
        kappa=None,
        value_gap=float("nan"),
        misclassification=float("nan"),
        disagreement_k2=float("nan"),
        disagreement_k3=float("nan") if spec.K >= 3 else None,
        wall_ms=0.0,
        test_checksum=checksum,
        failed=True,
    )


def _replicate(task) -> list[ReplicationResult]:
    (scenario_id, n, ratios, methods, seed, rep, kernel_policy, grid, test_size) = task
    spec = scenario_from_id(scenario_id)
    grid = grid if grid is not None else default_grid(n)

    test_X = generate_covariates(test_size, spec.d, substream(seed, rep, "test"))
    checksum = _checksum(test_X)
    primary = generate_dataset(spec, n, substream(seed, rep, "primary"))
    kernel = _resolve_kernel(kernel_policy, primary.X)

    oracles = [oracle_rule(spec, k) for k in range(spec.K)]
    oracle_decisions = [o(test_X) for o in oracles]
    v_star = float(np.mean(mean_outcome(spec, 0, test_X, oracle_decisions[0])))

    # one fold seed per replication: every method tunes on the same folds
    cv_seed = int(substream(seed, rep, "cv").integers(2**31))

    # the separate learner is external-data-free: tune and fit once
    t0 = time.perf_counter()
    sepl_cfg, _ = tune(primary, "sepl", grid, None, kernel, seed=cv_seed)
    sepl_rule = fit(primary, sepl_cfg, None, kernel)
    sepl_wall = (time.perf_counter() - t0) * 1000.0
    sepl_metrics = _metrics(sepl_rule.decide(test_X), test_X, spec, oracle_decisions, v_star)

    omega = outcome_weights(primary) if spec.K >= 2 else np.zeros(0)

    rows: list[ReplicationResult] = []
    for ratio in ratios:
        fused_rules = None
        if ratio == float("inf"):
            fused_rules = SecondaryRuleSet(tuple(oracles[1:]), None)
        elif ratio > 0:
            external_n = int(round(ratio * n))
            fitted = []
            for k in range(1, spec.K):
                ext = generate_dataset(
                    spec, external_n, substream(seed, rep, "external", k, f"{ratio:g}")
                )
                ext_view = TrialDataset(ext.X, ext.A, ext.R[:, [k]], ext.propensity)
                ext_grid = replace(grid, lambdas=default_grid(external_n).lambdas)
                ext_cfg, _ = tune(ext_view, "sepl", ext_grid, None, kernel, seed=cv_seed + k)
                fitted.append(fit(ext_view, ext_cfg, None, kernel))
            fused_rules = SecondaryRuleSet(
                tuple(fitted), tuple([external_n] * (spec.K - 1))
            )

        for method in methods:
            if method == "sepl":
                rows.append(
                    ReplicationResult(
                        replication_id=rep, scenario=spec.id, method=method,
                        kernel=kernel.kind, n=n, ratio=ratio,
                        lam=sepl_cfg.lam, mu=0.0, kappa=None,
                        wall_ms=sepl_wall, test_checksum=checksum, **sepl_metrics,
                    )
                )
                continue
            if fused_rules is None:  # ratio 0: fused estimators degenerate
                rows.append(
                    ReplicationResult(
                        replication_id=rep, scenario=spec.id, method=method,
                        kernel=kernel.kind, n=n, ratio=ratio,
                        lam=sepl_cfg.lam, mu=0.0, kappa=None,
                        wall_ms=0.0, test_checksum=checksum, **sepl_metrics,
                    )
                )
                continue
            t0 = time.perf_counter()
            try:
                cfg, _ = tune(
                    primary, method, grid, fused_rules, kernel,
                    seed=cv_seed, omega=omega,
                )
                rule = fit(primary, cfg, fused_rules, kernel, seed=cv_seed)
            except Exception:
                rows.append(
                    _failure_row(rep, spec, method, kernel.kind, n, ratio, checksum)
                )
                continue
            wall = (time.perf_counter() - t0) * 1000.0
            rows.append(
                ReplicationResult(
                    replication_id=rep, scenario=spec.id, method=method,
                    kernel=kernel.kind, n=n, ratio=ratio,
                    lam=cfg.lam, mu=cfg.mu, kappa=cfg.kappa,
                    wall_ms=wall, test_checksum=checksum,
                    **_metrics(rule.decide(test_X), test_X, spec, oracle_decisions, v_star),
                )
            )
    return rows


def run_replications(
    scenario, n: int, external_ratios, methods, reps: int,
    kernel_policy: str = "linear", seed: int = 0,
    grid: TuningGrid | None = None, test_size: int = 100_000,
    workers: int = 1,
) -> list[ReplicationResult]:
    """Run the benchmark and return rows ordered by (replication, ratio, method)."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    scenario_id = scenario.id if isinstance(scenario, ScenarioSpec) else str(scenario)
    ratios = _normalize_ratios(external_ratios)
    methods = _normalize_methods(methods)
    tasks = [
        (scenario_id, n, ratios, methods, seed, rep, kernel_policy, grid, test_size)
        for rep in range(reps)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(_replicate, tasks))
    else:
        per_rep = [_replicate(t) for t in tasks]
    rows = [row for rep_rows in per_rep for row in rep_rows]
    method_rank = {m: i for i, m in enumerate(METHOD_ORDER)}
    rows.sort(key=lambda r: (r.replication_id, r.ratio, method_rank[r.method]))
    return rows


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def true_disagreements(spec: ScenarioSpec, test_size: int = 100_000, seed: int = 0):
    """Monte-Carlo disagreement of the primary oracle with each secondary one."""
    X = generate_covariates(test_size, spec.d, substream(seed, "true-disagreement"))
    d1 = oracle_rule(spec, 0)(X)
    return {
        k + 2: float(np.mean(d1 != oracle_rule(spec, k + 1)(X)))
        for k in range(spec.K - 1)
    }


def summarize(rows: list[ReplicationResult], spec: ScenarioSpec,
              test_size: int = 100_000, seed: int = 0) -> dict:
    """Per-method / per-ratio aggregates plus scenario ground truth."""
    ok = [r for r in rows if not r.failed]
    failed = len(rows) - len(ok)
    methods = sorted({r.method for r in ok}, key=METHOD_ORDER.index)
    ratios = sorted({r.ratio for r in ok})

    def agg(sub):
        gaps = np.array([r.value_gap for r in sub])
        mis = np.array([r.misclassification for r in sub])
        dis2 = np.array([r.disagreement_k2 for r in sub])
        out = {
            "replications": len(sub),
            "rmse": float(np.sqrt(np.mean(gaps**2))),
            "value_gap_mean": float(np.mean(gaps)),
            "misclassification_mean": float(np.mean(mis)),
            "misclassification_sd": float(np.std(mis)),
            "disagreement_k2_mean": float(np.mean(dis2)),
            "disagreement_k2_sd": float(np.std(dis2)),
        }
        if spec.K >= 3:
            dis3 = np.array([r.disagreement_k3 for r in sub])
            out["disagreement_k3_mean"] = float(np.mean(dis3))
            out["disagreement_k3_sd"] = float(np.std(dis3))
        return out

    per_method = {}
    for m in methods:
        sub_m = [r for r in ok if r.method == m]
        per_method[m] = {
            "overall": agg(sub_m),
            "by_ratio": {
                _ratio_key(t): agg([r for r in sub_m if r.ratio == t])
                for t in ratios
                if any(r.ratio == t for r in sub_m)
            },
        }
    return {
        "scenario": spec.id,
        "true_disagreement": {
            f"k{k}": v for k, v in true_disagreements(spec, test_size, seed).items()
        },
        "optimal_values": {
            f"v{k+1}": _mc_optimal(spec, k, test_size, seed) for k in range(spec.K)
        },
        "methods": per_method,
        "failed_rows": failed,
    }


def _mc_optimal(spec, k, test_size, seed):
    X = generate_covariates(test_size, spec.d, substream(seed, "true-optimal", k))
    return float(
        np.mean(
            spec.main_effects[k](X)
            + spec.interaction_scales[k] * np.abs(spec.interaction_factors[k](X))
        )
    )


def _ratio_key(ratio: float) -> str:
    if ratio == float("inf"):
        return "inf"
    if ratio == int(ratio):
        return str(int(ratio))
    return f"{ratio:g}"


def sensitivity_sweep(
    rhos, n: int, ratio, reps: int, seed: int = 0,
    methods=METHOD_ORDER, grid: TuningGrid | None = None,
    kernel_policy: str = "linear", test_size: int = 100_000, workers: int = 1,
):
    """Benchmark the similarity-controlled family across rho values.

    Returns (table, rows): per-rho summary rows with the agreement, RMSE,
    RMSE ratio against the separate learner, and misclassification columns,
    plus the raw replication rows.
    """
    from .scenarios import sensitivity_scenario

    all_rows: list[ReplicationResult] = []
    table = []
    for rho in rhos:
        spec = sensitivity_scenario(rho)
        rows = run_replications(
            spec, n, [ratio], methods, reps, kernel_policy, seed, grid,
            test_size, workers,
        )
        all_rows.extend(rows)
        ok = [r for r in rows if not r.failed]
        X = generate_covariates(
            test_size, spec.d, substream(seed, "true-agreement", spec.id)
        )
        true_agree = float(
            np.mean(oracle_rule(spec, 0)(X) == oracle_rule(spec, 1)(X))
        )
        entry = {"rho": float(rho), "true_agreement": true_agree, "methods": {}}
        rmse_sepl = None
        for m in METHOD_ORDER:
            sub = [r for r in ok if r.method == m]
            if not sub:
                continue
            gaps = np.array([r.value_gap for r in sub])
            agree = 1.0 - np.array([r.disagreement_k2 for r in sub])
            mis = np.array([r.misclassification for r in sub])
            rmse = float(np.sqrt(np.mean(gaps**2)))
            if m == "sepl":
                rmse_sepl = rmse
            entry["methods"][m] = {
                "agreement_mean": float(np.mean(agree)),
                "agreement_sd": float(np.std(agree)),
                "rmse": rmse,
                "rmse_ratio": float(rmse / rmse_sepl) if rmse_sepl else None,
                "misclassification_mean": float(np.mean(mis)),
                "misclassification_sd": float(np.std(mis)),
            }
        table.append(entry)
    return table, all_rows
