"""Command-line front end: experiment configs, dataset ingestion, persistence.

Subcommands
-----------
simulate     benchmark replications on a named scenario -> results.csv,
             summary.json, manifest.json, timings.json
sensitivity  the similarity sweep -> same outputs plus sensitivity.json
fit          fit one estimator on a CSV -> model.json, report.json
predict      apply a saved model to new covariates -> decisions.csv
evaluate     cross-validated value comparison of methods on a CSV

Configs are flat JSON documents; unknown keys are rejected.  The log level
is taken from the FITR_LOG environment variable.

Numeric CSV output uses nine significant digits with LF line endings, so
identical manifests reproduce byte-identical files; measured wall times
would break that contract and therefore live in timings.json, while the
results.csv wall_ms column holds a deterministic zero placeholder.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .kernels import KernelSpec, median_bandwidth
from .learner import TuningGrid, default_grid, fit, kfold_split, tune
from .objectives import SecondaryRuleSet, TrialDataset, outcome_weights
from .evaluation import ipw_value
from .simbench import (
    RESULT_COLUMNS,
    ReplicationResult,
    run_replications,
    sensitivity_sweep,
    summarize,
)
from .scenarios import scenario_from_id

log = logging.getLogger("fitr")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

_COMMON_GRID_KEYS = {
    "lambdas": None,  # None -> scaled default for the sample size
    "mus": None,
    "kappas": None,
    "folds": 4,
}

_SCHEMAS = {
    "simulate": {
        "scenario": "S1",
        "n": 200,
        "reps": 100,
        "external_ratios": [0, 1, 2, 4, 8, "inf"],
        "methods": ["sepl", "fitr_ramp", "fitr_intl"],
        "kernel": "linear",
        "seed": 20240801,
        "test_size": 100_000,
        "workers": 1,
        **_COMMON_GRID_KEYS,
    },
    "sensitivity": {
        "rhos": [1, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4],
        "n": 200,
        "ratio": 4,
        "reps": 100,
        "methods": ["sepl", "fitr_ramp", "fitr_intl"],
        "kernel": "linear",
        "seed": 20240801,
        "test_size": 100_000,
        "workers": 1,
        **_COMMON_GRID_KEYS,
    },
    "fit": {
        "data": None,
        "covariates": None,  # None -> every column not otherwise claimed
        "treatment_column": "A",
        "outcome_columns": None,  # None -> single column named R or R1
        "propensity_column": None,
        "propensity": 0.5,
        "method": "sepl",
        "kernel": "linear",
        "kernel_sigma": None,
        "omega": None,
        "seed": 20240801,
        "eval_folds": 5,
        **_COMMON_GRID_KEYS,
    },
    "evaluate": {
        "data": None,
        "covariates": None,
        "treatment_column": "A",
        "outcome_columns": None,
        "propensity_column": None,
        "propensity": 0.5,
        "methods": ["sepl", "fitr_ramp", "fitr_intl"],
        "kernel": "linear",
        "kernel_sigma": None,
        "omega": None,
        "seed": 20240801,
        "eval_folds": 5,
        **_COMMON_GRID_KEYS,
    },
}


def load_config(path: str, command: str, overrides: dict | None = None) -> dict:
    schema = _SCHEMAS[command]
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
    applicable = {k: v for k, v in (overrides or {}).items() if k in schema}
    resolved = {**schema, **raw, **applicable}
    _validate_config(resolved, command)
    return resolved


def _require(cond, field, message):
    if not cond:
        raise ConfigError(f"{field}: {message}")


def _validate_config(cfg: dict, command: str) -> None:
    if "n" in cfg:
        _require(isinstance(cfg["n"], int) and cfg["n"] >= 4, "n", "must be an integer >= 4")
    if "reps" in cfg:
        _require(isinstance(cfg["reps"], int) and cfg["reps"] >= 1, "reps", "must be >= 1")
    if "seed" in cfg:
        _require(isinstance(cfg["seed"], int) and cfg["seed"] >= 0, "seed", "must be a nonnegative integer")
    if "workers" in cfg:
        _require(isinstance(cfg["workers"], int) and cfg["workers"] >= 1, "workers", "must be >= 1")
    if "test_size" in cfg:
        _require(isinstance(cfg["test_size"], int) and cfg["test_size"] >= 100, "test_size", "must be >= 100")
    if "folds" in cfg:
        _require(isinstance(cfg["folds"], int) and cfg["folds"] >= 2, "folds", "must be >= 2")
    if "eval_folds" in cfg:
        _require(isinstance(cfg["eval_folds"], int) and cfg["eval_folds"] >= 2, "eval_folds", "must be >= 2")
    if "kernel" in cfg:
        _require(cfg["kernel"] in ("linear", "gaussian", "auto-median"), "kernel",
                 "must be one of linear, gaussian, auto-median")
    if "scenario" in cfg:
        try:
            scenario_from_id(cfg["scenario"])
        except ValueError as err:
            raise ConfigError(f"scenario: {err}")
    if "methods" in cfg:
        _require(isinstance(cfg["methods"], list) and cfg["methods"], "methods", "must be a non-empty list")
        for m in cfg["methods"]:
            _require(m in ("sepl", "fitr_ramp", "fitr_intl"), "methods", f"unknown method {m!r}")
    if "method" in cfg:
        _require(cfg["method"] in ("sepl", "fitr_ramp", "fitr_intl"), "method", f"unknown method {cfg['method']!r}")
    if "external_ratios" in cfg:
        _require(isinstance(cfg["external_ratios"], list) and cfg["external_ratios"],
                 "external_ratios", "must be a non-empty list")
    if "rhos" in cfg:
        _require(isinstance(cfg["rhos"], list) and cfg["rhos"], "rhos", "must be a non-empty list")
    if "propensity" in cfg and cfg["propensity"] is not None:
        _require(0.0 < cfg["propensity"] < 1.0, "propensity", "must lie in (0, 1)")
    if command in ("fit", "evaluate"):
        _require(isinstance(cfg.get("data"), str) and cfg["data"], "data", "must name a CSV file")
    for key in ("lambdas", "mus", "kappas"):
        if cfg.get(key) is not None:
            _require(isinstance(cfg[key], list) and cfg[key], key, "must be a non-empty list")


def _grid_from_config(cfg: dict, n: int) -> TuningGrid:
    base = default_grid(n, folds=cfg.get("folds", 4))
    return TuningGrid(
        lambdas=tuple(cfg["lambdas"]) if cfg.get("lambdas") else base.lambdas,
        mus=tuple(cfg["mus"]) if cfg.get("mus") else base.mus,
        kappas=tuple(cfg["kappas"]) if cfg.get("kappas") else base.kappas,
        folds=cfg.get("folds", 4),
    )


# ---------------------------------------------------------------------------
# Output formatting
# ---------------------------------------------------------------------------


def format_number(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    return f"{v:.9g}"


# Keys that change how a run executes but not what it computes; they are
# recorded in the manifest but excluded from its hash so outputs stay
# byte-identical across, e.g., worker counts.
_EXECUTION_KEYS = ("workers",)


def manifest_for(command: str, config: dict) -> dict:
    hashed = {k: v for k, v in config.items() if k not in _EXECUTION_KEYS}
    body = {"tool": "fitr", "version": __version__, "command": command, "config": hashed}
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
    manifest_hash = hashlib.sha256(canonical).hexdigest()[:16]
    return {
        "tool": "fitr",
        "version": __version__,
        "command": command,
        "config": config,
        "manifest_hash": manifest_hash,
    }


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_results_csv(path: Path, rows: list[ReplicationResult], manifest_hash: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# manifest_hash={manifest_hash}\n")
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for r in rows:
            record = (
                r.replication_id, r.scenario, r.method, r.kernel, r.n,
                r.ratio, r.lam, r.mu, r.kappa, r.value_gap,
                r.misclassification, r.disagreement_k2, r.disagreement_k3,
                0.0,  # deterministic placeholder; measured times -> timings.json
                r.test_checksum,
            )
            fh.write(",".join(format_number(v) for v in record) + "\n")


def _write_timings(path: Path, rows: list[ReplicationResult], manifest_hash: str) -> None:
    payload = {
        "manifest_hash": manifest_hash,
        "total_wall_ms": float(sum(r.wall_ms for r in rows)),
        "rows": [
            {
                "replication_id": r.replication_id,
                "method": r.method,
                "ratio": format_number(r.ratio),
                "wall_ms": round(r.wall_ms, 3),
            }
            for r in rows
        ],
    }
    _write_json(path, payload)


# ---------------------------------------------------------------------------
# CSV dataset ingestion
# ---------------------------------------------------------------------------


def read_table(path: str) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = [row for row in reader if row and not row[0].startswith("#")]
    except FileNotFoundError:
        raise ConfigError(f"data file not found: {path}")
    if not rows:
        raise ConfigError(f"data: {path} is empty")
    return rows[0], rows[1:]


def _parse_numeric(field: str, row_idx: int, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"column {field!r}, row {row_idx + 1}: not numeric: {raw!r}")


def dataset_from_csv(cfg: dict) -> tuple[TrialDataset, list[str], list[str]]:
    """Build a TrialDataset from a CSV per the config's column declarations.

    Returns (dataset, covariate names, outcome names).  Treatments coded
    {0, 1} are remapped to {-1, +1} with a logged notice.
    """
    header, raw_rows = read_table(cfg["data"])
    a_col = cfg["treatment_column"]
    if a_col not in header:
        raise ConfigError(f"treatment_column: column {a_col!r} not in CSV header")
    prop_col = cfg.get("propensity_column")
    if prop_col is not None and prop_col not in header:
        raise ConfigError(f"propensity_column: column {prop_col!r} not in CSV header")

    if cfg.get("outcome_columns"):
        outcome_cols = list(cfg["outcome_columns"])
        for c in outcome_cols:
            if c not in header:
                raise ConfigError(f"outcome_columns: column {c!r} not in CSV header")
    else:
        outcome_cols = [c for c in header if c == "R" or (c.startswith("R") and c[1:].isdigit())]
        outcome_cols.sort(key=lambda c: int(c[1:]) if c[1:].isdigit() else 0)
        if not outcome_cols:
            raise ConfigError("outcome_columns: none declared and no R* columns found")

    claimed = {a_col, *outcome_cols} | ({prop_col} if prop_col else set())
    if cfg.get("covariates"):
        covariates = list(cfg["covariates"])
        for c in covariates:
            if c not in header:
                raise ConfigError(f"covariates: column {c!r} not in CSV header")
    else:
        covariates = [c for c in header if c not in claimed]
    if not covariates:
        raise ConfigError("covariates: no covariate columns available")

    idx = {c: header.index(c) for c in header}
    n = len(raw_rows)
    if n < 2:
        raise ConfigError("data: need at least two rows")
    X = np.empty((n, len(covariates)))
    A = np.empty(n)
    R = np.empty((n, len(outcome_cols)))
    prop = np.empty(n)
    for i, row in enumerate(raw_rows):
        if len(row) != len(header):
            raise ConfigError(f"data: row {i + 1} has {len(row)} fields, header has {len(header)}")
        for j, c in enumerate(covariates):
            X[i, j] = _parse_numeric(c, i, row[idx[c]])
        A[i] = _parse_numeric(a_col, i, row[idx[a_col]])
        for j, c in enumerate(outcome_cols):
            R[i, j] = _parse_numeric(c, i, row[idx[c]])
        prop[i] = (
            _parse_numeric(prop_col, i, row[idx[prop_col]])
            if prop_col
            else cfg["propensity"]
        )

    values = set(np.unique(A))
    if values <= {0.0, 1.0}:
        log.info("treatment column %r coded {0,1}; remapping to {-1,+1}", a_col)
        A = 2.0 * A - 1.0
    elif not values <= {-1.0, 1.0}:
        bad = float(sorted(values - {-1.0, 1.0, 0.0})[0])
        row_idx = int(np.flatnonzero(A == bad)[0])
        raise ConfigError(
            f"treatment_column: row {row_idx + 1} has value {bad:g}; must be -1/+1 or 0/1"
        )
    bad_prop = (prop <= 0.0) | (prop >= 1.0)
    if bad_prop.any():
        row_idx = int(np.flatnonzero(bad_prop)[0])
        raise ConfigError(f"propensity: row {row_idx + 1} outside (0, 1)")
    return TrialDataset(X, A, R, prop), covariates, outcome_cols


def _resolve_kernel_config(cfg: dict, X: np.ndarray) -> KernelSpec:
    if cfg["kernel"] == "linear":
        return KernelSpec("linear")
    sigma = cfg.get("kernel_sigma")
    if sigma is None:
        sigma = median_bandwidth(X)
    return KernelSpec("gaussian", bandwidth_sigma=float(sigma))


# ---------------------------------------------------------------------------
# Shared fitting helpers (real-data pathway)
# ---------------------------------------------------------------------------


def _fit_secondary_rules(data: TrialDataset, grid: TuningGrid, kernel, seed: int):
    """Pre-estimate one separate-learning rule per secondary outcome column."""
    fitted = []
    for k in range(1, data.n_outcomes):
        view = TrialDataset(data.X, data.A, data.R[:, [k]], data.propensity)
        cfg, _ = tune(view, "sepl", grid, None, kernel, seed=seed + k)
        fitted.append(fit(view, cfg, None, kernel))
    return SecondaryRuleSet(tuple(fitted), tuple([data.n] * (data.n_outcomes - 1)))


def _tuned_fit(data, method, grid, kernel, seed, omega_cfg=None):
    """Tune and fit one method on a dataset, returning (rule, config, rules)."""
    if method == "sepl":
        cfg, _ = tune(data, "sepl", grid, None, kernel, seed=seed)
        return fit(data, cfg, None, kernel), cfg, None
    if data.n_outcomes < 2 and omega_cfg is None:
        raise ConfigError(
            "method: fused methods need secondary outcome columns or an omega config"
        )
    rules = _fit_secondary_rules(data, grid, kernel, seed)
    omega = np.asarray(omega_cfg, dtype=float) if omega_cfg else outcome_weights(data)
    if omega.size != len(rules):
        raise ConfigError("omega: length must match the number of secondary outcomes")
    cfg, _ = tune(data, method, grid, rules, kernel, seed=seed, omega=omega)
    return fit(data, cfg, rules, kernel, seed=seed), cfg, rules


def _cross_validated_value(data, method, grid, kernel, seed, omega_cfg, folds):
    """Outer k-fold cross-fitted normalized IPW value (mean, sd, se, folds)."""
    values = []
    for train_idx, valid_idx in kfold_split(data.n, folds, seed):
        train, valid = data.subset(train_idx), data.subset(valid_idx)
        rule, _, _ = _tuned_fit(train, method, grid, kernel, seed, omega_cfg)
        values.append(ipw_value(valid, rule))
    values = np.asarray(values)
    return {
        "folds": [float(v) for v in values],
        "mean": float(np.mean(values)),
        "sd": float(np.std(values, ddof=1)),
        "se": float(np.std(values, ddof=1) / np.sqrt(len(values))),
    }


def _osfa_values(data: TrialDataset) -> dict:
    """Value of the two one-size-fits-all policies."""
    out = {}
    for arm, label in ((1.0, "all_plus"), (-1.0, "all_minus")):
        concordant = data.A == arm
        if not concordant.any():
            out[label] = None
            continue
        inv = concordant / data.propensity
        out[label] = float((data.R[:, 0] @ inv) / np.sum(inv))
    return out


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_simulate(config_path: str, out_dir: str, overrides: dict) -> int:
    cfg = load_config(config_path, "simulate", overrides)
    spec = scenario_from_id(cfg["scenario"])
    grid = _grid_from_config(cfg, cfg["n"])
    manifest = manifest_for("simulate", cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = run_replications(
        spec, cfg["n"], cfg["external_ratios"], cfg["methods"], cfg["reps"],
        kernel_policy=cfg["kernel"], seed=cfg["seed"], grid=grid,
        test_size=cfg["test_size"], workers=cfg["workers"],
    )
    write_results_csv(out / "results.csv", rows, manifest["manifest_hash"])
    summary = summarize(rows, spec, cfg["test_size"], cfg["seed"])
    summary["manifest_hash"] = manifest["manifest_hash"]
    _write_json(out / "summary.json", summary)
    _write_json(out / "manifest.json", manifest)
    _write_timings(out / "timings.json", rows, manifest["manifest_hash"])
    failed = sum(r.failed for r in rows)
    if failed:
        log.error("%d replication rows failed", failed)
        return 3
    return 0


def cmd_sensitivity(config_path: str, out_dir: str, overrides: dict) -> int:
    cfg = load_config(config_path, "sensitivity", overrides)
    grid = _grid_from_config(cfg, cfg["n"])
    manifest = manifest_for("sensitivity", cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    table, rows = sensitivity_sweep(
        cfg["rhos"], cfg["n"], cfg["ratio"], cfg["reps"], seed=cfg["seed"],
        methods=tuple(cfg["methods"]), grid=grid, kernel_policy=cfg["kernel"],
        test_size=cfg["test_size"], workers=cfg["workers"],
    )
    write_results_csv(out / "results.csv", rows, manifest["manifest_hash"])
    _write_json(
        out / "sensitivity.json",
        {"manifest_hash": manifest["manifest_hash"], "table": table},
    )
    _write_json(out / "manifest.json", manifest)
    _write_timings(out / "timings.json", rows, manifest["manifest_hash"])
    failed = sum(r.failed for r in rows)
    return 3 if failed else 0


def cmd_fit(config_path: str, out_dir: str, overrides: dict) -> int:
    cfg = load_config(config_path, "fit", overrides)
    data, covariates, outcomes = dataset_from_csv(cfg)
    kernel = _resolve_kernel_config(cfg, data.X)
    grid = _grid_from_config(cfg, data.n)
    manifest = manifest_for("fit", cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rule, fit_cfg, rules = _tuned_fit(
        data, cfg["method"], grid, kernel, cfg["seed"], cfg.get("omega")
    )
    model = {
        "manifest_hash": manifest["manifest_hash"],
        "version": __version__,
        "method": cfg["method"],
        "kernel": {
            "kind": kernel.kind,
            "bandwidth_sigma": kernel.bandwidth_sigma,
            "include_intercept": kernel.include_intercept,
        },
        "covariates": covariates,
        "anchors": rule.anchors.tolist(),
        "alpha": rule.alpha.tolist(),
        "intercept": rule.intercept,
        "config": {
            "lambda": fit_cfg.lam,
            "mu": fit_cfg.mu,
            "kappa": fit_cfg.kappa,
            "omega": list(fit_cfg.omega) if fit_cfg.omega else None,
        },
    }
    _write_json(out / "model.json", model)

    report = {
        "manifest_hash": manifest["manifest_hash"],
        "method": cfg["method"],
        "outcomes": outcomes,
        "n": data.n,
        "cv_value": _cross_validated_value(
            data, cfg["method"], grid, kernel, cfg["seed"], cfg.get("omega"),
            cfg["eval_folds"],
        ),
        "osfa": _osfa_values(data),
        "training_value": ipw_value(data, rule),
    }
    if kernel.kind == "linear":
        coefs = rule.linear_coefficients()
        report["coefficients"] = {
            "intercept": float(coefs[0]),
            **{name: float(c) for name, c in zip(covariates, coefs[1:])},
        }
    _write_json(out / "report.json", report)
    _write_json(out / "manifest.json", manifest)
    return 0


def load_model(path: str):
    from .learner import DecisionRule

    try:
        with open(path, encoding="utf-8") as fh:
            model = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"model file not found: {path}")
    kernel = KernelSpec(
        model["kernel"]["kind"],
        model["kernel"]["bandwidth_sigma"],
        model["kernel"]["include_intercept"],
    )
    rule = DecisionRule(
        kernel=kernel,
        anchors=np.asarray(model["anchors"], dtype=float),
        alpha=np.asarray(model["alpha"], dtype=float),
        intercept=float(model["intercept"]),
        method_tag=model.get("method", ""),
    )
    return rule, model


def cmd_predict(model_path: str, data_path: str, out_path: str) -> int:
    rule, model = load_model(model_path)
    header, raw_rows = read_table(data_path)
    covariates = model["covariates"]
    missing = [c for c in covariates if c not in header]
    if missing:
        raise ConfigError(f"covariates: column {missing[0]!r} not in CSV header")
    idx = [header.index(c) for c in covariates]
    X = np.empty((len(raw_rows), len(covariates)))
    for i, row in enumerate(raw_rows):
        for j, col in enumerate(idx):
            X[i, j] = _parse_numeric(covariates[j], i, row[col])

    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# manifest_hash={model['manifest_hash']}\n")
        fh.write("decision,value\n")
        if len(raw_rows):
            values = rule.decision_values(X)
            decisions = rule.decide(X)
            for d, v in zip(decisions, values):
                fh.write(f"{format_number(int(d))},{format_number(v)}\n")
    return 0


def cmd_evaluate(config_path: str, out_dir: str, overrides: dict) -> int:
    cfg = load_config(config_path, "evaluate", overrides)
    data, covariates, outcomes = dataset_from_csv(cfg)
    kernel = _resolve_kernel_config(cfg, data.X)
    grid = _grid_from_config(cfg, data.n)
    manifest = manifest_for("evaluate", cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    per_method = {}
    for method in cfg["methods"]:
        per_method[method] = _cross_validated_value(
            data, method, grid, kernel, cfg["seed"], cfg.get("omega"),
            cfg["eval_folds"],
        )
    payload = {
        "manifest_hash": manifest["manifest_hash"],
        "n": data.n,
        "outcomes": outcomes,
        "methods": per_method,
        "osfa": _osfa_values(data),
    }
    _write_json(out / "evaluation.json", payload)
    _write_json(out / "manifest.json", manifest)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fitr",
        description="Treatment-rule learning fused toward secondary-outcome rules",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--workers", type=int, default=None, help="override worker count")
        p.add_argument("--reps", type=int, default=None, help="override replication count")
        return p

    with_common(sub.add_parser("simulate", help="run benchmark replications"))
    with_common(sub.add_parser("sensitivity", help="run the similarity sweep"))
    with_common(sub.add_parser("fit", help="fit a rule on a CSV dataset"))
    with_common(sub.add_parser("evaluate", help="cross-validated value comparison"))
    predict = sub.add_parser("predict", help="apply a saved model to new data")
    predict.add_argument("--model", required=True, help="model.json from fit")
    predict.add_argument("--data", required=True, help="CSV of new covariates")
    predict.add_argument("--out", default="decisions.csv", help="output CSV path")
    return parser


def _overrides(args) -> dict:
    out = {}
    for key in ("seed", "workers", "reps"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("FITR_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out, _overrides(args))
        if args.command == "sensitivity":
            return cmd_sensitivity(args.config, args.out, _overrides(args))
        if args.command == "fit":
            return cmd_fit(args.config, args.out, _overrides(args))
        if args.command == "evaluate":
            return cmd_evaluate(args.config, args.out, _overrides(args))
        if args.command == "predict":
            return cmd_predict(args.model, args.data, args.out)
    except (ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
