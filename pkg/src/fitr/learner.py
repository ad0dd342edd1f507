"""Fit/predict surface and cross-validated hyperparameter tuning.

``fit`` assembles preprocessing, kernel, objective, and solver into one of
the three estimators.  Linear-kernel problems are solved in primal
coordinates (the complexity penalty equals the squared coefficient norm and
the optimum lies in the span of the data, so the primal and kernel-expansion
solutions coincide); the returned rule then anchors its expansion on the
standard basis vectors.  Gaussian-kernel problems keep the full expansion
over the training rows.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import evaluation
from .kernels import KernelSpec, gram_matrix
from .objectives import (
    EMPTY_RULES,
    FitConfig,
    SecondaryRuleSet,
    TrialDataset,
    build_objective,
    outcome_weights,
    sign_pm1,
)
from .optim import OptimizationError, bfgs_minimize, powell_minimize
from .rng import substream


class FitError(RuntimeError):
    """Optimizer failure during a fit; carries the solver status."""

    def __init__(self, message: str, status: str):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class DecisionRule:
    """A fitted decision function f(x) = sum_i alpha_i k(x, anchor_i) + b."""

    kernel: KernelSpec
    anchors: np.ndarray
    alpha: np.ndarray
    intercept: float
    method_tag: str = ""
    config_used: FitConfig | None = None

    def decision_values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.anchors.shape[1]:
            raise ValueError(
                f"covariate dimension {X.shape[1]} does not match "
                f"anchors of dimension {self.anchors.shape[1]}"
            )
        return gram_matrix(self.kernel, X, self.anchors) @ self.alpha + self.intercept

    def decide(self, X) -> np.ndarray:
        return sign_pm1(self.decision_values(X))

    def linear_coefficients(self) -> np.ndarray:
        """(intercept, slopes) of a linear-kernel rule."""
        if self.kernel.kind != "linear":
            raise ValueError("coefficients are only defined for the linear kernel")
        return np.append(self.intercept, self.alpha @ self.anchors)


def predict(rule: DecisionRule, Xnew):
    """Decision values and treatment recommendations for new covariates."""
    values = rule.decision_values(Xnew)
    return values, sign_pm1(values)


def _solve_parts(data: TrialDataset, kernel: KernelSpec):
    """Feature map, penalty matrix, and anchors for the chosen kernel."""
    if kernel.kind == "linear":
        return data.X, np.eye(data.d), np.eye(data.d)
    gram = gram_matrix(kernel, data.X, data.X)
    return gram, gram, data.X


def fit(
    data: TrialDataset,
    config: FitConfig,
    rules: SecondaryRuleSet | None = None,
    kernel: KernelSpec = KernelSpec("linear"),
    seed: int = 0,
) -> DecisionRule:
    """Fit one estimator and return its decision rule.

    The smooth objectives are solved by BFGS; the ramp objective by Powell,
    optionally restarted from perturbed copies of the initial point
    (``config.optimizer.extra_starts``) keeping the best objective.
    """
    rules = rules if rules is not None else EMPTY_RULES
    features, penalty, anchors = _solve_parts(data, kernel)
    with_intercept = kernel.include_intercept
    fun_grad, value_only = build_objective(
        data, config, rules, features, penalty, with_intercept
    )

    dim = features.shape[1] + (1 if with_intercept else 0)
    settings = config.optimizer
    if settings.initial_point is not None:
        x0 = np.asarray(settings.initial_point, dtype=float)
        if x0.shape != (dim,):
            raise ValueError(f"initial point must have dimension {dim}")
    else:
        x0 = np.zeros(dim)

    try:
        if value_only is None:
            result = bfgs_minimize(fun_grad, x0, settings)
        else:
            result = powell_minimize(value_only, x0, settings)
            rng = substream(seed, "ramp-starts")
            for _ in range(settings.extra_starts):
                start = x0 + rng.uniform(-0.1, 0.1, size=dim)
                candidate = powell_minimize(value_only, start, settings)
                if candidate.fval < result.fval:
                    result = candidate
    except OptimizationError as err:
        raise FitError(f"optimizer failed: {err}", status="non_finite") from err

    x = result.x
    if with_intercept:
        alpha, intercept = x[:-1], float(x[-1])
    else:
        alpha, intercept = x, 0.0
    return DecisionRule(
        kernel=kernel,
        anchors=np.asarray(anchors, dtype=float),
        alpha=alpha,
        intercept=intercept,
        method_tag=config.method,
        config_used=config,
    )


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TuningGrid:
    """Hyperparameter grid for the two-stage tuning protocol."""

    lambdas: tuple[float, ...]
    mus: tuple[float, ...] = (0.0,)
    kappas: tuple[float, ...] = (1.0,)
    folds: int = 4

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "mus", tuple(float(v) for v in self.mus))
        object.__setattr__(self, "kappas", tuple(float(v) for v in self.kappas))
        if not (self.lambdas and self.mus and self.kappas):
            raise ValueError("grid lists must be non-empty")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")


def default_grid(n: int, folds: int = 4) -> TuningGrid:
    """Default grids, scaled so the complexity penalty spans weak through
    strong regularization at the benchmark sample sizes."""
    return TuningGrid(
        lambdas=tuple(v / n for v in (0.2, 2.0, 10.0, 40.0)),
        mus=(0.5, 1.0, 2.0, 4.0),
        kappas=(0.1, 0.5, 1.0),
        folds=folds,
    )


def kfold_split(n: int, folds: int, seed: int = 0):
    """Seeded shuffle then contiguous partition into `folds` validation sets."""
    if not 2 <= folds <= n:
        raise ValueError(f"folds must lie in [2, {n}], got {folds}")
    perm = substream(seed, "kfold").permutation(n)
    parts = np.array_split(perm, folds)
    splits = []
    for i in range(folds):
        valid = np.sort(parts[i])
        train = np.sort(np.concatenate([p for j, p in enumerate(parts) if j != i]))
        splits.append((train, valid))
    return splits


@dataclass(frozen=True)
class CvEntry:
    """One evaluated grid point: config, mean held-out value, fold detail."""

    config: FitConfig
    mean_value: float
    fold_values: tuple[float, ...]
    failed: bool
    stage: int


# Fold fits only need to rank configurations, so they run with relaxed
# solver tolerances; the final refit uses the config's own (tight) settings.
CV_F_TOL = 1e-6
CV_LINE_TOL = 1e-3


def _relaxed(config: FitConfig) -> FitConfig:
    opt = config.optimizer
    return replace(
        config,
        optimizer=replace(
            opt, f_tol=max(opt.f_tol, CV_F_TOL), line_tol=max(opt.line_tol, CV_LINE_TOL)
        ),
    )


def _cv_value(train: TrialDataset, valid: TrialDataset, config: FitConfig,
              rules, kernel, warm_starts: dict, key: int):
    """Fit on the training fold, value on the held-out fold; -inf on failure."""
    try:
        rule = fit(train, _relaxed(config), rules, kernel)
    except (FitError, FloatingPointError, np.linalg.LinAlgError):
        return -np.inf
    if rule.kernel.include_intercept:
        warm_starts[key] = tuple(np.append(rule.alpha, rule.intercept))
    else:
        warm_starts[key] = tuple(rule.alpha)
    try:
        return evaluation.ipw_value(valid, rule)
    except evaluation.DegeneratePolicyError:
        return -np.inf


def tune(
    data: TrialDataset,
    method: str,
    grid: TuningGrid,
    rules: SecondaryRuleSet | None = None,
    kernel: KernelSpec = KernelSpec("linear"),
    seed: int = 0,
    omega=None,
):
    """Two-stage cross-validated selection of (lambda, mu, kappa).

    Stage 1 tunes lambda alone on the plain separate learner; stage 2 keeps
    that lambda fixed and tunes mu (and kappa for the ramp method) on the
    requested estimator.  The criterion is the mean held-out normalized IPW
    value of the primary outcome; exact ties break toward smaller mu, then
    smaller lambda, then larger kappa.  Returns (best_config, cv_table).
    """
    if method not in ("sepl", "fitr_ramp", "fitr_intl"):
        raise ValueError(f"unknown method {method!r}")
    rules = rules if rules is not None else EMPTY_RULES
    fused = method != "sepl" and len(rules) > 0
    if method != "sepl" and len(rules) == 0:
        raise ValueError(f"{method} requires secondary rules for tuning")
    if fused:
        omega = outcome_weights(data) if omega is None else np.ravel(omega)
        if omega.size != len(rules):
            raise ValueError("omega must match the number of secondary rules")
        omega = tuple(float(w) for w in omega)

    if not 2 <= grid.folds <= data.n:
        raise ValueError(f"folds must lie in [2, {data.n}]")
    splits = kfold_split(data.n, grid.folds, seed)
    fold_data = [(data.subset(tr), data.subset(va)) for tr, va in splits]

    table: list[CvEntry] = []

    def evaluate_config(config, stage, warm_starts=None):
        chain = warm_starts if warm_starts is not None else {}
        values = []
        for f, (train, valid) in enumerate(fold_data):
            cfg = config
            if f in chain:
                cfg = replace(
                    config,
                    optimizer=replace(config.optimizer, initial_point=chain[f]),
                )
            values.append(_cv_value(train, valid, cfg, rules, kernel, chain, f))
        finite = np.isfinite(values)
        mean = float(np.mean(values)) if finite.all() else -np.inf
        table.append(CvEntry(config, mean, tuple(values), not finite.all(), stage))
        return mean

    # stage 1: lambda alone, separate learning
    best_lam, best_lam_value = None, -np.inf
    for lam in sorted(grid.lambdas):
        mean = evaluate_config(FitConfig("sepl", lam), stage=1)
        if mean > best_lam_value:
            best_lam, best_lam_value = lam, mean
    if best_lam is None or not np.isfinite(best_lam_value):
        best_lam = min(grid.lambdas)

    if method == "sepl" or not fused:
        return FitConfig("sepl", best_lam), table

    # stage 2: mu (and kappa) with lambda fixed
    if method == "fitr_intl":
        stage2 = [(mu, None) for mu in sorted(grid.mus)]
    else:
        stage2 = []
        for mu in sorted(grid.mus):
            if mu == 0.0:
                stage2.append((0.0, max(grid.kappas)))
            else:
                stage2.extend((mu, kappa) for kappa in sorted(grid.kappas, reverse=True))

    warm: dict[int, tuple[float, ...]] = {}
    best_cfg, best_value, best_key = None, -np.inf, None
    for mu, kappa in stage2:
        config = FitConfig(method, best_lam, mu=mu, kappa=kappa, omega=omega)
        mean = evaluate_config(config, stage=2, warm_starts=warm)
        # tie-break: smaller mu, then larger kappa
        key = (-mean, mu, -(kappa if kappa is not None else 0.0))
        if best_key is None or key < best_key:
            best_cfg, best_value, best_key = config, mean, key
    if best_cfg is None or not np.isfinite(best_value):
        best_cfg = FitConfig(method, best_lam, mu=0.0,
                             kappa=max(grid.kappas) if method == "fitr_ramp" else None,
                             omega=omega)
    return best_cfg, table
