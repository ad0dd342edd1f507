"""Surrogate losses, reward preprocessing, and the three training objectives.

The estimators share one weighted-logistic core: rewards are centered by an
ordinary-least-squares main effect, the absolute residual over the propensity
becomes a per-sample weight, and the treatment sign is flipped wherever the
residual is negative.  The fused variants differ in how the pre-estimated
secondary rules enter:

* ``sepl`` ignores them;
* ``fitr_ramp`` adds a ramp-loss disagreement penalty (nonsmooth, value-only);
* ``fitr_intl`` folds agreement into a pseudo outcome, keeping the problem
  smooth and convex.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .optim import OptimizerSettings

METHODS = ("sepl", "fitr_ramp", "fitr_intl")

RIDGE_JITTER = 1e-10


class RankDeficientDesignWarning(UserWarning):
    """Main-effect design was rank deficient; ridge-stabilized solve used."""


def sign_pm1(v) -> np.ndarray:
    """Sign with the global convention sgn(0) = +1."""
    v = np.asarray(v, dtype=float)
    return np.where(v >= 0.0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TrialDataset:
    """One randomized-trial sample: covariates, treatments, outcomes, propensities.

    R has one column per outcome; column 0 is the primary outcome.
    """

    X: np.ndarray
    A: np.ndarray
    R: np.ndarray
    propensity: np.ndarray

    def __post_init__(self) -> None:
        X = _readonly(np.atleast_2d(self.X))
        A = _readonly(np.ravel(self.A))
        R = np.asarray(self.R, dtype=float)
        if R.ndim == 1:
            R = R[:, None]
        R = _readonly(R)
        prop = _readonly(np.ravel(self.propensity))
        n = X.shape[0]
        if n < 2:
            raise ValueError("dataset needs at least two samples")
        if A.shape != (n,) or R.shape[0] != n or prop.shape != (n,):
            raise ValueError("X, A, R, propensity must agree on sample count")
        for name, arr in (("X", X), ("A", A), ("R", R), ("propensity", prop)):
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite entries")
        if not np.all(np.isin(A, (-1.0, 1.0))):
            raise ValueError("treatments must lie in {-1, +1}")
        if np.any(prop <= 0.0) or np.any(prop >= 1.0):
            raise ValueError("propensities must lie strictly inside (0, 1)")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "propensity", prop)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.R.shape[1]

    def subset(self, idx) -> "TrialDataset":
        idx = np.asarray(idx)
        return TrialDataset(
            self.X[idx], self.A[idx], self.R[idx], self.propensity[idx]
        )


@dataclass(frozen=True)
class PreprocessedRewards:
    """Weights and flipped labels feeding the weighted-logistic core."""

    weights: np.ndarray
    labels: np.ndarray
    main_effect_coefs: np.ndarray


@dataclass(frozen=True)
class FitConfig:
    """Method selector plus tuning parameters for one fit.

    omega holds the similarity weight for each secondary rule; negative
    entries are flipped jointly with the corresponding rule during fitting.
    """

    method: str
    lam: float
    mu: float = 0.0
    kappa: float | None = None
    omega: tuple[float, ...] | None = None
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.lam < 0 or self.mu < 0:
            raise ValueError("lam and mu must be nonnegative")
        if self.method == "fitr_ramp":
            if self.kappa is None or self.kappa <= 0:
                raise ValueError("fitr_ramp requires kappa > 0")
        if self.omega is not None:
            object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))


@dataclass(frozen=True)
class SecondaryRuleSet:
    """Pre-estimated binary rules for the secondary outcomes.

    Each rule maps a covariate matrix to decisions in {-1, +1}; fitted
    decision rules participate through their ``decide`` method, closed-form
    rules as plain callables.
    """

    rules: tuple[Callable, ...]
    source_sizes: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.source_sizes is not None:
            sizes = tuple(int(s) for s in self.source_sizes)
            if len(sizes) != len(self.rules):
                raise ValueError("source_sizes must match the number of rules")
            object.__setattr__(self, "source_sizes", sizes)

    def __len__(self) -> int:
        return len(self.rules)

    def decisions(self, X) -> np.ndarray:
        """(n, K-1) matrix of rule outputs, validated to be exactly +-1."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], len(self.rules)))
        for j, rule in enumerate(self.rules):
            fn = rule.decide if hasattr(rule, "decide") else rule
            dec = np.ravel(np.asarray(fn(X), dtype=float))
            if dec.shape != (X.shape[0],) or not np.all(np.isin(dec, (-1.0, 1.0))):
                raise ValueError(f"secondary rule {j} must return values in {{-1, +1}}")
            out[:, j] = dec
        return out


EMPTY_RULES = SecondaryRuleSet(rules=())


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------


def logistic_loss(t):
    """log(1 + exp(-t)), stable for large |t|."""
    t = np.asarray(t, dtype=float)
    out = np.maximum(-t, 0.0) + np.log1p(np.exp(-np.abs(t)))
    return out if out.ndim else float(out)


def logistic_loss_deriv(t):
    """d/dt log(1 + exp(-t)) = -1 / (1 + exp(t))."""
    t = np.asarray(t, dtype=float)
    z = np.exp(-np.abs(t))
    out = np.where(t >= 0, -z / (1.0 + z), -1.0 / (1.0 + z))
    return out if out.ndim else float(out)


def ramp_loss(t, kappa: float):
    """min{1, max{0, 1 - t/kappa}}: 1 for t <= 0, 0 for t >= kappa."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    t = np.asarray(t, dtype=float)
    out = np.clip(1.0 - t / kappa, 0.0, 1.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Reward preprocessing
# ---------------------------------------------------------------------------


def fit_main_effect(X, r) -> np.ndarray:
    """OLS coefficients (intercept first) of r against X.

    A rank-deficient design is solved through ridge-stabilized normal
    equations with a tiny jitter and flagged with a warning.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    r = np.ravel(np.asarray(r, dtype=float))
    design = np.column_stack([np.ones(X.shape[0]), X])
    coefs, _, rank, _ = np.linalg.lstsq(design, r, rcond=None)
    if rank < design.shape[1]:
        warnings.warn(
            "rank-deficient main-effect design; using ridge-stabilized solve",
            RankDeficientDesignWarning,
            stacklevel=2,
        )
        gram = design.T @ design + RIDGE_JITTER * np.eye(design.shape[1])
        coefs = np.linalg.solve(gram, design.T @ r)
    return coefs


def _center_and_flip(X, r, A, propensity) -> PreprocessedRewards:
    coefs = fit_main_effect(X, r)
    fitted = coefs[0] + np.atleast_2d(X) @ coefs[1:]
    resid = np.ravel(r) - fitted
    weights = np.abs(resid) / np.ravel(propensity)
    labels = np.ravel(A) * sign_pm1(resid)
    return PreprocessedRewards(
        weights=weights, labels=labels, main_effect_coefs=coefs
    )


def preprocess_rewards(data: TrialDataset, outcome_index: int = 0) -> PreprocessedRewards:
    """Center one outcome column and build weights/labels for training."""
    if not 0 <= outcome_index < data.n_outcomes:
        raise ValueError(f"outcome_index {outcome_index} out of range")
    return _center_and_flip(
        data.X, data.R[:, outcome_index], data.A, data.propensity
    )


def outcome_weights(data: TrialDataset) -> np.ndarray:
    """Pearson correlation of the primary outcome with each secondary one."""
    if data.n_outcomes < 2:
        raise ValueError("outcome weights need at least two outcome columns")
    R = data.R
    sd = R.std(axis=0)
    if np.any(sd <= 0):
        bad = int(np.argmax(sd <= 0))
        raise ValueError(f"outcome column {bad} has zero variance")
    centered = R - R.mean(axis=0)
    cov = centered[:, 1:].T @ centered[:, 0] / R.shape[0]
    return cov / (sd[0] * sd[1:])


def pseudo_outcomes(
    data: TrialDataset, rules: SecondaryRuleSet, mu: float, omega
) -> np.ndarray:
    """Primary outcome augmented by weighted agreement with secondary rules.

    The augmentation mu * pi_i * sum_k omega_k * sgn(A_i * rule_k(X_i)) is
    invariant to jointly flipping (omega_k, rule_k), so negative weights need
    no special handling here.
    """
    omega = np.ravel(np.asarray(omega, dtype=float))
    if len(rules) != omega.size:
        raise ValueError("rules and omega must have matching length")
    if mu == 0.0 or len(rules) == 0:
        return data.R[:, 0].copy()
    concordance = data.A[:, None] * rules.decisions(data.X)
    return data.R[:, 0] + mu * data.propensity * (concordance @ omega)


# ---------------------------------------------------------------------------
# Training objectives
# ---------------------------------------------------------------------------


def _check_finite_values(f: np.ndarray) -> None:
    if not np.isfinite(f).all():
        idx = int(np.flatnonzero(~np.isfinite(f))[0])
        raise FloatingPointError(f"non-finite decision value at sample {idx}")


def weighted_logistic_objective(features, penalty, w, z, lam, with_intercept=True):
    """Closure (value, gradient) for the smooth weighted-logistic objective.

    ``features`` maps coefficients to decision values (f = features @ beta + b)
    and ``penalty`` is the quadratic-form matrix of the complexity penalty
    lam * beta' penalty beta.  Works for both the kernel expansion
    (features = penalty = Gram) and the primal linear model
    (features = X, penalty = identity).
    """
    features = np.asarray(features, dtype=float)
    penalty = np.asarray(penalty, dtype=float)
    w = np.ravel(np.asarray(w, dtype=float))
    z = np.ravel(np.asarray(z, dtype=float))
    n = features.shape[0]

    def fun_grad(beta_b):
        beta_b = np.asarray(beta_b, dtype=float)
        if with_intercept:
            beta, b = beta_b[:-1], beta_b[-1]
        else:
            beta, b = beta_b, 0.0
        f = features @ beta + b
        _check_finite_values(f)
        pen_vec = penalty @ beta
        value = float(np.mean(w * logistic_loss(z * f)) + lam * (beta @ pen_vec))
        c = w * z * logistic_loss_deriv(z * f) / n
        grad_beta = features.T @ c + 2.0 * lam * pen_vec
        if with_intercept:
            grad = np.append(grad_beta, np.sum(c))
        else:
            grad = grad_beta
        return value, grad

    return fun_grad


def ramp_penalty_term(features, rule_values, omega, mu, kappa, with_intercept=True):
    """Closure adding the ramp disagreement penalty (value only).

    Negative similarity weights are flipped jointly with the corresponding
    rule column so the effective weights are nonnegative.
    """
    features = np.asarray(features, dtype=float)
    rule_values = np.atleast_2d(np.asarray(rule_values, dtype=float))
    omega = np.ravel(np.asarray(omega, dtype=float))
    flip = sign_pm1(omega)
    eff_omega = omega * flip
    eff_rules = rule_values * flip[None, :]
    n = features.shape[0]

    def value(beta_b):
        beta_b = np.asarray(beta_b, dtype=float)
        if with_intercept:
            beta, b = beta_b[:-1], beta_b[-1]
        else:
            beta, b = beta_b, 0.0
        f = features @ beta + b
        _check_finite_values(f)
        margins = f[:, None] * eff_rules
        return float(mu / n * np.sum(ramp_loss(margins, kappa) @ eff_omega))

    return value


def _require_rules(config: FitConfig, rules: SecondaryRuleSet | None):
    if rules is None or len(rules) == 0:
        raise ValueError(f"{config.method} requires a non-empty secondary rule set")
    if config.omega is None or len(config.omega) != len(rules):
        raise ValueError("config.omega must match the number of secondary rules")


def build_objective(data: TrialDataset, config: FitConfig,
                    rules: SecondaryRuleSet | None, features, penalty,
                    with_intercept=True):
    """Assemble the training objective for one parameterization.

    Returns (fun_grad, value_only): the first is the smooth part with its
    analytic gradient, the second is the full nonsmooth objective or None
    when the configured objective is smooth.
    """
    if config.method == "fitr_intl":
        if config.mu > 0:
            _require_rules(config, rules)
            r_tilde = pseudo_outcomes(data, rules, config.mu, config.omega)
        else:
            r_tilde = data.R[:, 0]
        pre = _center_and_flip(data.X, r_tilde, data.A, data.propensity)
    else:
        pre = preprocess_rewards(data, 0)

    features = np.asarray(features, dtype=float)
    penalty = np.asarray(penalty, dtype=float)
    fun_grad = weighted_logistic_objective(
        features, penalty, pre.weights, pre.labels, config.lam, with_intercept
    )
    if config.method != "fitr_ramp" or config.mu == 0.0:
        return fun_grad, None

    _require_rules(config, rules)
    rule_values = rules.decisions(data.X)
    flip = sign_pm1(config.omega)
    eff_omega = np.asarray(config.omega) * flip
    eff_rules = rule_values * flip[None, :]
    n = data.n
    lam, mu, kappa = config.lam, config.mu, config.kappa
    # hot path for Powell: z folded into the design, one matmul per call
    if with_intercept:
        design = np.column_stack([features, np.ones(n)])
    else:
        design = features
    z_design = pre.labels[:, None] * design
    w_over_n = pre.weights / n
    z_rules_over_kappa = (pre.labels[:, None] * eff_rules) / kappa
    if eff_rules.shape[1] == 1:
        ramp_c = mu / n * eff_omega[0]
        ramp_slope = z_rules_over_kappa[:, 0] * ramp_c
    else:
        ramp_slope = None

    def value_only(beta_b):
        zf = z_design @ beta_b
        if not np.isfinite(zf).all():
            _check_finite_values(zf)
        beta = beta_b[:-1] if with_intercept else beta_b
        value = float(w_over_n @ (np.maximum(-zf, 0.0) + np.log1p(np.exp(-np.abs(zf))))
                      ) + lam * float(beta @ (penalty @ beta))
        if ramp_slope is not None:
            value += float(np.sum(np.clip(ramp_c - ramp_slope * zf, 0.0, ramp_c)))
        else:
            margins = zf[:, None] * z_rules_over_kappa
            value += mu / n * float(
                np.clip(1.0 - margins, 0.0, 1.0).sum(axis=0) @ eff_omega
            )
        return value

    return fun_grad, value_only


def objective_value_and_grad(alpha_b, data: TrialDataset, config: FitConfig,
                             rules: SecondaryRuleSet | None, gram):
    """Evaluate the configured objective in the kernel parameterization.

    ``gram`` must be the training Gram matrix and ``alpha_b`` the expansion
    coefficients followed by the intercept.  Smooth objectives return
    (value, gradient); the ramp objective returns (value, None).
    """
    gram = np.asarray(gram, dtype=float)
    if gram.shape != (data.n, data.n):
        raise ValueError("gram must be the n-by-n training Gram matrix")
    alpha_b = np.ravel(np.asarray(alpha_b, dtype=float))
    if alpha_b.size != data.n + 1:
        raise ValueError("alpha_b must hold n expansion weights plus intercept")
    fun_grad, value_only = build_objective(data, config, rules, gram, gram)
    if value_only is None:
        return fun_grad(alpha_b)
    return value_only(alpha_b), None
