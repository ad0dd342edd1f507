"""Policy-value estimation and rule-comparison metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .objectives import TrialDataset
from .rng import substream


class DegeneratePolicyError(ValueError):
    """No sample received the treatment the rule recommends."""


def as_decision_fn(rule):
    """Normalize a DecisionRule or plain callable into a decision function."""
    if hasattr(rule, "decide"):
        return rule.decide
    if callable(rule):
        return rule
    raise TypeError(f"not a decision rule: {rule!r}")


def ipw_value(data: TrialDataset, rule) -> float:
    """Normalized inverse-probability-weighted value of the primary outcome.

    sum_i R_i1 1{A_i = d_i} / pi_i divided by sum_i 1{A_i = d_i} / pi_i,
    where d_i is the rule's recommendation for sample i.
    """
    decisions = as_decision_fn(rule)(data.X)
    concordant = data.A == np.ravel(decisions)
    if not np.any(concordant):
        raise DegeneratePolicyError(
            "no sample follows the recommended policy; value undefined"
        )
    inv = concordant / data.propensity
    return float((data.R[:, 0] @ inv) / np.sum(inv))


def disagreement_rate(rule_a, rule_b, Xtest) -> float:
    """Fraction of test rows where the two rules recommend differently."""
    Xtest = np.atleast_2d(np.asarray(Xtest, dtype=float))
    if Xtest.shape[0] == 0:
        raise ValueError("empty test matrix")
    da = np.ravel(as_decision_fn(rule_a)(Xtest))
    db = np.ravel(as_decision_fn(rule_b)(Xtest))
    return float(np.mean(da * db < 0))


def mc_value(rule, scenario, outcome_k: int, test_size: int = 100_000,
             seed: int = 0, include_noise: bool = False) -> float:
    """Monte-Carlo value of a rule under a scenario's generative law.

    Draws covariates, follows the rule, and averages the outcome for index
    ``outcome_k`` (0-based).  The mean-zero noise term is omitted by default,
    which changes nothing in expectation but shrinks the Monte-Carlo error;
    pass include_noise=True to restore it.
    """
    from .scenarios import generate_covariates, mean_outcome, noise_draws

    rng = substream(seed, "mc-value")
    X = generate_covariates(test_size, scenario.d, rng)
    decisions = np.ravel(as_decision_fn(rule)(X))
    values = mean_outcome(scenario, outcome_k, X, decisions)
    if include_noise:
        values = values + noise_draws(scenario, test_size, rng)[:, outcome_k]
    return float(np.mean(values))


def rmse(value_gaps) -> float:
    """Root mean square of per-replication value gaps."""
    gaps = np.ravel(np.asarray(value_gaps, dtype=float))
    if gaps.size == 0:
        raise ValueError("rmse needs at least one value gap")
    return float(np.sqrt(np.mean(gaps**2)))


@dataclass(frozen=True)
class EvalReport:
    """Metric bundle for one fitted rule."""

    value_estimate: float
    disagreement: dict[int, float] = field(default_factory=dict)
    misclassification: float | None = None
    value_gap: float | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.value_estimate):
            raise ValueError("value estimate must be finite")
        for k, rate in self.disagreement.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"disagreement rate for outcome {k} outside [0, 1]")
        if self.misclassification is not None and not (
            0.0 <= self.misclassification <= 1.0
        ):
            raise ValueError("misclassification rate outside [0, 1]")
