"""Individualized treatment rules fused toward secondary-outcome rules."""

from .evaluation import (
    DegeneratePolicyError,
    EvalReport,
    disagreement_rate,
    ipw_value,
    mc_value,
    rmse,
)
from .kernels import KernelSpec, gram_matrix, kernel_eval, median_bandwidth
from .learner import (
    DecisionRule,
    FitError,
    TuningGrid,
    default_grid,
    fit,
    kfold_split,
    predict,
    tune,
)
from .objectives import (
    FitConfig,
    PreprocessedRewards,
    SecondaryRuleSet,
    TrialDataset,
    fit_main_effect,
    logistic_loss,
    objective_value_and_grad,
    outcome_weights,
    preprocess_rewards,
    pseudo_outcomes,
    ramp_loss,
    sign_pm1,
)
from .optim import (
    OptimizationError,
    OptimizerSettings,
    OptimResult,
    bfgs_minimize,
    brent_line_min,
    powell_minimize,
)
from .scenarios import (
    ScenarioSpec,
    generate_covariates,
    generate_dataset,
    oracle_rule,
    optimal_value,
    scenario,
    scenario_from_id,
    sensitivity_scenario,
)

__version__ = "0.1.0"
