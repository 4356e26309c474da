from .battery import BATTERY, battery, mle_variance
from .inequalities import (
    ScorePair,
    constant_learner,
    cramer_rao_check,
    gh_tradeoff_report,
    normal_mean_score,
    normal_variance_score,
)
from .scenario import AsymptoticScenario, Scenario
from .theorems import (
    AsymptoticReport,
    ImprovedLearner,
    StateRecord,
    TheoremReport,
    corollary_check,
    decay_slope,
    equality_condition_check,
    improved_learner,
    lambda_star_estimate,
    relative_regret,
    verify_theorem1,
    verify_theorem2,
)

__all__ = [
    "BATTERY", "battery", "mle_variance",
    "ScorePair", "constant_learner", "cramer_rao_check", "gh_tradeoff_report", "normal_mean_score",
    "normal_variance_score",
    "AsymptoticScenario", "Scenario",
    "AsymptoticReport", "ImprovedLearner", "StateRecord", "TheoremReport", "corollary_check",
    "decay_slope", "equality_condition_check", "improved_learner", "lambda_star_estimate",
    "relative_regret", "verify_theorem1", "verify_theorem2",
]
