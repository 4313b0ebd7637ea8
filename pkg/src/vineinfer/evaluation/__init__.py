"""Scoring rules, dependence diagnostics, baselines and the synthetic study."""

from .baseline import LinearBaseline, linear_baseline_fit, linear_baseline_predict
from .comparison import METHODS, ComparisonResult, predict_method, run_comparison
from .dependence import normal_scores, semi_correlations, tail_weighted_zeta
from .scenarios import SCENARIO_ARRAY, Scenario, generate_scenario, get_scenario
from .scores import ScoreReport, interval_score, mae, rmse, score_predictions

__all__ = [
    "METHODS", "SCENARIO_ARRAY", "ComparisonResult", "LinearBaseline", "Scenario", "ScoreReport",
    "generate_scenario", "get_scenario", "interval_score", "linear_baseline_fit", "linear_baseline_predict",
    "mae", "normal_scores", "predict_method", "rmse", "run_comparison", "score_predictions",
    "semi_correlations", "tail_weighted_zeta",
]
