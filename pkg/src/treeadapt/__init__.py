"""Tree-structured collective learning with agent repositioning."""

from .adaptation import StrategyConfig, StrategyTrace, relative_improvement, run_strategy
from .benchmark import (
    BenchmarkSample,
    fit_gaussian,
    kde,
    percentile_of,
    rank_fixed_bijections,
    run_random_benchmark,
    silverman_bandwidth,
)
from .learning import LearningConfig, LearningEngine, LearningTrace, global_cost, run_phase
from .metrics import METRIC_NAMES, RankingScore, evaluate_metric, rank_population
from .plans import AgentProfile, DatasetError, Plan, Population, generate_synthetic, load_population, save_population
from .topology import Bijection, SortOrder, TreeTopology, build_balanced_tree, place_by_ranking, random_bijection

__version__ = "0.1.0"

__all__ = [
    "AgentProfile",
    "BenchmarkSample",
    "Bijection",
    "DatasetError",
    "LearningConfig",
    "LearningEngine",
    "LearningTrace",
    "METRIC_NAMES",
    "Plan",
    "Population",
    "RankingScore",
    "SortOrder",
    "StrategyConfig",
    "StrategyTrace",
    "TreeTopology",
    "build_balanced_tree",
    "evaluate_metric",
    "fit_gaussian",
    "generate_synthetic",
    "global_cost",
    "kde",
    "load_population",
    "percentile_of",
    "place_by_ranking",
    "random_bijection",
    "rank_fixed_bijections",
    "rank_population",
    "relative_improvement",
    "run_phase",
    "run_random_benchmark",
    "run_strategy",
    "save_population",
    "silverman_bandwidth",
]
