"""Strategy evaluation grid: repositioning strategies against fixed-placement baselines."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .adaptation import StrategyConfig, improvement_ratios, run_strategy
from .benchmark import BenchmarkSample
from .learning import LearningConfig, random_selection, run_phase
from .parallel import run_parallel
from .plans import Population
from .seeding import derive_seed
from .topology import TreeTopology

CONVERGENCE_LONG_TERM = "convergence-long-term"
COST_REDUCTION_SHORT_TERM = "cost-reduction-short-term"

DEFAULT_OFFSETS = tuple(range(1, 21))
DEFAULT_THRESHOLDS = tuple(round(0.1 * i, 1) for i in range(1, 10))
DEFAULT_PERCENTILES = (0.1, 0.5, 0.9)


@dataclass(frozen=True)
class StrategySetting:
    strategy: str
    parameter: float

    def config(self, seed: int, total_iterations: int) -> StrategyConfig:
        if self.strategy == CONVERGENCE_LONG_TERM:
            return StrategyConfig.convergence_long_term(int(self.parameter), seed, total_iterations)
        if self.strategy == COST_REDUCTION_SHORT_TERM:
            return StrategyConfig.cost_reduction_short_term(self.parameter, seed, total_iterations)
        raise ValueError(f"unknown strategy {self.strategy!r}")

    @property
    def label(self) -> str:
        if self.strategy == CONVERGENCE_LONG_TERM:
            return f"{self.strategy}_offset{int(self.parameter)}"
        return f"{self.strategy}_threshold{self.parameter:g}"


def strategy_grid(offsets=DEFAULT_OFFSETS, thresholds=DEFAULT_THRESHOLDS) -> list[StrategySetting]:
    return [StrategySetting(CONVERGENCE_LONG_TERM, o) for o in offsets] + [
        StrategySetting(COST_REDUCTION_SHORT_TERM, t) for t in thresholds
    ]


@dataclass(frozen=True)
class Baseline:
    percentile: float
    bijection: object
    selection: np.ndarray
    final_cost: float


@dataclass(frozen=True)
class RepetitionResult:
    setting: StrategySetting
    percentile: float
    repetition: int
    final_cost: float
    adaptations: int
    terminated_at: int
    cumulative: np.ndarray


def make_baselines(pop, tree, sample: BenchmarkSample, percentiles, total_iterations, backend=None) -> list[Baseline]:
    """Placements at the given percentiles of the sample, run without repositioning."""
    out = []
    for p in percentiles:
        b, sel_seed = sample.placement(tree, sample.nearest_rank(p))
        selection = random_selection(pop, sel_seed)
        cfg = LearningConfig(max_iterations=total_iterations, initial_selection=tuple(selection))
        trace = run_phase(pop, tree, b, cfg, backend=backend)
        out.append(Baseline(p, b, selection, trace.final_cost))
    return out


def _one_repetition(shared: dict, job) -> RepetitionResult:
    setting, bi, rep = job
    baseline = shared["baselines"][bi]
    seed = derive_seed(shared["seed"], "strategy", setting.label, f"{baseline.percentile:g}", rep)
    cfg = setting.config(seed, shared["total_iterations"])
    trace = run_strategy(
        shared["pop"], shared["tree"], baseline.bijection, cfg, selection=baseline.selection, backend=shared["backend"]
    )
    return RepetitionResult(
        setting,
        baseline.percentile,
        rep,
        trace.final_cost,
        trace.adaptations,
        trace.terminated_at,
        trace.cumulative_adaptations(shared["total_iterations"]),
    )


def evaluate_strategies(
    pop: Population,
    tree: TreeTopology,
    sample: BenchmarkSample,
    settings: list[StrategySetting],
    percentiles=DEFAULT_PERCENTILES,
    repetitions: int = 100,
    total_iterations: int = 100,
    seed: int = 0,
    workers: int = 1,
    backend: str | None = None,
) -> tuple[list[Baseline], list[RepetitionResult]]:
    baselines = make_baselines(pop, tree, sample, percentiles, total_iterations, backend)
    jobs = [(s, bi, rep) for s in settings for bi in range(len(baselines)) for rep in range(repetitions)]
    shared = {
        "pop": pop,
        "tree": tree,
        "baselines": baselines,
        "seed": seed,
        "total_iterations": total_iterations,
        "backend": backend,
    }
    return baselines, run_parallel(_one_repetition, jobs, shared, workers)


def summarize(baselines: list[Baseline], results: list[RepetitionResult]) -> list[dict]:
    by_key: dict = {}
    for r in results:
        by_key.setdefault((r.setting, r.percentile), []).append(r)
    base_cost = {b.percentile: b.final_cost for b in baselines}
    rows = []
    for (setting, p), group in by_key.items():
        costs = [r.final_cost for r in group]
        ratios, skipped = improvement_ratios([base_cost[p]] * len(costs), costs)
        rows.append(
            {
                "strategy": setting.strategy,
                "offset_or_threshold": setting.parameter,
                "percentile": p,
                "baseline_cost": base_cost[p],
                "mean_relative_improvement": float(np.mean(ratios)) if ratios else float("nan"),
                "std_relative_improvement": float(np.std(ratios)) if ratios else float("nan"),
                "mean_adaptations": float(np.mean([r.adaptations for r in group])),
                "repetitions": len(group),
                "skipped": skipped,
            }
        )
    return rows


def mean_cumulative_adaptations(results: list[RepetitionResult]) -> dict[StrategySetting, np.ndarray]:
    """Cumulative repositioning counts averaged over repetitions and baseline percentiles."""
    curves: dict = {}
    for r in results:
        curves.setdefault(r.setting, []).append(r.cumulative)
    return {s: np.mean(np.stack(c), axis=0) for s, c in curves.items()}


def write_runs_csv(path, results: list[RepetitionResult], comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["repetition", "strategy", "offset_or_threshold", "percentile", "final_cost", "adaptations", "terminated_at"]
        )
        for r in results:
            writer.writerow(
                [r.repetition, r.setting.strategy, f"{r.setting.parameter:g}", f"{r.percentile:g}",
                 repr(r.final_cost), r.adaptations, r.terminated_at]
            )


def write_improvement_csv(path, rows: list[dict], comment: str | None = None) -> None:
    fields = [
        "strategy",
        "offset_or_threshold",
        "percentile",
        "baseline_cost",
        "mean_relative_improvement",
        "std_relative_improvement",
        "mean_adaptations",
        "repetitions",
        "skipped",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in (row[f] for f in fields)])
