"""Online repositioning of agents during learning.

A strategy runs learning phases back to back on the same tree. When its
trigger fires, agents are moved to new positions and the next phase starts
from memorized selections:

* convergence trigger + long-term memory: restart from the selections of
  phase-local iteration ``offset``; stop when a phase converges before
  reaching that iteration;
* cost-reduction trigger + short-term memory: restart from the last
  selections as soon as the relative cost drop (slope) falls below the
  threshold; stop when the slope stays flat across a repositioning.

Iteration 0 of every phase counts toward the global iteration budget; it is
the re-aggregation of the restored selections on the new tree.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .learning import LearningEngine, LearningTrace, converged, random_selection
from .metrics import rank_population
from .plans import Population
from .seeding import derive_seed
from .topology import Bijection, SortOrder, TreeTopology, place_by_ranking, random_bijection

SHORT_TERM = "short_term"
LONG_TERM = "long_term"
CONVERGENCE = "convergence"
COST_REDUCTION = "cost_reduction"


@dataclass(frozen=True)
class MemoryScheme:
    kind: str = SHORT_TERM
    offset: int | None = None

    def __post_init__(self):
        if self.kind == LONG_TERM:
            if self.offset is None or self.offset < 1:
                raise ValueError("long-term memory needs an offset >= 1")
        elif self.kind == SHORT_TERM:
            if self.offset is not None:
                raise ValueError("short-term memory takes no offset")
        else:
            raise ValueError(f"unknown memory scheme {self.kind!r}")

    @classmethod
    def short_term(cls) -> "MemoryScheme":
        return cls(SHORT_TERM)

    @classmethod
    def long_term(cls, offset: int) -> "MemoryScheme":
        return cls(LONG_TERM, offset)


@dataclass(frozen=True)
class TriggerCriterion:
    kind: str = CONVERGENCE
    threshold: float | None = None

    def __post_init__(self):
        if self.kind == COST_REDUCTION:
            if self.threshold is None or not 0.0 <= self.threshold <= 1.0:
                raise ValueError("cost-reduction threshold must lie in [0, 1]")
        elif self.kind == CONVERGENCE:
            if self.threshold is not None:
                raise ValueError("the convergence trigger takes no threshold")
        else:
            raise ValueError(f"unknown trigger {self.kind!r}")

    @classmethod
    def convergence(cls) -> "TriggerCriterion":
        return cls(CONVERGENCE)

    @classmethod
    def cost_reduction(cls, threshold: float) -> "TriggerCriterion":
        return cls(COST_REDUCTION, float(threshold))


@dataclass(frozen=True)
class BijectionSource:
    """Where new placements come from: fresh random ones, or one metric-sorted placement."""

    seed: int = 0
    metric: str | None = None
    order: SortOrder = SortOrder.ASCENDING

    def draw(self, pop: Population, tree: TreeTopology, index: int) -> Bijection:
        if self.metric is None:
            return random_bijection(tree, derive_seed(self.seed, "adaptation", index))
        return place_by_ranking(tree, rank_population(self.metric, pop), self.order)


@dataclass(frozen=True)
class StrategyConfig:
    memory: MemoryScheme
    trigger: TriggerCriterion
    total_iterations: int = 100
    bijection_source: BijectionSource = BijectionSource()
    convergence_tolerance: float = 1e-9

    def __post_init__(self):
        if self.total_iterations < 1:
            raise ValueError("total_iterations must be >= 1")

    @classmethod
    def convergence_long_term(cls, offset: int, seed: int = 0, total_iterations: int = 100) -> "StrategyConfig":
        return cls(MemoryScheme.long_term(offset), TriggerCriterion.convergence(), total_iterations, BijectionSource(seed))

    @classmethod
    def cost_reduction_short_term(cls, threshold: float, seed: int = 0, total_iterations: int = 100) -> "StrategyConfig":
        return cls(
            MemoryScheme.short_term(), TriggerCriterion.cost_reduction(threshold), total_iterations, BijectionSource(seed)
        )


@dataclass
class StrategyTrace:
    phases: list[LearningTrace] = field(default_factory=list)
    phase_starts: list[int] = field(default_factory=list)
    adaptation_iterations: list[int] = field(default_factory=list)
    terminated_at: int = -1
    final_cost: float = float("nan")
    reason: str = ""

    @property
    def adaptations(self) -> int:
        return len(self.adaptation_iterations)

    @property
    def global_costs(self) -> list[float]:
        return [c for phase in self.phases for c in phase.cost_per_iteration]

    def cumulative_adaptations(self, horizon: int | None = None) -> np.ndarray:
        """Number of repositionings at or before each global iteration."""
        horizon = self.terminated_at + 1 if horizon is None else horizon
        counts = np.zeros(horizon, dtype=np.int64)
        for it in self.adaptation_iterations:
            if it < horizon:
                counts[it:] += 1
        return counts


def slope(g_prev: float, g_curr: float) -> float:
    """Relative cost drop between consecutive iterations; 0 when the previous cost is 0."""
    if g_prev == 0:
        return 0.0
    return (g_prev - g_curr) / g_prev


def residual(g_prev: float, g_curr: float) -> float:
    return g_prev - g_curr


def memorize(trace: LearningTrace, memory: MemoryScheme) -> tuple[np.ndarray, bool]:
    """Selections to restore in the next phase, and whether the phase ended before the offset."""
    if trace.iterations == 0:
        raise ValueError("cannot memorize from an empty trace")
    if memory.kind == SHORT_TERM:
        return trace.final_selection.copy(), False
    last = trace.iterations - 1
    if memory.offset > last:
        return trace.final_selection.copy(), True
    return trace.selections_per_iteration[memory.offset].copy(), False


def run_strategy(
    pop: Population,
    tree: TreeTopology,
    initial_b: Bijection,
    cfg: StrategyConfig,
    selection: Sequence[int] | None = None,
    seed: int = 0,
    backend: str | None = None,
) -> StrategyTrace:
    """Run phases until the termination rule fires or the iteration budget is spent.

    ``selection`` is the first phase's initial selection; when omitted it is
    drawn at random from ``seed``.
    """
    engine = LearningEngine(pop, tree, initial_b, backend)
    current = np.array(random_selection(pop, seed) if selection is None else selection, dtype=np.int64)
    tol = cfg.convergence_tolerance
    threshold = cfg.trigger.threshold
    out = StrategyTrace()
    used = 0
    previous_ended_flat = False

    while True:
        phase = LearningTrace()
        out.phases.append(phase)
        out.phase_starts.append(used)
        cost = engine.reset(current)
        phase.record(cost, engine.selected, engine.messages_per_iteration)
        used += 1

        triggered = False
        stop = ""
        while used < cfg.total_iterations:
            previous = cost
            cost = engine.step()
            phase.record(cost, engine.selected, engine.messages_per_iteration)
            used += 1
            t = phase.iterations - 1
            flat = converged(previous, cost, tol)
            if flat:
                phase.converged_at = t
            if cfg.memory.kind == SHORT_TERM and t == 1 and flat and previous_ended_flat:
                stop = "flat across repositioning"
                break
            if cfg.trigger.kind == COST_REDUCTION and slope(previous, cost) < threshold:
                triggered = True
                break
            if flat:
                if cfg.trigger.kind == CONVERGENCE:
                    triggered = True
                else:
                    stop = "converged without trigger"
                break
        else:
            stop = "iteration budget spent"

        if triggered and cfg.memory.kind == LONG_TERM and phase.converged_at is not None:
            if phase.converged_at < cfg.memory.offset:
                triggered = False
                stop = "converged before memory offset"
        if triggered and used >= cfg.total_iterations:
            triggered = False
            stop = "iteration budget spent"

        if not triggered:
            out.reason = stop
            break

        previous_ended_flat = phase.converged_at is not None
        current, _ = memorize(phase, cfg.memory)
        out.adaptation_iterations.append(used - 1)
        engine.reposition(cfg.bijection_source.draw(pop, tree, len(out.adaptation_iterations)))

    out.terminated_at = used - 1
    out.final_cost = out.phases[-1].final_cost
    return out


def improvement_ratios(baseline_final_costs: Sequence[float], strategy_final_costs: Sequence[float]) -> tuple[list[float], int]:
    """Per-pair ``(baseline - strategy) / baseline`` and the number of pairs skipped for a zero baseline."""
    if len(baseline_final_costs) != len(strategy_final_costs) or not baseline_final_costs:
        raise ValueError("need equal-length, non-empty cost lists")
    ratios, skipped = [], 0
    for b, s in zip(baseline_final_costs, strategy_final_costs):
        if b == 0:
            skipped += 1
            continue
        ratios.append((b - s) / b)
    return ratios, skipped


def relative_improvement(baseline_final_costs: Sequence[float], strategy_final_costs: Sequence[float]) -> float:
    """Mean relative improvement; positive when the strategy ends lower than the baseline."""
    ratios, _ = improvement_ratios(baseline_final_costs, strategy_final_costs)
    if not ratios:
        raise ValueError("every baseline cost is zero; relative improvement is undefined")
    return float(np.mean(ratios))


def write_adaptation_csv(path, cumulative: np.ndarray, comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "cumulative_adaptations"])
        for it, value in enumerate(cumulative):
            writer.writerow([it, repr(float(value))])
