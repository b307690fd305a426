"""Tree-coordinated collective learning over discrete plans.

Each iteration makes one bottom-up pass and one top-down pass over the tree.

* bottom-up: an agent sums its children's fresh subtree aggregates and picks
  the plan that minimizes the variance of
  ``g_prev - own_previous_subtree + children_sum + plan``. It keeps the new
  subtree configuration only if that beats restoring the whole previous
  subtree selection in the same context. It then sends its subtree aggregate
  to its parent (one message per edge).
* top-down: the root's aggregate becomes the new global response ``g``.
  It travels down the tree together with any "restore previous selection"
  decisions (one message per edge).

The root compares against the previous global cost, so the recorded cost
never increases. Local costs are ignored (lambda = 0).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from .plans import Population
from .seeding import derive_rng
from .topology import Bijection, TreeTopology, apply_bijection


def global_cost(aggregate) -> float:
    """Population variance of the aggregate vector."""
    x = np.asarray(aggregate, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("global cost needs a non-empty vector")
    return float(((x - x.mean()) ** 2).mean())


def recompute_cost_from_selections(pop: Population, selections: Sequence[int]) -> float:
    return global_cost(pop.selected_plans(selections).sum(axis=0))


@dataclass(frozen=True)
class LearningConfig:
    max_iterations: int = 40
    lam: float = 0.0
    convergence_tolerance: float = 1e-9
    seed: int = 0
    initial_selection: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.lam != 0.0:
            raise ValueError("only lambda = 0 (global cost only) is supported")
        if self.convergence_tolerance < 0:
            raise ValueError("convergence_tolerance must be >= 0")
        if self.initial_selection is not None:
            object.__setattr__(self, "initial_selection", tuple(int(i) for i in self.initial_selection))


def random_selection(pop: Population, seed: int) -> np.ndarray:
    return derive_rng(seed, "initial-selection").integers(pop.plan_counts).astype(np.int64)


def initial_selection(pop: Population, cfg: LearningConfig) -> np.ndarray:
    if cfg.initial_selection is None:
        return random_selection(pop, cfg.seed)
    sel = np.array(cfg.initial_selection, dtype=np.int64)
    if sel.shape != (pop.n,) or np.any(sel < 0) or np.any(sel >= pop.plan_counts):
        raise ValueError("initial selection does not fit the population")
    return sel


def converged(previous: float, current: float, tolerance: float) -> bool:
    return abs(previous - current) <= tolerance * abs(previous)


class LearningEngine:
    """Step-wise learning state for one population on one placement.

    ``reset`` establishes iteration 0; each ``step`` runs one full iteration
    and returns the new global cost.
    """

    def __init__(self, pop: Population, tree: TreeTopology, bijection: Bijection, backend: str | None = None):
        if pop.n != tree.n:
            raise ValueError(f"population has {pop.n} agents but tree has {tree.n} nodes")
        self.pop = pop
        self.tree = tree
        self.backend = _backend.resolve(backend)
        self._k = _backend.kernels(self.backend)
        self._plans = np.ascontiguousarray(pop.plan_tensor)
        self._counts = np.ascontiguousarray(pop.plan_counts)
        self._agents = np.arange(pop.n)
        self.messages_per_iteration = 2 * (tree.n - 1)
        self.selected: np.ndarray | None = None
        self.cost = float("nan")
        self.reposition(bijection)

    def reposition(self, bijection: Bijection) -> None:
        """Move agents to new tree positions; the selection must be re-aggregated."""
        view = apply_bijection(self.tree, bijection)
        self.bijection = bijection
        at = bijection.agent_at
        self._order = np.ascontiguousarray(at[self.tree.fill_order])
        self._topdown = np.ascontiguousarray(at)
        self._parent = np.ascontiguousarray(view.parent, dtype=np.int64)
        sizes = np.array([len(c) for c in view.children], dtype=np.int64)
        self._child_ptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self._child_idx = np.array([c for cs in view.children for c in cs], dtype=np.int64)

    def reset(self, selection: Sequence[int]) -> float:
        sel = np.array(selection, dtype=np.int64)
        if sel.shape != (self.pop.n,) or np.any(sel < 0) or np.any(sel >= self._counts):
            raise ValueError("selection does not fit the population")
        self.selected = sel
        self.subtree = self._k.aggregate_subtrees(self._plans, self._order, self._child_ptr, self._child_idx, sel)
        self.g, self.cost = self._canonical(sel)
        return self.cost

    def _canonical(self, sel: np.ndarray) -> tuple[np.ndarray, float]:
        # sum in agent order, so equal selections give bitwise-equal costs on any placement
        g = self._plans[self._agents, sel].sum(axis=0)
        return g, global_cost(g)

    def step(self) -> float:
        if self.selected is None:
            raise RuntimeError("reset() must be called before step()")
        selected, subtree, _, _ = self._k.learning_step(
            self._plans,
            self._counts,
            self._order,
            self._child_ptr,
            self._child_idx,
            self._topdown,
            self._parent,
            self.selected,
            self.subtree,
            self.g,
            self.cost,
        )
        g, cost = self._canonical(selected)
        # the tree-order sum can differ from the canonical one in the last bit
        if cost <= self.cost:
            self.selected, self.subtree, self.g, self.cost = selected, subtree, g, cost
        return self.cost


@dataclass
class LearningTrace:
    cost_per_iteration: list[float] = field(default_factory=list)
    selections_per_iteration: list[np.ndarray] = field(default_factory=list)
    messages_per_iteration: list[int] = field(default_factory=list)
    converged_at: int | None = None

    def record(self, cost: float, selection: np.ndarray, messages: int) -> None:
        self.cost_per_iteration.append(cost)
        self.selections_per_iteration.append(selection.copy())
        self.messages_per_iteration.append(messages)

    @property
    def iterations(self) -> int:
        return len(self.cost_per_iteration)

    @property
    def final_cost(self) -> float:
        return self.cost_per_iteration[-1]

    @property
    def final_selection(self) -> np.ndarray:
        return self.selections_per_iteration[-1]


def run_phase(
    pop: Population,
    tree: TreeTopology,
    b: Bijection,
    cfg: LearningConfig,
    backend: str | None = None,
) -> LearningTrace:
    """Iteration 0 sets up the initial selection; stops at convergence or after ``max_iterations`` rows."""
    engine = LearningEngine(pop, tree, b, backend)
    return continue_phase(engine, initial_selection(pop, cfg), cfg.max_iterations, cfg.convergence_tolerance)


def continue_phase(engine: LearningEngine, selection, max_iterations: int, tolerance: float) -> LearningTrace:
    trace = LearningTrace()
    cost = engine.reset(selection)
    trace.record(cost, engine.selected, engine.messages_per_iteration)
    for t in range(1, max_iterations):
        previous = cost
        cost = engine.step()
        trace.record(cost, engine.selected, engine.messages_per_iteration)
        if converged(previous, cost, tolerance):
            trace.converged_at = t
            break
    return trace


def write_trace_csv(path, trace: LearningTrace, comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "global_cost", "messages"])
        for t, (cost, msgs) in enumerate(zip(trace.cost_per_iteration, trace.messages_per_iteration)):
            writer.writerow([t, repr(cost), msgs])


def write_selections_csv(path, trace: LearningTrace, comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "agent_id", "plan_index"])
        for t, sel in enumerate(trace.selections_per_iteration):
            for agent, idx in enumerate(sel):
                writer.writerow([t, agent, int(idx)])
