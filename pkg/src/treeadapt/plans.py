"""Plan data model, dataset files, and plan generation schemes.

A dataset is a directory with one text file per agent, ``agent_<id>.plans``.
Each line holds one plan as ``<local_cost>:<v1>,<v2>,...,<vd>``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .seeding import derive_rng, derive_seed

PLAN_SUFFIX = ".plans"
_AGENT_FILE = re.compile(r"^agent_(\d+)\.plans$")


class DatasetError(ValueError):
    """Raised when a dataset directory or plan file cannot be parsed."""

    def __init__(self, message: str, path: Path | str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Plan:
    values: np.ndarray
    local_cost: float = 0.0

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("plan values must be a non-empty 1-d vector")
        if not np.all(np.isfinite(values)):
            raise ValueError("plan values must be finite")
        if not np.isfinite(self.local_cost) or self.local_cost < 0:
            raise ValueError(f"local cost must be finite and >= 0, got {self.local_cost}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "local_cost", float(self.local_cost))

    @property
    def dimension(self) -> int:
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, Plan):
            return NotImplemented
        return self.local_cost == other.local_cost and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.local_cost, self.values.tobytes()))


@dataclass(frozen=True)
class AgentProfile:
    agent_id: int
    plans: tuple[Plan, ...]

    def __post_init__(self):
        plans = tuple(self.plans)
        if self.agent_id < 0:
            raise ValueError("agent_id must be non-negative")
        if not plans:
            raise ValueError(f"agent {self.agent_id} has no plans")
        d = plans[0].dimension
        if any(p.dimension != d for p in plans):
            raise ValueError(f"agent {self.agent_id} mixes plan dimensions")
        object.__setattr__(self, "plans", plans)

    @property
    def dimension(self) -> int:
        return self.plans[0].dimension

    def matrix(self) -> np.ndarray:
        """Plan values stacked as a (k, d) array."""
        return np.stack([p.values for p in self.plans])


@dataclass(frozen=True)
class Population:
    agents: tuple[AgentProfile, ...]
    dimension: int

    def __post_init__(self):
        agents = tuple(self.agents)
        if not agents:
            raise ValueError("population needs at least one agent")
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        ids = [a.agent_id for a in agents]
        if len(set(ids)) != len(ids):
            raise ValueError("agent ids must be distinct")
        for a in agents:
            if a.dimension != self.dimension:
                raise ValueError(
                    f"agent {a.agent_id} has dimension {a.dimension}, expected {self.dimension}"
                )
        object.__setattr__(self, "agents", agents)

    @property
    def n(self) -> int:
        return len(self.agents)

    @cached_property
    def plan_counts(self) -> np.ndarray:
        counts = np.array([len(a.plans) for a in self.agents], dtype=np.int64)
        counts.setflags(write=False)
        return counts

    @cached_property
    def plan_tensor(self) -> np.ndarray:
        """Padded ``(n, k_max, d)`` array of plan values; rows past an agent's count are zero."""
        k_max = int(self.plan_counts.max())
        out = np.zeros((self.n, k_max, self.dimension))
        for i, a in enumerate(self.agents):
            out[i, : len(a.plans)] = a.matrix()
        out.setflags(write=False)
        return out

    def selected_plans(self, selection: Sequence[int]) -> np.ndarray:
        selection = np.asarray(selection, dtype=np.int64)
        if selection.shape != (self.n,):
            raise ValueError(f"selection must have length {self.n}")
        if np.any(selection < 0) or np.any(selection >= self.plan_counts):
            raise IndexError("plan index out of range")
        return self.plan_tensor[np.arange(self.n), selection]


def population_from_arrays(plan_sets: Iterable[np.ndarray], local_costs=None) -> Population:
    """Build a population from per-agent ``(k, d)`` arrays, ids assigned from 0."""
    agents = []
    for i, arr in enumerate(plan_sets):
        arr = np.atleast_2d(np.asarray(arr, dtype=np.float64))
        costs = np.zeros(len(arr)) if local_costs is None else local_costs[i]
        agents.append(AgentProfile(i, tuple(Plan(v, c) for v, c in zip(arr, costs))))
    if not agents:
        raise ValueError("population needs at least one agent")
    return Population(tuple(agents), agents[0].dimension)


# ---------------------------------------------------------------------------
# Dataset files


def parse_plan_line(line: str) -> Plan:
    cost_text, sep, values_text = line.partition(":")
    if not sep:
        raise ValueError("missing ':' between local cost and values")
    try:
        cost = float(cost_text)
        values = [float(v) for v in values_text.split(",")]
    except ValueError as exc:
        raise ValueError(f"malformed number ({exc})") from None
    return Plan(values, cost)


def format_plan_line(plan: Plan) -> str:
    return repr(plan.local_cost) + ":" + ",".join(repr(float(v)) for v in plan.values)


def load_agent_file(path: Path, agent_id: int, dimension: int | None = None) -> AgentProfile:
    plans = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            try:
                plan = parse_plan_line(line)
            except ValueError as exc:
                raise DatasetError(str(exc), path, lineno) from None
            expected = dimension if dimension is not None else (plans[0].dimension if plans else None)
            if expected is not None and plan.dimension != expected:
                raise DatasetError(
                    f"dimension mismatch: got {plan.dimension} values, expected {expected}",
                    path,
                    lineno,
                )
            plans.append(plan)
    if not plans:
        raise DatasetError("agent file contains no plans", path)
    return AgentProfile(agent_id, tuple(plans))


def load_population(path: str | Path) -> Population:
    """Read a dataset directory; agents are returned sorted by id."""
    root = Path(path)
    if not root.exists():
        raise DatasetError("dataset path does not exist", root)
    if not root.is_dir():
        raise DatasetError("dataset path is not a directory", root)

    files: dict[int, Path] = {}
    for entry in sorted(root.iterdir()):
        if entry.suffix != PLAN_SUFFIX:
            continue
        match = _AGENT_FILE.match(entry.name)
        if match is None:
            raise DatasetError("plan file name must look like agent_<id>.plans", entry)
        agent_id = int(match.group(1))
        if agent_id in files:
            raise DatasetError(f"duplicate agent id {agent_id} (also in {files[agent_id].name})", entry)
        files[agent_id] = entry
    if not files:
        raise DatasetError("no agent_<id>.plans files found", root)
    ids = sorted(files)
    if ids != list(range(len(ids))):
        missing = sorted(set(range(len(ids))) - set(ids))
        raise DatasetError(f"agent ids must be contiguous from 0; missing {missing[:5]}", root)

    agents = []
    dimension = None
    for agent_id in ids:
        profile = load_agent_file(files[agent_id], agent_id, dimension)
        dimension = profile.dimension
        agents.append(profile)
    return Population(tuple(agents), dimension)


def save_population(pop: Population, path: str | Path) -> Path:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    for agent in pop.agents:
        lines = [format_plan_line(p) for p in agent.plans]
        target = root / f"agent_{agent.agent_id}{PLAN_SUFFIX}"
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    return root


# ---------------------------------------------------------------------------
# Generation


def generate_synthetic(n: int, k: int, d: int, mean: float = 0.0, stdev: float = 1.0, seed: int = 0) -> Population:
    """Population whose plan values are i.i.d. normal draws; local costs are 0."""
    if min(n, k, d) < 1:
        raise ValueError("n, k and d must be >= 1")
    if stdev < 0:
        raise ValueError("stdev must be >= 0")
    rng = derive_rng(seed, "synthetic")
    values = rng.normal(mean, stdev, size=(n, k, d)) if stdev > 0 else np.full((n, k, d), float(mean))
    return population_from_arrays(values)


def shuffle_scheme(base: Plan, seed: int) -> Plan:
    """SHUFFLE: a uniformly random permutation of the base values."""
    rng = derive_rng(seed, "shuffle")
    return Plan(rng.permutation(base.values), base.local_cost)


def apply_swaps(base: Plan, index_pairs: Iterable[tuple[int, int]]) -> Plan:
    values = base.values.copy()
    for i, j in index_pairs:
        values[i], values[j] = values[j], values[i]
    return Plan(values, base.local_cost)


def random_swap_pairs(d: int, pairs: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    # with replacement, i != j
    out = []
    for _ in range(pairs):
        i = int(rng.integers(d))
        j = int(rng.integers(d - 1))
        if j >= i:
            j += 1
        out.append((i, j))
    return out


def swap_scheme(base: Plan, pairs: int, seed: int) -> Plan:
    """SWAP-<pairs>: sequentially swap ``pairs`` random index pairs."""
    if pairs < 0:
        raise ValueError("pairs must be >= 0")
    if pairs == 0:
        return Plan(base.values, base.local_cost)
    if base.dimension < 2:
        raise ValueError("swapping needs a plan of dimension >= 2")
    rng = derive_rng(seed, "swap", pairs)
    return apply_swaps(base, random_swap_pairs(base.dimension, pairs, rng))


ENERGY_SCHEMES = (("shuffle", 0),) * 3 + (("swap", 15),) * 3 + (("swap", 30),) * 3


def build_energy_style_profile(base: Plan, seed: int, agent_id: int = 0) -> AgentProfile:
    """Base plan followed by 3 SHUFFLE, 3 SWAP-15 and 3 SWAP-30 variants."""
    plans = [base]
    for slot, (scheme, pairs) in enumerate(ENERGY_SCHEMES):
        sub_seed = derive_seed(seed, "energy", slot)
        if scheme == "shuffle":
            plans.append(shuffle_scheme(base, sub_seed))
        else:
            plans.append(swap_scheme(base, pairs, sub_seed))
    return AgentProfile(agent_id, tuple(plans))


def energy_style_population(base_plans: Sequence[Plan | np.ndarray], seed: int) -> Population:
    agents = []
    for i, base in enumerate(base_plans):
        if not isinstance(base, Plan):
            base = Plan(base)
        agents.append(build_energy_style_profile(base, derive_seed(seed, "agent", i), i))
    return Population(tuple(agents), agents[0].dimension)


def encode_trip(origin: int, destination: int, n_stations: int) -> Plan:
    """Bike trip as a plan: -1 at the pick-up station, +1 at the drop-off station.

    Stations are numbered from 1. A round trip (origin == destination) nets to zero.
    """
    if not (1 <= origin <= n_stations and 1 <= destination <= n_stations):
        raise ValueError("station numbers must lie in 1..n_stations")
    values = np.zeros(n_stations)
    values[origin - 1] -= 1.0
    values[destination - 1] += 1.0
    return Plan(values)
