"""Optimality evaluation against random placements.

Learning runs many times, each on a random placement of the agents, and the
converged costs form a reference sample. Any other placement is scored by
the percentile of its cost within that sample (0 = best seen, 1 = worst).
The sample's distribution is checked against a Gaussian with a kernel
density estimate.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .learning import LearningConfig, run_phase
from .metrics import rank_population
from .parallel import run_parallel
from .plans import Population
from .seeding import derive_seed
from .topology import Bijection, SortOrder, TreeTopology, place_by_ranking, random_bijection


def config_hash(payload) -> str:
    """Short stable digest of a JSON-serializable configuration."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def sample_seeds(base_seed: int, index: int) -> tuple[int, int]:
    """(placement seed, initial-selection seed) of benchmark run ``index``."""
    return derive_seed(base_seed, "sample", index, "bijection"), derive_seed(base_seed, "sample", index, "selection")


@dataclass(frozen=True)
class SampleRun:
    index: int
    cost: float
    converged: bool
    iterations: int


@dataclass
class BenchmarkSample:
    """Converged costs sorted ascending, with the run that produced each one."""

    runs: list[SampleRun]
    base_seed: int
    dataset_tag: str = ""
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.runs = sorted(self.runs, key=lambda r: (r.cost, r.index))
        if not all(math.isfinite(r.cost) for r in self.runs):
            raise ValueError("benchmark costs must be finite")

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.runs])

    @property
    def sample_count(self) -> int:
        return len(self.runs)

    @property
    def unconverged(self) -> int:
        return sum(not r.converged for r in self.runs)

    def config_hash(self) -> str:
        return config_hash({"config": self.config, "tag": self.dataset_tag})

    def nearest_rank(self, percentile: float) -> SampleRun:
        """Run at the nearest-rank position for ``percentile`` in [0, 1]."""
        if not 0.0 <= percentile <= 1.0:
            raise ValueError("percentile must lie in [0, 1]")
        rank = max(1, math.ceil(percentile * self.sample_count))
        return self.runs[rank - 1]

    def placement(self, tree: TreeTopology, run: SampleRun) -> tuple[Bijection, int]:
        """Rebuild the placement and initial-selection seed used by ``run``."""
        bij_seed, sel_seed = sample_seeds(self.base_seed, run.index)
        return random_bijection(tree, bij_seed), sel_seed


def merge_samples(*samples: BenchmarkSample) -> BenchmarkSample:
    first = samples[0]
    for s in samples[1:]:
        if s.base_seed != first.base_seed or s.config != first.config:
            raise ValueError("can only merge samples of the same benchmark")
    runs = [r for s in samples for r in s.runs]
    if len({r.index for r in runs}) != len(runs):
        raise ValueError("samples overlap")
    return BenchmarkSample(runs, first.base_seed, first.dataset_tag, dict(first.config))


# ---------------------------------------------------------------------------
# running the benchmark

def _run_one(shared: dict, index: int) -> SampleRun:
    cfg = shared["cfg"]
    bij_seed, sel_seed = sample_seeds(shared["base_seed"], index)
    run_cfg = LearningConfig(cfg.max_iterations, cfg.lam, cfg.convergence_tolerance, sel_seed)
    tree = shared["tree"]
    trace = run_phase(shared["pop"], tree, random_bijection(tree, bij_seed), run_cfg, backend=shared["backend"])
    return SampleRun(index, trace.final_cost, trace.converged_at is not None, trace.iterations)


def run_random_benchmark(
    pop: Population,
    tree: TreeTopology,
    n_samples: int,
    base_seed: int,
    cfg: LearningConfig,
    workers: int = 1,
    dataset_tag: str = "",
    indices: Iterable[int] | None = None,
    backend: str | None = None,
) -> BenchmarkSample:
    """Learn on ``n_samples`` random placements, each with its own random initial selection.

    Run ``i`` is seeded from ``(base_seed, i)`` only, so the sample does not
    depend on ``workers`` or on how indices are batched.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    indices = list(range(n_samples)) if indices is None else list(indices)
    config = {
        "n": pop.n,
        "m": tree.m,
        "max_iterations": cfg.max_iterations,
        "convergence_tolerance": cfg.convergence_tolerance,
        "n_samples": n_samples,
    }
    shared = {"pop": pop, "tree": tree, "cfg": cfg, "base_seed": base_seed, "backend": backend}
    runs = run_parallel(_run_one, indices, shared, workers)
    return BenchmarkSample(runs, base_seed, dataset_tag, config)


# ---------------------------------------------------------------------------
# statistics


def percentile_of(cost: float, sample: BenchmarkSample | Sequence[float]) -> float:
    """Rank of ``cost`` within the sorted sample scaled to [0, 1], interpolated between neighbours.

    Costs at or below the minimum map to 0, at or above the maximum to 1. A
    cost equal to a sample value maps to (number of strictly lower values) / (n - 1).
    """
    costs = sample.costs if isinstance(sample, BenchmarkSample) else np.sort(np.asarray(sample, dtype=float))
    n = costs.size
    if n == 0:
        raise ValueError("empty sample")
    if cost <= costs[0]:
        return 0.0
    if cost >= costs[-1]:
        return 1.0
    i = int(np.searchsorted(costs, cost, side="left"))
    if costs[i] == cost:
        return i / (n - 1)
    lo, hi = costs[i - 1], costs[i]
    return float(((i - 1) + (cost - lo) / (hi - lo)) / (n - 1))


def silverman_bandwidth(n_s: int) -> float:
    if n_s < 1:
        raise ValueError("sample size must be >= 1")
    return n_s ** (-1 / 5)


_SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class KdeEstimate:
    """Gaussian-kernel density estimate over a fixed set of points."""

    points: np.ndarray
    bandwidth: float

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be > 0")
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        h = self.bandwidth
        step = max(1, 2_000_000 // max(self.points.size, 1))
        for lo in range(0, x.size, step):
            u = (x[lo : lo + step, None] - self.points[None, :]) / h
            out[lo : lo + step] = np.exp(-0.5 * u * u).sum(axis=1) / (self.points.size * h * _SQRT_2PI)
        return out


def kde(sample: BenchmarkSample | Sequence[float], bandwidth: float | None = None) -> KdeEstimate:
    costs = sample.costs if isinstance(sample, BenchmarkSample) else np.asarray(sample, dtype=float)
    if bandwidth is None:
        bandwidth = silverman_bandwidth(costs.size)
    return KdeEstimate(costs, bandwidth)


def kde_density(sample, bandwidth: float, x: float) -> float:
    return float(kde(sample, bandwidth)(x)[0])


@dataclass(frozen=True)
class GaussianFit:
    mu: float
    sigma2: float

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")

    def pdf(self, x):
        if self.sigma2 == 0:
            raise ValueError("degenerate Gaussian has no density")
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x - self.mu) ** 2 / self.sigma2) / math.sqrt(2 * math.pi * self.sigma2)


def fit_gaussian(sample: BenchmarkSample | Sequence[float]) -> GaussianFit:
    """Location from the median (50th percentile), spread from the population variance."""
    costs = sample.costs if isinstance(sample, BenchmarkSample) else np.asarray(sample, dtype=float)
    if costs.size < 2:
        raise ValueError("need at least two costs to fit a Gaussian")
    return GaussianFit(float(np.median(costs)), float(costs.var()))


def density_grid(estimate: KdeEstimate, fit: GaussianFit, grid: int) -> np.ndarray:
    if grid < 2:
        raise ValueError("grid needs at least two points")
    # wide enough for both curves to carry all but a negligible tail
    spread = 4 * max(math.sqrt(fit.sigma2), estimate.bandwidth)
    return np.linspace(estimate.points.min() - spread, estimate.points.max() + spread, grid)


def density_mismatch(estimate: KdeEstimate, fit: GaussianFit, grid: int = 512) -> float:
    """Largest absolute gap between the KDE and the Gaussian on a uniform grid."""
    xs = density_grid(estimate, fit, grid)
    return float(np.max(np.abs(estimate(xs) - fit.pdf(xs))))


def percentile_distance(p1: Sequence[float], p2: Sequence[float]) -> float:
    a = np.asarray(p1, dtype=float)
    b = np.asarray(p2, dtype=float)
    if a.shape != b.shape:
        raise ValueError("percentile vectors differ in length")
    if np.any((a < 0) | (a > 1) | (b < 0) | (b > 1)):
        raise ValueError("percentiles must lie in [0, 1]")
    return float(np.sqrt(((a - b) ** 2).sum()))


# ---------------------------------------------------------------------------
# fixed (metric-sorted) placements


@dataclass(frozen=True)
class FixedBijectionResult:
    metric: str
    order: SortOrder
    cost: float
    percentile: float
    children: int

    @property
    def label(self) -> str:
        return f"{self.order.value}-{self.metric}"


def rank_fixed_bijections(
    pop: Population,
    tree: TreeTopology,
    metrics: Sequence[str],
    sample: BenchmarkSample,
    cfg: LearningConfig,
    backend: str | None = None,
) -> list[FixedBijectionResult]:
    """Learn once per metric and sort order; score each run against ``sample``."""
    if not metrics:
        raise ValueError("metric list is empty")
    rows = []
    for metric in metrics:
        scores = rank_population(metric, pop)
        for order in (SortOrder.ASCENDING, SortOrder.DESCENDING):
            trace = run_phase(pop, tree, place_by_ranking(tree, scores, order), cfg, backend=backend)
            rows.append(FixedBijectionResult(metric, order, trace.final_cost, percentile_of(trace.final_cost, sample), tree.m))
    return rows


# ---------------------------------------------------------------------------
# files


def _comment(fh, items: dict) -> None:
    fh.write("# " + " ".join(f"{k}={v}" for k, v in items.items()) + "\n")


def write_sample_csv(path, sample: BenchmarkSample) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _comment(
            fh,
            {
                "n_s": sample.sample_count,
                "base_seed": sample.base_seed,
                "dataset": sample.dataset_tag or "-",
                "config_hash": sample.config_hash(),
                "unconverged": sample.unconverged,
            },
        )
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "cost"])
        for rank, run in enumerate(sample.runs, start=1):
            writer.writerow([rank, repr(run.cost)])


def read_sample_csv(path) -> tuple[dict, np.ndarray]:
    meta: dict = {}
    costs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                for item in line[1:].split():
                    key, _, value = item.partition("=")
                    meta[key] = value
                continue
            if line.startswith("rank"):
                continue
            costs.append(float(line.split(",")[1]))
    return meta, np.array(costs)


def write_density_csv(path, estimate: KdeEstimate, fit: GaussianFit, grid: int = 512, comment: str | None = None) -> None:
    xs = density_grid(estimate, fit, grid)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "kde", "parametric"])
        for x, k, p in zip(xs, estimate(xs), fit.pdf(xs)):
            writer.writerow([repr(float(x)), repr(float(k)), repr(float(p))])


def write_heatmap_csv(path, rows: Sequence[FixedBijectionResult], comment: str | None = None, by_children: bool = False) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        if by_children:
            writer.writerow(["metric", "order", "children", "percentile"])
            for r in rows:
                writer.writerow([r.metric, r.order.value, r.children, repr(r.percentile)])
        else:
            writer.writerow(["metric", "order", "cost", "percentile"])
            for r in rows:
                writer.writerow([r.metric, r.order.value, repr(r.cost), repr(r.percentile)])

