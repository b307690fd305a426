"""Meta-feature metrics that score an agent from its set of plans.

There are 62 metrics in five families: spread/extremes of the raw values,
correlations between pairs of plans, DCT and DST coefficient statistics, and
DFT coefficient sums. Each maps a ``(k, d)`` plan matrix to one real score.

Correlations are aggregated per coordinate. For a pair of plans the
contribution at coordinate ``j`` is

* Pearson: ``z1_j * z2_j`` with ``z`` the plan standardized by its own mean
  and population standard deviation;
* Spearman: the same on average-rank transformed plans;
* Kendall: ``mean_{i != j} sign((p1_j - p1_i) * (p2_j - p2_i))``.

Averaging any of these over ``j`` gives the classical coefficient (tau-a for
Kendall). A constant plan contributes zeros. Pairs range over the full
Cartesian product of the plan set, self-pairs included.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.stats import rankdata

from .plans import AgentProfile, Population
from .transforms import dct, dft, dst

CORRELATIONS = ("pearson", "kendall", "spearman")


@dataclass(frozen=True)
class RankingScore:
    agent_id: int
    score: float


# ---------------------------------------------------------------------------
# per-coordinate correlation contributions, shape (k, k, d)


def _standardized(plans: np.ndarray) -> np.ndarray:
    # divide by the range first so tiny values cannot underflow sigma to 0
    spread = np.ptp(plans, axis=1, keepdims=True)
    constant = spread[:, 0] == 0
    spread[constant] = 1.0
    centered = (plans - plans.mean(axis=1, keepdims=True)) / spread
    sigma = np.sqrt((centered**2).mean(axis=1, keepdims=True))
    sigma[constant] = 1.0
    z = centered / sigma
    z[constant] = 0.0
    return z


def pearson_contributions(plans: np.ndarray) -> np.ndarray:
    z = _standardized(plans)
    return z[:, None, :] * z[None, :, :]


def spearman_contributions(plans: np.ndarray) -> np.ndarray:
    return pearson_contributions(rankdata(plans, axis=1, method="average"))


def kendall_contributions(plans: np.ndarray) -> np.ndarray:
    k, d = plans.shape
    if d < 2:
        return np.zeros((k, k, d))
    signs = np.sign(plans[:, :, None] - plans[:, None, :])
    return np.einsum("aji,bji->abj", signs, signs) / (d - 1)


_CONTRIBUTIONS = {
    "pearson": pearson_contributions,
    "kendall": kendall_contributions,
    "spearman": spearman_contributions,
}


def correlation_contributions(kind: str, plans: np.ndarray) -> np.ndarray:
    return _CONTRIBUTIONS[kind](np.asarray(plans, dtype=np.float64))


# ---------------------------------------------------------------------------
# metric table

MetricFn = Callable[[np.ndarray], float]


def _stdev(plans):
    return plans.std(axis=1)


def _corr_metric(kind: str, outer: str, inner: str) -> MetricFn:
    outer_fn = {"avg": np.mean, "max": np.max, "min": np.min}[outer]
    inner_fn = {"avg": np.mean, "max": np.max, "min": np.min}[inner]

    def metric(plans):
        per_pair = inner_fn(correlation_contributions(kind, plans), axis=2)
        return outer_fn(per_pair)

    return metric


def _coeff_metric(transform, kind: int, outer: str, inner: str) -> MetricFn:
    outer_fn = {"avg": np.mean, "max": np.max, "min": np.min}[outer]
    inner_fn = {"avg": np.mean, "max": np.max, "min": np.min}[inner]

    def metric(plans):
        if transform is dct and kind == 1 and plans.shape[1] == 1:
            # both endpoint halves land on the single value: X_0 = x_0
            coeffs = plans
        else:
            coeffs = transform(kind, plans)
        return outer_fn(inner_fn(coeffs, axis=1))

    return metric


def _max_complex(values: np.ndarray) -> complex:
    # complex numbers have no order; the largest-magnitude coefficient wins,
    # first occurrence on ties
    flat = values.ravel()
    return flat[np.argmax(np.abs(flat))]


def _sum_of_0_dft(plans):
    return abs(dft(plans)[:, 0].sum())


def _max_of_0_dft(plans):
    return abs(dft(plans)[:, 0].real.max())


def _sum_non0_dft(plans):
    return abs(dft(plans)[:, 1:].sum())


def _max_non0_dft(plans):
    rest = dft(plans)[:, 1:]
    if rest.size == 0:
        return 0.0
    return abs(_max_complex(rest))


def _sum_all_dft(plans):
    return abs(dft(plans).sum())


def _avg_stdev_dft(plans):
    return abs(np.std(dft(plans), axis=1).mean())


def _build_table() -> dict[str, MetricFn]:
    table: dict[str, MetricFn] = {
        "avg-stdev": lambda p: _stdev(p).mean(),
        "max-stdev": lambda p: _stdev(p).max(),
        "min-stdev": lambda p: _stdev(p).min(),
        "max-value": lambda p: p.max(),
        "min-value": lambda p: p.min(),
    }
    corr_rows = [
        ("avg-corr", "avg", "avg"),
        ("max-avg-corr", "max", "avg"),
        ("min-avg-corr", "min", "avg"),
        ("avg-max-corr", "avg", "max"),
        ("avg-min-corr", "avg", "min"),
        # printed as max over pairs of the per-pair minimum, kept as printed
        ("max-corr", "max", "min"),
        ("min-corr", "min", "min"),
    ]
    for prefix, outer, inner in corr_rows:
        for kind in CORRELATIONS:
            table[f"{prefix}-{kind}"] = _corr_metric(kind, outer, inner)
    coeff_rows = [
        ("avg", "avg", "avg"),
        ("max", "max", "max"),
        ("min", "min", "min"),
        ("avg-max", "avg", "max"),
        ("avg-min", "avg", "min"),
    ]
    for name, transform in (("dct", dct), ("dst", dst)):
        for prefix, outer, inner in coeff_rows:
            for kind in (1, 2, 3):
                table[f"{prefix}-{name}{kind}-coeff"] = _coeff_metric(transform, kind, outer, inner)
    table.update(
        {
            "sum-of-0-dft-coeff": _sum_of_0_dft,
            "max-of-0-dft-coeff": _max_of_0_dft,
            "sum-non0-dft-coeff": _sum_non0_dft,
            "max-non0-dft-coeff": _max_non0_dft,
            "sum-all-dft-coeff": _sum_all_dft,
            "avg-stdev-dft-coeff": _avg_stdev_dft,
        }
    )
    return table


METRICS: dict[str, MetricFn] = _build_table()
METRIC_NAMES: tuple[str, ...] = tuple(METRICS)


def _plans_of(profile) -> np.ndarray:
    if isinstance(profile, AgentProfile):
        return profile.matrix()
    plans = np.atleast_2d(np.asarray(profile, dtype=np.float64))
    if plans.size == 0:
        raise ValueError("profile has no plans")
    return plans


def evaluate_metric(metric: str, profile) -> RankingScore:
    """Score one agent. ``profile`` is an AgentProfile or a ``(k, d)`` array (agent id 0)."""
    try:
        fn = METRICS[metric]
    except KeyError:
        raise KeyError(f"unknown metric {metric!r}") from None
    plans = _plans_of(profile)
    score = float(fn(plans))
    if not np.isfinite(score):
        raise FloatingPointError(f"metric {metric} produced a non-finite score")
    agent_id = profile.agent_id if isinstance(profile, AgentProfile) else 0
    return RankingScore(agent_id, score)


def rank_population(metric: str, pop: Population) -> list[RankingScore]:
    """One score per agent, in agent order."""
    if metric not in METRICS:
        raise KeyError(f"unknown metric {metric!r}")
    return [evaluate_metric(metric, agent) for agent in pop.agents]


def write_scores_csv(path, rows: Iterable[tuple[str, RankingScore]], comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["agent_id", "metric", "score"])
        for metric, s in rows:
            writer.writerow([s.agent_id, metric, repr(s.score)])
