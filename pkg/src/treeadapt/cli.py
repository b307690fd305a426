"""Command-line front end.

Every command reads one JSON config file (all sections optional) and a few
overrides. Outputs are plot-ready CSVs whose first line is a comment holding
the hash of the resolved configuration. Worker count never enters the hash:
results do not depend on it.

Exit codes: 0 success, 1 config error, 2 data error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .adaptation import write_adaptation_csv
from .benchmark import (
    config_hash,
    fit_gaussian,
    kde,
    rank_fixed_bijections,
    run_random_benchmark,
    write_density_csv,
    write_heatmap_csv,
    write_sample_csv,
)
from .experiments import (
    evaluate_strategies,
    mean_cumulative_adaptations,
    strategy_grid,
    summarize,
    write_improvement_csv,
    write_runs_csv,
)
from .learning import LearningConfig, run_phase, write_trace_csv
from .metrics import METRIC_NAMES, rank_population
from .plans import DatasetError, Population, energy_style_population, generate_synthetic, load_population, save_population
from .seeding import derive_seed
from .topology import SortOrder, build_balanced_tree, place_by_ranking, random_bijection

log = logging.getLogger("treeadapt")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3

DEFAULTS = {
    "seed": 0,
    "backend": None,
    "dataset": {"synthetic": {"n": 100, "k": 16, "d": 100, "mean": 0.0, "stdev": 1.0}},
    "tree": {"m": 2},
    "engine": {"max_iterations": 40, "convergence_tolerance": 1e-9},
    "run": {"placement": "random"},
    "benchmark": {"n_samples": 1000, "density_grid": 512},
    "rank_metrics": {"metrics": None, "children": list(range(2, 15)), "n_samples": 1000},
    "strategy": {
        "offsets": list(range(1, 21)),
        "thresholds": [round(0.1 * i, 1) for i in range(1, 10)],
        "percentiles": [0.1, 0.5, 0.9],
        "repetitions": 100,
        "total_iterations": 100,
        "n_samples": 1000,
    },
}


class ConfigError(Exception):
    pass


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and key != "dataset":
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return dict(DEFAULTS)
    try:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(user) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"{path}: unknown section(s) {sorted(unknown)}")
    return _merge(DEFAULTS, user)


def _parse_children(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--children expects comma-separated integers, got {text!r}") from exc
    if not values:
        raise ConfigError("--children is empty")
    return values


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.dataset is not None:
        cfg["dataset"] = {"path": args.dataset}
    if args.children is not None:
        children = _parse_children(args.children)
        cfg["tree"] = {**cfg["tree"], "m": children[0]}
        cfg["rank_metrics"] = {**cfg["rank_metrics"], "children": children}
    try:
        validate(cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed configuration: {exc!r}") from exc
    return cfg


def _int(value, name: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def validate(cfg: dict) -> None:
    _int(cfg["seed"], "seed", 0)
    if cfg["backend"] is not None:
        try:
            _backend.resolve(cfg["backend"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    ds = cfg["dataset"]
    if not isinstance(ds, dict) or len(ds) != 1 or next(iter(ds)) not in ("path", "synthetic", "energy_style"):
        raise ConfigError("dataset must hold exactly one of 'path', 'synthetic', 'energy_style'")
    if "synthetic" in ds:
        syn = ds["synthetic"]
        for key in ("n", "k", "d"):
            _int(syn.get(key), f"dataset.synthetic.{key}", 1)
        if float(syn.get("stdev", 1.0)) < 0:
            raise ConfigError("dataset.synthetic.stdev must be >= 0")
    if "energy_style" in ds and "base" not in ds["energy_style"]:
        raise ConfigError("dataset.energy_style needs a 'base' dataset path")
    _int(cfg["tree"]["m"], "tree.m", 2)
    _int(cfg["engine"]["max_iterations"], "engine.max_iterations", 1)
    if float(cfg["engine"]["convergence_tolerance"]) < 0:
        raise ConfigError("engine.convergence_tolerance must be >= 0")
    placement = cfg["run"]["placement"]
    if placement != "random":
        if not isinstance(placement, dict) or placement.get("metric") not in METRIC_NAMES:
            raise ConfigError("run.placement must be 'random' or {'metric': <name>, 'order': 'ASC'|'DESC'}")
        if placement.get("order", "ASC") not in ("ASC", "DESC"):
            raise ConfigError("run.placement.order must be ASC or DESC")
    _int(cfg["benchmark"]["n_samples"], "benchmark.n_samples", 1)
    _int(cfg["benchmark"]["density_grid"], "benchmark.density_grid", 2)
    rm = cfg["rank_metrics"]
    if rm["metrics"] is not None:
        if not isinstance(rm["metrics"], list) or not rm["metrics"]:
            raise ConfigError("rank_metrics.metrics must be a non-empty list (or null for all)")
        bad = [m for m in rm["metrics"] if m not in METRIC_NAMES]
        if bad:
            raise ConfigError(f"unknown metric(s): {bad}")
    if not rm["children"]:
        raise ConfigError("rank_metrics.children is empty")
    for m in rm["children"]:
        _int(m, "rank_metrics.children", 2)
    _int(rm["n_samples"], "rank_metrics.n_samples", 1)
    st = cfg["strategy"]
    for o in st["offsets"]:
        _int(o, "strategy.offsets", 1)
    for t in st["thresholds"]:
        if not 0.0 <= float(t) <= 1.0:
            raise ConfigError(f"strategy threshold {t!r} outside [0, 1]")
    for p in st["percentiles"]:
        if not 0.0 <= float(p) <= 1.0:
            raise ConfigError(f"strategy percentile {p!r} outside [0, 1]")
    if not st["offsets"] and not st["thresholds"]:
        raise ConfigError("strategy grid is empty")
    _int(st["repetitions"], "strategy.repetitions", 1)
    _int(st["total_iterations"], "strategy.total_iterations", 1)
    _int(st["n_samples"], "strategy.n_samples", 1)


@dataclass
class Context:
    cfg: dict
    out_dir: Path
    workers: int

    @property
    def seed(self) -> int:
        return self.cfg["seed"]

    @property
    def backend(self):
        return self.cfg["backend"]

    def engine(self, max_iterations: int | None = None, seed: int = 0) -> LearningConfig:
        e = self.cfg["engine"]
        return LearningConfig(
            max_iterations=max_iterations or e["max_iterations"],
            convergence_tolerance=float(e["convergence_tolerance"]),
            seed=seed,
        )

    def comment(self, command: str, *sections: str) -> str:
        keys = ("seed", "backend", "dataset", "tree", "engine") + sections
        payload = {"command": command, **{k: self.cfg[k] for k in keys}}
        return f"config_hash={config_hash(payload)} command={command} seed={self.seed}"


def dataset_tag(cfg: dict) -> str:
    ds = cfg["dataset"]
    if "path" in ds:
        return Path(ds["path"]).name
    if "synthetic" in ds:
        s = ds["synthetic"]
        return f"synthetic-n{s['n']}-k{s['k']}-d{s['d']}"
    return f"energy-style-{Path(ds['energy_style']['base']).name}"


def build_population(cfg: dict) -> Population:
    ds = cfg["dataset"]
    seed = cfg["seed"]
    if "path" in ds:
        return load_population(ds["path"])
    if "synthetic" in ds:
        s = ds["synthetic"]
        return generate_synthetic(
            s["n"], s["k"], s["d"], float(s.get("mean", 0.0)), float(s.get("stdev", 1.0)), derive_seed(seed, "dataset")
        )
    style = ds["energy_style"]
    base = load_population(style["base"])
    count = style.get("n", base.n)
    if count < 1 or count > base.n:
        raise ConfigError(f"dataset.energy_style.n must lie in [1, {base.n}]")
    return energy_style_population([base.agents[i].plans[0] for i in range(count)], derive_seed(seed, "dataset"))


def cmd_generate(ctx: Context) -> list[Path]:
    pop = build_population(ctx.cfg)
    target = ctx.out_dir / "dataset"
    save_population(pop, target)
    log.info("wrote %d agent files to %s", pop.n, target)
    return [target]


def cmd_run(ctx: Context) -> list[Path]:
    pop = build_population(ctx.cfg)
    tree = build_balanced_tree(pop.n, ctx.cfg["tree"]["m"])
    placement = ctx.cfg["run"]["placement"]
    if placement == "random":
        b = random_bijection(tree, derive_seed(ctx.seed, "run"))
    else:
        b = place_by_ranking(tree, rank_population(placement["metric"], pop), SortOrder(placement.get("order", "ASC")))
    trace = run_phase(pop, tree, b, ctx.engine(seed=derive_seed(ctx.seed, "run")), backend=ctx.backend)
    path = ctx.out_dir / "trace.csv"
    write_trace_csv(path, trace, ctx.comment("run", "run"))
    log.info("%d iterations, final cost %.6g", trace.iterations, trace.final_cost)
    return [path]


def cmd_benchmark(ctx: Context) -> list[Path]:
    pop = build_population(ctx.cfg)
    tree = build_balanced_tree(pop.n, ctx.cfg["tree"]["m"])
    bcfg = ctx.cfg["benchmark"]
    sample = run_random_benchmark(
        pop, tree, bcfg["n_samples"], ctx.seed, ctx.engine(), ctx.workers, dataset_tag(ctx.cfg), backend=ctx.backend
    )
    sample_path = ctx.out_dir / "sample.csv"
    density_path = ctx.out_dir / "density.csv"
    write_sample_csv(sample_path, sample)
    if sample.unconverged:
        log.warning("%d of %d runs did not converge", sample.unconverged, sample.sample_count)
    if sample.sample_count < 2 or np.ptp(sample.costs) == 0:
        log.warning("all sample costs are equal; no density to estimate")
        return [sample_path]
    write_density_csv(
        density_path, kde(sample), fit_gaussian(sample), bcfg["density_grid"], ctx.comment("benchmark", "benchmark")
    )
    return [sample_path, density_path]


def cmd_rank_metrics(ctx: Context) -> list[Path]:
    pop = build_population(ctx.cfg)
    rm = ctx.cfg["rank_metrics"]
    metrics = list(METRIC_NAMES) if rm["metrics"] is None else rm["metrics"]
    comment = ctx.comment("rank-metrics", "rank_metrics")
    all_rows, paths = [], []
    for m in rm["children"]:
        tree = build_balanced_tree(pop.n, m)
        sample = run_random_benchmark(
            pop, tree, rm["n_samples"], ctx.seed, ctx.engine(), ctx.workers, dataset_tag(ctx.cfg), backend=ctx.backend
        )
        rows = rank_fixed_bijections(pop, tree, metrics, sample, ctx.engine(seed=derive_seed(ctx.seed, "fixed")), ctx.backend)
        path = ctx.out_dir / f"heatmap_m{m}.csv"
        write_heatmap_csv(path, rows, comment)
        paths.append(path)
        all_rows.extend(rows)
        log.info("m=%d: %d placements ranked", m, len(rows))
    path = ctx.out_dir / "heatmap_children.csv"
    write_heatmap_csv(path, all_rows, comment, by_children=True)
    return paths + [path]


def cmd_strategy(ctx: Context) -> list[Path]:
    pop = build_population(ctx.cfg)
    tree = build_balanced_tree(pop.n, ctx.cfg["tree"]["m"])
    st = ctx.cfg["strategy"]
    sample = run_random_benchmark(
        pop, tree, st["n_samples"], ctx.seed, ctx.engine(), ctx.workers, dataset_tag(ctx.cfg), backend=ctx.backend
    )
    settings = strategy_grid(st["offsets"], [float(t) for t in st["thresholds"]])
    baselines, results = evaluate_strategies(
        pop,
        tree,
        sample,
        settings,
        [float(p) for p in st["percentiles"]],
        st["repetitions"],
        st["total_iterations"],
        ctx.seed,
        ctx.workers,
        ctx.backend,
    )
    comment = ctx.comment("strategy", "strategy")
    runs_path = ctx.out_dir / "strategy_runs.csv"
    improvement_path = ctx.out_dir / "improvement.csv"
    write_runs_csv(runs_path, results, comment)
    write_improvement_csv(improvement_path, summarize(baselines, results), comment)
    adapt_dir = ctx.out_dir / "adaptations"
    adapt_dir.mkdir(exist_ok=True)
    paths = [runs_path, improvement_path]
    for setting, curve in mean_cumulative_adaptations(results).items():
        path = adapt_dir / f"{setting.label}.csv"
        write_adaptation_csv(path, curve, comment)
        paths.append(path)
    return paths


COMMANDS = {
    "generate": cmd_generate,
    "run": cmd_run,
    "benchmark": cmd_benchmark,
    "rank-metrics": cmd_rank_metrics,
    "strategy": cmd_strategy,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--workers", type=int, default=1, help="worker processes for repeated runs")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--dataset", help="dataset directory of agent plan files (overrides config)")
    common.add_argument("--children", help="branching factor, or comma-separated list for rank-metrics")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="treeadapt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = resolve_config(args)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = COMMANDS[args.command](Context(cfg, out_dir, args.workers))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
