"""Batch experiment harness: generate, learn, evaluate, reproduce.

A run is a grid of cells (scenario x beta x strategy x replicate).  Every
cell derives its own random streams from the master seed, so runs are
reproducible bit for bit and cells can execute in any order, including in
a process pool.  All files are written atomically (temp + rename).
"""

from __future__ import annotations

import csv
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .datagen import ScenarioConfig, discretize, generate, rag_view
from .metrics import ReplicateReport, evaluate_replicates
from .sampler import ChainConfig, chain_rng, partition_mcmc, structure_mcmc
from .scores import BdeHyperparams, BdeScore, BgeHyperparams, BgeScore, build_score_table
from .theory import theory_curves, write_curves_csv
from . import metrics as _metrics

__all__ = [
    "ExperimentConfig",
    "load_config",
    "load_blacklist",
    "make_scorer",
    "run_experiment",
    "reproduce",
    "atomic_write_text",
]

METRIC_COLUMNS = ("scenario", "beta", "strategy", "shd", "tp", "fp", "fn", "tpr", "fr")

TABLE2_BETAS = {
    "cc": (0.05, 0.1, 0.5, 1.0, 1.5, 2.0),
    "cd": (0.05, 0.1, 0.5, 1.0, 1.5, 2.0),
    "dc": (0.05, 0.1, 0.5, 1.0, 1.5, 2.0),
    "dd": (0.1, 0.25, 0.4, 0.6, 0.75, 0.9),
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenarios: tuple[str, ...]
    betas: tuple[float | None, ...]
    strategies: tuple[str, ...]
    replicates: int = 20
    rows: int = 200
    node_count: int = 2
    seed: int = 0
    out_dir: str = "results"
    sampler: str = "partition"
    iterations: int = 100_000
    burn_in_fraction: float = 0.2
    thinning: int = 1
    ess: float = 1.0
    alpha_mu: float = 1.0
    max_parents: int | None = None
    blacklist_path: str | None = None
    workers: int = 1
    p: float = 0.5
    sigma1: float = 1.0
    sigma2: float = 1.0
    write_samples: bool = True

    def __post_init__(self):
        for s in self.strategies:
            _parse_strategy(s)
        if self.sampler not in ("partition", "structure"):
            raise ValueError("sampler must be 'partition' or 'structure'")
        if not self.scenarios or not self.betas:
            raise ValueError("empty scenario or beta grid")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")


def _parse_strategy(strategy: str) -> tuple[str, int | None]:
    if strategy == "rag":
        return "rag", None
    if strategy == "bde":
        return "bde", None
    if strategy.startswith("disc-"):
        q = int(strategy.split("-", 1)[1])
        if q < 2:
            raise ValueError(f"bad discretisation level in {strategy!r}")
        return "disc", q
    raise ValueError(f"unknown strategy {strategy!r}")


def make_scorer(dataset, strategy: str, ess: float = 1.0, alpha_mu: float = 1.0):
    """View + scorer for a named strategy.

    rag     score everything as Gaussian on the raw numeric view
    disc-q  cut continuous columns at q quantiles, score categorically
    bde     score categorically with no transformation (all-discrete data)
    """
    kind, q = _parse_strategy(strategy)
    if kind == "rag":
        return BgeScore.from_dataset(rag_view(dataset),
                                     BgeHyperparams(alpha_mu=alpha_mu))
    if kind == "disc":
        return BdeScore.from_dataset(discretize(dataset, q), BdeHyperparams(ess))
    return BdeScore.from_dataset(dataset, BdeHyperparams(ess))


def load_config(path: str) -> ExperimentConfig:
    """Read a one-level keyed config file (documented in the README)."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    exp = raw.get("experiment", {})
    mcmc = raw.get("mcmc", {})
    scores = raw.get("scores", {})
    data = raw.get("data", {})
    return ExperimentConfig(
        scenarios=tuple(exp.get("scenarios", ("cc",))),
        betas=tuple(exp.get("betas", (1.0,))),
        strategies=tuple(exp.get("strategies", ("rag", "disc-2"))),
        replicates=int(exp.get("replicates", 20)),
        rows=int(exp.get("rows", 200)),
        node_count=int(exp.get("node_count", 2)),
        seed=int(exp.get("seed", 0)),
        out_dir=str(exp.get("out", "results")),
        workers=int(exp.get("workers", 1)),
        write_samples=bool(exp.get("write_samples", True)),
        sampler=str(mcmc.get("sampler", "partition")),
        iterations=int(mcmc.get("iterations", 100_000)),
        burn_in_fraction=float(mcmc.get("burn_in_fraction", 0.2)),
        thinning=int(mcmc.get("thinning", 1)),
        ess=float(scores.get("ess", 1.0)),
        alpha_mu=float(scores.get("alpha_mu", 1.0)),
        max_parents=(int(scores["max_parents"])
                     if "max_parents" in scores else None),
        blacklist_path=raw.get("blacklist", {}).get("path"),
        p=float(data.get("p", 0.5)),
        sigma1=float(data.get("sigma1", 1.0)),
        sigma2=float(data.get("sigma2", 1.0)),
    )


def load_blacklist(path: str, names) -> frozenset[tuple[int, int]]:
    """Forbidden directed edges from a ``from,to`` CSV, resolved to indices."""
    index = {name: i for i, name in enumerate(names)}
    edges = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return frozenset()
        if [h.strip() for h in header] != ["from", "to"]:
            raise ValueError(f"expected 'from,to' header in {path}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: malformed row {row!r}")
            u, v = row[0].strip(), row[1].strip()
            if u not in index or v not in index:
                raise ValueError(f"{path}:{lineno}: unknown node name in {row!r}")
            edges.add((index[u], index[v]))
    return frozenset(edges)


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class _Cell:
    scenario: str
    beta: float | None
    strategy: str
    rep: int
    s_idx: int
    b_idx: int
    t_idx: int
    cfg: ExperimentConfig
    blacklist: frozenset[tuple[int, int]]


def _cell_sample_path(cell: _Cell) -> str:
    beta_tag = "na" if cell.beta is None else f"{cell.beta:g}"
    name = f"{cell.scenario}_beta{beta_tag}_{cell.strategy}_rep{cell.rep}.jsonl"
    return os.path.join(cell.cfg.out_dir, "samples", name)


def _run_cell(cell: _Cell):
    cfg = cell.cfg
    key = (cell.scenario, cell.beta, cell.strategy)
    try:
        stream = (cfg.seed, cell.s_idx, cell.b_idx, cell.t_idx, cell.rep)
        data_rng = np.random.default_rng(np.random.SeedSequence(stream + (0,)))
        scen_cfg = ScenarioConfig(
            scenario=cell.scenario, node_count=cfg.node_count,
            beta=0.0 if cell.beta is None else cell.beta,
            sigma1=cfg.sigma1, sigma2=cfg.sigma2,
            p=cfg.p, n_rows=cfg.rows)
        dataset, truth = generate(scen_cfg, data_rng)
        scorer = make_scorer(dataset, cell.strategy, cfg.ess, cfg.alpha_mu)
        table = build_score_table(scorer, cfg.max_parents, cell.blacklist)
        chain_cfg = ChainConfig(cfg.iterations, cfg.burn_in_fraction,
                                cfg.thinning)
        rng = chain_rng(*stream, 1)
        run = partition_mcmc if cfg.sampler == "partition" else structure_mcmc
        samples = run(table, chain_cfg, rng)
        if cfg.write_samples:
            path = _cell_sample_path(cell)
            samples.to_jsonl(path + ".part", header={
                "seed": cfg.seed, "stream": list(stream),
                "scenario": cell.scenario, "beta": cell.beta,
                "strategy": cell.strategy, "replicate": cell.rep,
                "iterations": cfg.iterations})
            os.replace(path + ".part", path)
        report = _metrics.replicate_report(samples, truth)
        return key, cell.rep, report, None
    except Exception as exc:  # recorded, does not abort the run
        return key, cell.rep, None, repr(exc)


def _format_fr(value: float) -> str:
    if math.isinf(value):
        return "inf"
    if math.isnan(value):
        return "nan"
    return repr(value)


@dataclass(frozen=True)
class MetricRow:
    scenario: str
    beta: float | None
    strategy: str
    report: "_metrics.EvalReport"

    def csv_line(self) -> str:
        beta_s = "" if self.beta is None else repr(self.beta)
        r = self.report
        return (f"{self.scenario},{beta_s},{self.strategy},{r.shd!r},{r.tp!r},"
                f"{r.fp!r},{r.fn!r},{r.tpr!r},{_format_fr(r.fr)}\n")


def run_experiment(cfg: ExperimentConfig, metrics_name: str = "metrics.csv"):
    """Execute the full grid; returns the metric rows it wrote.

    Per cell: draw a dataset, apply the strategy view, build the score
    table, run the sampler, store the kept samples, and compute replicate
    metrics.  A failing cell lands in failures.csv instead of aborting.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    if cfg.write_samples:
        os.makedirs(os.path.join(cfg.out_dir, "samples"), exist_ok=True)
    names = ["A", "B"] if cfg.node_count == 2 else ["A", "B", "C", "D"]
    blacklist = (load_blacklist(cfg.blacklist_path, names)
                 if cfg.blacklist_path else frozenset())

    cells = [
        _Cell(scenario, beta, strategy, rep, s_idx, b_idx, t_idx, cfg, blacklist)
        for s_idx, scenario in enumerate(cfg.scenarios)
        for b_idx, beta in enumerate(cfg.betas)
        for t_idx, strategy in enumerate(cfg.strategies)
        for rep in range(cfg.replicates)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_run_cell, cells, chunksize=1))
    else:
        outcomes = [_run_cell(c) for c in cells]

    grouped: dict[tuple, list[ReplicateReport]] = {}
    failures = []
    for key, rep, report, err in outcomes:
        if err is None:
            grouped.setdefault(key, []).append(report)
        else:
            failures.append((key, rep, err))

    rows = []
    for scenario in cfg.scenarios:
        for beta in cfg.betas:
            for strategy in cfg.strategies:
                key = (scenario, beta, strategy)
                reports = grouped.get(key)
                if not reports:
                    continue
                try:
                    summary = evaluate_replicates(reports)
                except ValueError:
                    summary = evaluate_replicates_no_fr(reports)
                rows.append(MetricRow(scenario, beta, strategy, summary))

    header = f"# seed={cfg.seed} replicates={cfg.replicates} rows={cfg.rows} " \
             f"iterations={cfg.iterations}\n"
    out = [header, ",".join(METRIC_COLUMNS) + "\n"]
    out.extend(row.csv_line() for row in rows)
    atomic_write_text(os.path.join(cfg.out_dir, metrics_name), "".join(out))

    if failures:
        lines = [header, "scenario,beta,strategy,replicate,error\n"]
        for (scenario, beta, strategy), rep, err in failures:
            beta_s = "" if beta is None else repr(beta)
            err_s = err.replace('"', "'")
            lines.append(f'{scenario},{beta_s},{strategy},{rep},"{err_s}"\n')
        atomic_write_text(os.path.join(cfg.out_dir, "failures.csv"),
                          "".join(lines))
    return rows


def evaluate_replicates_no_fr(reports) -> "_metrics.EvalReport":
    """Fallback when no replicate visited either reference class."""
    k = len(reports)
    return _metrics.EvalReport(
        tp=sum(r.tp for r in reports) / k,
        fp=sum(r.fp for r in reports) / k,
        fn=sum(r.fn for r in reports) / k,
        tpr=sum(r.tpr for r in reports) / k,
        shd=sum(r.shd for r in reports) / k,
        fr=float("nan"),
    )


FIG3_GRIDS = {
    "cc": np.linspace(0.0, 2.0, 41),
    "cd": np.linspace(0.0, 2.0, 41),
    "dc": np.linspace(0.0, 2.0, 41),
    "dd": np.linspace(0.0, 0.9, 46),
}


def reproduce(target: str, out_dir: str, replicates: int = 20, seed: int = 0,
              iterations: int = 100_000, workers: int = 1,
              rows: int = 200, thinning: int = 50):
    """Desk-scale reruns of the published tables and curves.

    ``fig3`` writes one (beta, r10, rtilde10) CSV per scenario from the
    closed forms.  ``table2`` runs the two-node grid (both strategies, six
    signal strengths per scenario); ``table3`` runs the four-node benchmark.
    The replicate count trades fidelity for wall time; 100 matches the
    published protocol, 20 is the desk default.
    """
    os.makedirs(out_dir, exist_ok=True)
    if target == "fig3":
        paths = []
        for scenario, grid in FIG3_GRIDS.items():
            grid_rows = theory_curves(scenario, grid)
            path = os.path.join(out_dir, f"fig3_{scenario}.csv")
            tmp = path + ".part"
            write_curves_csv(grid_rows, tmp,
                             comment=f"scenario={scenario} sigma1=1 sigma2=1 p=0.5")
            os.replace(tmp, path)
            paths.append(path)
        return paths

    if target == "table2":
        all_rows = []
        for scenario in ("cc", "cd", "dc", "dd"):
            cfg = ExperimentConfig(
                scenarios=(scenario,), betas=TABLE2_BETAS[scenario],
                strategies=("rag", "disc-2"), replicates=replicates,
                rows=rows, node_count=2, seed=seed, out_dir=out_dir,
                iterations=iterations, thinning=thinning, workers=workers,
                p=0.1 if scenario == "dd" else 0.5)
            all_rows.extend(run_experiment(cfg, metrics_name=f"table2_{scenario}.csv"))
        _write_combined(out_dir, "table2.csv", all_rows, seed, replicates,
                        rows, iterations)
        return all_rows

    if target == "table3":
        all_rows = []
        for scenario in ("cc", "cd", "dc", "dd"):
            strategies = ("rag", "disc-2") if scenario == "dd" \
                else ("rag", "disc-2", "disc-4")
            cfg = ExperimentConfig(
                scenarios=(scenario,), betas=(None,), strategies=strategies,
                replicates=replicates, rows=rows, node_count=4, seed=seed,
                out_dir=out_dir, iterations=iterations, thinning=thinning,
                workers=workers)
            all_rows.extend(run_experiment(cfg, metrics_name=f"table3_{scenario}.csv"))
        _write_combined(out_dir, "table3.csv", all_rows, seed, replicates,
                        rows, iterations)
        return all_rows

    raise ValueError(f"unknown reproduction target {target!r}")


def _write_combined(out_dir, name, rows, seed, replicates, n_rows, iterations):
    header = f"# seed={seed} replicates={replicates} rows={n_rows} " \
             f"iterations={iterations}\n"
    out = [header, ",".join(METRIC_COLUMNS) + "\n"]
    out.extend(row.csv_line() for row in rows)
    atomic_write_text(os.path.join(out_dir, name), "".join(out))
