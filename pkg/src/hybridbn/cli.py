"""Command-line entry point.

Subcommands: simulate (draw a synthetic dataset), learn (posterior samples
for one dataset), evaluate (metrics of a sample file against a truth DAG),
theory (limit curves), reproduce (desk-scale table/figure reruns).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .datagen import ScenarioConfig, generate, read_dataset, write_dataset
from .experiments import (
    METRIC_COLUMNS,
    atomic_write_text,
    load_blacklist,
    load_config,
    make_scorer,
    reproduce,
    run_experiment,
)
from .graph import read_dag_csv, write_dag_csv
from .metrics import frequency_ratio, replicate_report
from .sampler import ChainConfig, PosteriorSamples, chain_rng, partition_mcmc, structure_mcmc
from .scores import build_score_table
from .theory import theory_curves, write_curves_csv


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory or file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridbn",
        description="structure learning experiments on hybrid data")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw one synthetic dataset")
    _add_common(p)
    p.add_argument("--scenario", required=True, choices=("cc", "cd", "dc", "dd"))
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--nodes", type=int, default=2, choices=(2, 4))
    p.add_argument("--rows", type=int, default=200)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)

    p = sub.add_parser("learn", help="posterior samples for one dataset")
    _add_common(p)
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--schema", default=None,
                   help="schema JSON (default: <data>.schema.json)")
    p.add_argument("--strategy", default="rag",
                   help="rag, disc-<q>, or bde")
    p.add_argument("--sampler", default="partition",
                   choices=("partition", "structure"))
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--burn-in", type=float, default=0.2)
    p.add_argument("--thinning", type=int, default=1)
    p.add_argument("--ess", type=float, default=1.0)
    p.add_argument("--max-parents", type=int, default=None)
    p.add_argument("--blacklist", default=None, help="forbidden-edge CSV")

    p = sub.add_parser("evaluate", help="metrics of samples vs a truth DAG")
    _add_common(p)
    p.add_argument("--samples", required=True, help="samples JSONL")
    p.add_argument("--truth", required=True, help="truth DAG edge CSV")

    p = sub.add_parser("theory", help="limit curves over a signal grid")
    _add_common(p)
    p.add_argument("--scenario", required=True, choices=("cc", "cd", "dc", "dd"))
    p.add_argument("--betas", default=None,
                   help="comma-separated grid, e.g. 0,0.5,1")
    p.add_argument("--beta", type=float, default=None, help="single point")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)

    p = sub.add_parser("reproduce", help="desk-scale table/figure reruns")
    _add_common(p)
    p.add_argument("target", choices=("table2", "table3", "fig3"))
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--rows", type=int, default=200)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None,
                   help="run a custom grid from a config file instead")
    return parser


def _cmd_simulate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    cfg = ScenarioConfig(scenario=args.scenario, node_count=args.nodes,
                         beta=args.beta, sigma1=args.sigma1,
                         sigma2=args.sigma2, p=args.p, n_rows=args.rows,
                         seed=args.seed)
    dataset, truth = generate(cfg)
    data_path = os.path.join(args.out, "data.csv")
    write_dataset(dataset, data_path)
    write_dag_csv(truth, os.path.join(args.out, "truth.csv"), dataset.names)
    with open(data_path) as fh:
        body = fh.read()
    atomic_write_text(data_path,
                      f"# seed={args.seed} scenario={args.scenario} "
                      f"beta={args.beta}\n" + body)
    print(f"wrote {data_path} (+schema, truth)")
    return 0


def _read_data_csv(path: str, schema_path: str | None):
    # tolerate a leading comment line
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("#"):
        import tempfile
        with open(path) as fh:
            body = fh.read().split("\n", 1)[1]
        tmp = tempfile.NamedTemporaryFile(
            "w", suffix=".csv", delete=False,
            dir=os.path.dirname(os.path.abspath(path)))
        tmp.write(body)
        tmp.close()
        try:
            return read_dataset(tmp.name, schema_path or path + ".schema.json")
        finally:
            os.unlink(tmp.name)
    return read_dataset(path, schema_path)


def _cmd_learn(args) -> int:
    dataset = _read_data_csv(args.data, args.schema)
    scorer = make_scorer(dataset, args.strategy, ess=args.ess)
    blacklist = (load_blacklist(args.blacklist, dataset.names)
                 if args.blacklist else frozenset())
    table = build_score_table(scorer, args.max_parents, blacklist)
    chain_cfg = ChainConfig(args.iterations, args.burn_in, args.thinning,
                            seed=args.seed)
    run = partition_mcmc if args.sampler == "partition" else structure_mcmc
    samples = run(table, chain_cfg, chain_rng(args.seed))
    out = args.out
    if os.path.isdir(out) or out.endswith(os.sep):
        os.makedirs(out, exist_ok=True)
        out = os.path.join(out, "samples.jsonl")
    samples.to_jsonl(out + ".part", header={
        "seed": args.seed, "strategy": args.strategy,
        "sampler": args.sampler, "iterations": args.iterations,
        "names": dataset.names})
    os.replace(out + ".part", out)
    print(f"wrote {out} ({len(samples.records)} kept, "
          f"acceptance {samples.acceptance_rate:.3f})")
    return 0


def _cmd_evaluate(args) -> int:
    samples = PosteriorSamples.from_jsonl(args.samples)
    truth, _names = read_dag_csv(args.truth)
    report = replicate_report(samples, truth)
    try:
        fr = frequency_ratio([report.class_counts])
        fr_s = "inf" if fr == float("inf") else repr(fr)
    except ValueError:
        fr_s = "nan"
    lines = [f"# seed=n/a samples={args.samples}\n",
             "shd,tp,fp,fn,tpr,fr\n",
             f"{report.shd},{report.tp},{report.fp},{report.fn},"
             f"{report.tpr!r},{fr_s}\n"]
    out = args.out
    if os.path.isdir(out) or out.endswith(os.sep):
        os.makedirs(out, exist_ok=True)
        out = os.path.join(out, "evaluation.csv")
    atomic_write_text(out, "".join(lines))
    print(f"wrote {out}")
    return 0


def _cmd_theory(args) -> int:
    if args.betas is not None:
        grid = [float(x) for x in args.betas.split(",") if x.strip()]
    elif args.beta is not None:
        grid = [args.beta]
    else:
        grid = list(np.linspace(0.0, 0.9 if args.scenario == "dd" else 2.0, 46))
    rows = theory_curves(args.scenario, grid, args.sigma1, args.sigma2, args.p)
    out = args.out
    if os.path.isdir(out) or out.endswith(os.sep):
        os.makedirs(out, exist_ok=True)
        out = os.path.join(out, f"theory_{args.scenario}.csv")
    write_curves_csv(rows, out + ".part",
                     comment=f"seed=n/a scenario={args.scenario} "
                             f"sigma1={args.sigma1} sigma2={args.sigma2} p={args.p}")
    os.replace(out + ".part", out)
    print(f"wrote {out}")
    return 0


def _cmd_reproduce(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        run_experiment(cfg)
        print(f"wrote {os.path.join(cfg.out_dir, 'metrics.csv')}")
        return 0
    result = reproduce(args.target, args.out, replicates=args.replicates,
                       seed=args.seed, iterations=args.iterations,
                       workers=args.workers, rows=args.rows)
    if args.target == "fig3":
        for path in result:
            print(f"wrote {path}")
    else:
        print(f"wrote {os.path.join(args.out, args.target + '.csv')} "
              f"({len(result)} rows)")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    commands = {
        "simulate": _cmd_simulate,
        "learn": _cmd_learn,
        "evaluate": _cmd_evaluate,
        "theory": _cmd_theory,
        "reproduce": _cmd_reproduce,
    }
    return commands[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
