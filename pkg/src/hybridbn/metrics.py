"""Evaluation criteria computed from posterior samples against a known truth.

All skeleton counts follow the usual confusion-table reading; the frequency
ratio compares visits to the true graph's equivalence class against visits
to the empty graph, pooled over data replications.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf, isnan

from .graph import Cpdag, Dag, cpdag, shd, skeleton
from .sampler import PosteriorSamples

__all__ = [
    "EvalReport",
    "confusion",
    "map_dag",
    "frequency_ratio",
    "replicate_report",
    "evaluate_replicates",
]


@dataclass(frozen=True)
class EvalReport:
    """Averages across replicates; ``fr`` may be the +inf sentinel."""

    tp: float
    fp: float
    fn: float
    tpr: float
    shd: float
    fr: float


def confusion(estimate: Dag, truth: Dag) -> tuple[int, int, int, float]:
    """Skeleton-based (tp, fp, fn, tpr)."""
    if estimate.node_count != truth.node_count:
        raise ValueError("node counts differ")
    skel_e, skel_t = skeleton(estimate), skeleton(truth)
    tp = len(skel_e & skel_t)
    fp = len(skel_e - skel_t)
    fn = len(skel_t - skel_e)
    tpr = tp / (tp + fn) if tp + fn > 0 else float("nan")
    return tp, fp, fn, tpr


def map_dag(samples: PosteriorSamples) -> Dag:
    """Most frequently visited DAG among the kept samples.

    Ties go to the higher stored log score, then to the lexicographically
    smallest edge set.
    """
    if not samples.records:
        raise ValueError("no samples to summarise")
    groups: dict[tuple, list] = {}
    for _, dag, score in samples.records:
        key = dag.sorted_edges()
        entry = groups.get(key)
        if entry is None:
            groups[key] = [1, score, dag]
        else:
            entry[0] += 1
            entry[1] = max(entry[1], score)
    best_key = None
    best = None
    for key, (count, score, dag) in groups.items():
        if best is None:
            best_key, best = key, (count, score, dag)
            continue
        if (count, score) > (best[0], best[1]):
            best_key, best = key, (count, score, dag)
        elif (count, score) == (best[0], best[1]) and key < best_key:
            best_key, best = key, (count, score, dag)
    return best[2]


def frequency_ratio(per_replicate_counts) -> float:
    """Pooled class-visit ratio with 0 and +inf sentinels.

    Each item is (c1, c0): samples matching the true equivalence class and
    exact empty-graph visits in one replicate.  Raises when every count is
    zero, since the ratio is then undefined.
    """
    c1 = sum(int(a) for a, _ in per_replicate_counts)
    c0 = sum(int(b) for _, b in per_replicate_counts)
    if c1 < 0 or c0 < 0:
        raise ValueError("counts must be nonnegative")
    if c1 == 0 and c0 == 0:
        raise ValueError("all class counts are zero; ratio undefined")
    if c0 == 0:
        return inf
    return c1 / c0


@dataclass(frozen=True)
class ReplicateReport:
    tp: int
    fp: int
    fn: int
    tpr: float
    shd: int
    class_counts: tuple[int, int]  # (c1, c0)


def replicate_report(samples: PosteriorSamples, truth: Dag) -> ReplicateReport:
    """Point-estimate metrics plus class-visit counts for one replicate."""
    estimate = map_dag(samples)
    tp, fp, fn, tpr = confusion(estimate, truth)
    truth_class = cpdag(truth)
    class_cache: dict[tuple, Cpdag] = {}
    c1 = 0
    c0 = 0
    for _, dag, _ in samples.records:
        key = dag.sorted_edges()
        if not key:
            c0 += 1
        rep = class_cache.get(key)
        if rep is None:
            rep = cpdag(dag)
            class_cache[key] = rep
        if rep == truth_class:
            c1 += 1
    return ReplicateReport(tp, fp, fn, tpr, shd(estimate, truth), (c1, c0))


def evaluate_replicates(items) -> EvalReport:
    """Average the per-replicate metrics; pool class counts for the ratio.

    ``items`` holds (PosteriorSamples, truth Dag) pairs, or ready-made
    ReplicateReport values.
    """
    reports = [it if isinstance(it, ReplicateReport) else replicate_report(*it)
               for it in items]
    if not reports:
        raise ValueError("nothing to evaluate")
    k = len(reports)
    fr = frequency_ratio([r.class_counts for r in reports])
    tprs = [r.tpr for r in reports if not isnan(r.tpr)]
    return EvalReport(
        tp=sum(r.tp for r in reports) / k,
        fp=sum(r.fp for r in reports) / k,
        fn=sum(r.fn for r in reports) / k,
        tpr=sum(tprs) / len(tprs) if tprs else float("nan"),
        shd=sum(r.shd for r in reports) / k,
        fr=fr,
    )
