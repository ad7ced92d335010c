"""Posterior samplers over graph structures.

The default chain walks the space of ordered partitions, whose posterior
collapses a sum over all compatible DAGs into an independent log-sum-exp
per node.  A classic single-edge chain over DAGs is kept as a baseline.
Proposal probabilities are counted exactly (several move types can produce
the same target partition), so both chains satisfy detailed balance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Dag, OrderedPartition
from .scores import ScoreTable

__all__ = [
    "ChainConfig",
    "PosteriorSamples",
    "chain_rng",
    "partition_log_score",
    "propose_partition_move",
    "sample_dag_given_partition",
    "partition_mcmc",
    "structure_mcmc",
]

# (split, merge, relocate-node, swap-nodes)
DEFAULT_MOVE_WEIGHTS = (0.25, 0.25, 0.3, 0.2)

_SCORE_MEMO_CAP = 200_000


@dataclass(frozen=True)
class ChainConfig:
    iterations: int
    burn_in_fraction: float = 0.2
    thinning: int = 1
    seed: int = 0
    move_weights: tuple[float, float, float, float] = DEFAULT_MOVE_WEIGHTS

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise ValueError("burn_in_fraction must lie in [0, 1)")
        if self.thinning < 1:
            raise ValueError("thinning must be positive")
        w = tuple(float(x) for x in self.move_weights)
        if len(w) != 4 or any(x < 0 for x in w) or sum(w) <= 0:
            raise ValueError("move_weights must be 4 nonnegative reals")
        total = sum(w)
        object.__setattr__(self, "move_weights", tuple(x / total for x in w))

    @property
    def burn_in(self) -> int:
        return int(self.iterations * self.burn_in_fraction)


@dataclass(frozen=True)
class PosteriorSamples:
    """Kept draws of one chain: (iteration, DAG, log score) triples."""

    n_nodes: int
    records: tuple[tuple[int, Dag, float], ...]
    acceptance_rate: float

    def dags(self) -> list[Dag]:
        return [d for _, d, _ in self.records]

    def to_jsonl(self, path: str, header: dict | None = None) -> None:
        with open(path, "w") as fh:
            if header is not None:
                fh.write(json.dumps({"header": True, "nodes": self.n_nodes,
                                     **header}) + "\n")
            for it, dag, score in self.records:
                fh.write(json.dumps({
                    "iteration": it,
                    "edges": [list(e) for e in dag.sorted_edges()],
                    "log_score": score,
                }) + "\n")
            fh.write(json.dumps({"footer": True, "nodes": self.n_nodes,
                                 "kept": len(self.records),
                                 "acceptance_rate": self.acceptance_rate}) + "\n")

    @classmethod
    def from_jsonl(cls, path: str) -> "PosteriorSamples":
        records = []
        nodes = None
        acceptance = float("nan")
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                if obj.get("header"):
                    nodes = obj["nodes"]
                elif obj.get("footer"):
                    nodes = obj["nodes"]
                    acceptance = obj["acceptance_rate"]
                else:
                    records.append(obj)
        if nodes is None:
            raise ValueError(f"{path}: missing footer record")
        recs = tuple(
            (r["iteration"],
             Dag(nodes, frozenset(tuple(e) for e in r["edges"])),
             r["log_score"])
            for r in records)
        return cls(nodes, recs, acceptance)


def chain_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream indices)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((seed,) + stream)))


def _mask(nodes) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


def _logsumexp(vals: np.ndarray) -> float:
    top = vals.max()
    return float(top + np.log(np.sum(np.exp(vals - top))))


def _node_valid(table: ScoreTable, v: int, later_mask: int, next_mask: int,
                is_last: bool) -> tuple[np.ndarray, np.ndarray]:
    masks, scores = table.entries(v)
    if is_last:
        sel = masks == 0
    else:
        sel = (masks & ~later_mask) == 0
        sel &= (masks & next_mask) != 0
    return masks[sel], scores[sel]


def _blocks_log_score(blocks: tuple[tuple[int, ...], ...], table: ScoreTable) -> float:
    m = len(blocks)
    later = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        later[i] = later[i + 1] | _mask(blocks[i])
    total = 0.0
    for i, block in enumerate(blocks):
        is_last = i == m - 1
        next_mask = 0 if is_last else _mask(blocks[i + 1])
        for v in block:
            _, vals = _node_valid(table, v, later[i + 1], next_mask, is_last)
            if vals.size == 0:
                if not is_last and table.max_parents == 0:
                    raise ValueError(
                        "partition requires a parent set beyond the table cap")
                return float("-inf")
            total += _logsumexp(vals)
    return total


def partition_log_score(partition: OrderedPartition, table: ScoreTable) -> float:
    """Log of the summed scores of every DAG compatible with the partition.

    Per node this is a log-sum-exp over the parent sets drawn from later
    blocks that touch the following block (the last block contributes its
    empty-set scores).  -inf signals a partition made empty by the blacklist.
    """
    if partition.node_count != table.n_nodes:
        raise ValueError("partition and table disagree on the node count")
    return _blocks_log_score(partition.blocks, table)


# --- proposal machinery ----------------------------------------------------
#
# Move types: split a block in two, merge two adjacent blocks, relocate one
# node (to an adjacent block, or to a new singleton block next to its own),
# swap two nodes across blocks.  Relocations overlap with splits and merges
# (moving a node out to a fresh singleton IS a split; a singleton absorbed
# by a neighbour IS a merge), so the transition probability of a proposed
# target counts every application of every type that can produce it.


def _move_counts(blocks) -> tuple[int, int, int, int]:
    m = len(blocks)
    n = sum(len(b) for b in blocks)
    c_split = sum((1 << len(b)) - 2 for b in blocks)
    c_merge = m - 1
    c_reloc = 0
    for i, b in enumerate(blocks):
        s = len(b)
        dests = (i > 0) + (i < m - 1) + 2 * (s >= 2)
        c_reloc += s * dests
    c_swap = (n * n - sum(len(b) * len(b) for b in blocks)) // 2
    return c_split, c_merge, c_reloc, c_swap


def _transition_log_prob(src, dst, weights) -> float:
    """log q(dst | src) for the mixed move kernel, all overlaps counted."""
    counts = _move_counts(src)
    avail = sum(w for w, c in zip(weights, counts) if c > 0)
    ms, md = len(src), len(dst)
    prob = 0.0
    if md == ms + 1:
        i = 0
        while i < ms and src[i] == dst[i]:
            i += 1
        if (i < ms and tuple(sorted(dst[i] + dst[i + 1])) == src[i]
                and dst[i + 2:] == src[i + 1:]):
            prob += weights[0] / avail / counts[0]
            reloc_apps = (len(dst[i]) == 1) + (len(dst[i + 1]) == 1)
            if reloc_apps and counts[2] > 0:
                prob += reloc_apps * weights[2] / avail / counts[2]
    elif md == ms - 1:
        i = 0
        while i < md and src[i] == dst[i]:
            i += 1
        if (i < md and tuple(sorted(src[i] + src[i + 1])) == dst[i]
                and src[i + 2:] == dst[i + 1:]):
            prob += weights[1] / avail / counts[1]
            reloc_apps = (len(src[i]) == 1) + (len(src[i + 1]) == 1)
            if reloc_apps and counts[2] > 0:
                prob += reloc_apps * weights[2] / avail / counts[2]
    elif md == ms:
        diff = [k for k in range(ms) if src[k] != dst[k]]
        if len(diff) == 2:
            i, j = diff
            si, sj = set(src[i]), set(src[j])
            di, dj = set(dst[i]), set(dst[j])
            if len(si) == len(di) and len(sj) == len(dj):
                if (si - di) == (dj - sj) and (di - si) == (sj - dj) \
                        and len(si - di) == 1 and counts[3] > 0:
                    prob += weights[3] / avail / counts[3]
            elif j == i + 1 and counts[2] > 0:
                moved_right = si - di
                moved_left = sj - dj
                if (len(moved_right) == 1 and not (di - si)
                        and dj == sj | moved_right and len(si) >= 2):
                    prob += weights[2] / avail / counts[2]
                elif (len(moved_left) == 1 and not (dj - sj)
                        and di == si | moved_left and len(sj) >= 2):
                    prob += weights[2] / avail / counts[2]
    if prob <= 0.0:
        return float("-inf")
    return math.log(prob)


def _weighted_index(rng, weights) -> int:
    u = rng.random() * sum(weights)
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def _propose_blocks(blocks, rng, weights):
    """One move application drawn from the mixed kernel; None if stuck."""
    counts = _move_counts(blocks)
    avail = [w if c > 0 else 0.0 for w, c in zip(weights, counts)]
    if sum(avail) == 0.0:
        return None
    kind = _weighted_index(rng, avail)
    m = len(blocks)
    if kind == 0:  # split
        bw = [(1 << len(b)) - 2 for b in blocks]
        i = _weighted_index(rng, bw)
        b = blocks[i]
        mask = int(rng.integers(1, (1 << len(b)) - 1))
        first = tuple(v for k, v in enumerate(b) if mask >> k & 1)
        second = tuple(v for k, v in enumerate(b) if not mask >> k & 1)
        return blocks[:i] + (first, second) + blocks[i + 1:]
    if kind == 1:  # merge
        i = int(rng.integers(0, m - 1))
        merged = tuple(sorted(blocks[i] + blocks[i + 1]))
        return blocks[:i] + (merged,) + blocks[i + 2:]
    if kind == 2:  # relocate
        bw = [len(b) * ((i > 0) + (i < m - 1) + 2 * (len(b) >= 2))
              for i, b in enumerate(blocks)]
        i = _weighted_index(rng, bw)
        b = blocks[i]
        v = b[int(rng.integers(0, len(b)))]
        dests = []
        if i > 0:
            dests.append("L")
        if i < m - 1:
            dests.append("R")
        if len(b) >= 2:
            dests.extend(("NL", "NR"))
        dest = dests[int(rng.integers(0, len(dests)))]
        rest = tuple(x for x in b if x != v)
        if dest == "L":
            left = tuple(sorted(blocks[i - 1] + (v,)))
            mid = (rest,) if rest else ()
            return blocks[:i - 1] + (left,) + mid + blocks[i + 1:]
        if dest == "R":
            right = tuple(sorted(blocks[i + 1] + (v,)))
            mid = (rest,) if rest else ()
            return blocks[:i] + mid + (right,) + blocks[i + 2:]
        if dest == "NL":
            return blocks[:i] + ((v,), rest) + blocks[i + 1:]
        return blocks[:i] + (rest, (v,)) + blocks[i + 1:]
    # swap
    pairs = []
    pw = []
    for i in range(m):
        for j in range(i + 1, m):
            pairs.append((i, j))
            pw.append(len(blocks[i]) * len(blocks[j]))
    i, j = pairs[_weighted_index(rng, pw)]
    u = blocks[i][int(rng.integers(0, len(blocks[i])))]
    v = blocks[j][int(rng.integers(0, len(blocks[j])))]
    bi = tuple(sorted([x for x in blocks[i] if x != u] + [v]))
    bj = tuple(sorted([x for x in blocks[j] if x != v] + [u]))
    return blocks[:i] + (bi,) + blocks[i + 1:j] + (bj,) + blocks[j + 1:]


def propose_partition_move(partition: OrderedPartition, rng: np.random.Generator,
                           weights=DEFAULT_MOVE_WEIGHTS
                           ) -> tuple[OrderedPartition, float]:
    """Propose a neighbouring partition.

    Returns the proposal and log[q(old|new) / q(new|old)], the correction
    that makes a Metropolis-Hastings chain with this kernel reversible.
    """
    blocks = partition.blocks
    dst = _propose_blocks(blocks, rng, weights)
    if dst is None:  # single-node network: nothing to move
        return partition, 0.0
    log_ratio = (_transition_log_prob(dst, blocks, weights)
                 - _transition_log_prob(blocks, dst, weights))
    return _partition_from_blocks(dst), log_ratio


def _partition_from_blocks(blocks) -> OrderedPartition:
    return OrderedPartition(tuple(v for b in blocks for v in b),
                            tuple(len(b) for b in blocks))


def _sample_dag_blocks(blocks, table: ScoreTable, rng) -> tuple[Dag, float]:
    m = len(blocks)
    later = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        later[i] = later[i + 1] | _mask(blocks[i])
    edges = []
    total = 0.0
    n = table.n_nodes
    for i, block in enumerate(blocks):
        is_last = i == m - 1
        next_mask = 0 if is_last else _mask(blocks[i + 1])
        for v in block:
            masks, vals = _node_valid(table, v, later[i + 1], next_mask, is_last)
            if vals.size == 0:
                raise ValueError(
                    f"node {v} has no admissible parent set under the partition")
            top = vals.max()
            w = np.exp(vals - top)
            cum = np.cumsum(w)
            k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            k = min(k, len(w) - 1)
            chosen = int(masks[k])
            total += float(vals[k])
            for p in range(n):
                if chosen >> p & 1:
                    edges.append((p, v))
    return Dag(n, frozenset(edges)), total


def sample_dag_given_partition(partition: OrderedPartition, table: ScoreTable,
                               rng: np.random.Generator) -> Dag:
    """Draw one DAG compatible with the partition, parent sets proportional
    to their exponentiated scores.  Acyclic by construction."""
    dag, _ = _sample_dag_blocks(partition.blocks, table, rng)
    return dag


class _ScoreMemo:
    def __init__(self, table: ScoreTable):
        self.table = table
        self.cache: dict[tuple, float] = {}

    def __call__(self, blocks) -> float:
        val = self.cache.get(blocks)
        if val is None:
            val = _blocks_log_score(blocks, self.table)
            if len(self.cache) < _SCORE_MEMO_CAP:
                self.cache[blocks] = val
        return val


def partition_mcmc(table: ScoreTable, cfg: ChainConfig,
                   rng: np.random.Generator | None = None) -> PosteriorSamples:
    """Metropolis-Hastings over ordered partitions.

    Starts from the single-block partition (always admissible).  After
    burn-in, every ``thinning``-th iteration stores one DAG drawn from the
    current partition together with that DAG's log score.
    """
    if rng is None:
        rng = chain_rng(cfg.seed)
    n = table.n_nodes
    blocks = (tuple(range(n)),)
    memo = _ScoreMemo(table)
    score = memo(blocks)
    weights = cfg.move_weights
    burn = cfg.burn_in
    records = []
    accepted = 0
    for it in range(1, cfg.iterations + 1):
        dst = _propose_blocks(blocks, rng, weights)
        if dst is not None:
            log_ratio = (_transition_log_prob(dst, blocks, weights)
                         - _transition_log_prob(blocks, dst, weights))
            new_score = memo(dst)
            delta = new_score - score + log_ratio
            if delta >= 0.0 or rng.random() < math.exp(delta):
                blocks, score = dst, new_score
                accepted += 1
        if it > burn and (it - burn) % cfg.thinning == 0:
            dag, dag_score = _sample_dag_blocks(blocks, table, rng)
            records.append((it, dag, dag_score))
    return PosteriorSamples(n, tuple(records), accepted / cfg.iterations)


# --- single-edge chain over DAGs -------------------------------------------


def _has_path(children: list[set[int]], src: int, dst: int) -> bool:
    if src == dst:
        return True
    stack = [src]
    seen = {src}
    while stack:
        v = stack.pop()
        for w in children[v]:
            if w == dst:
                return True
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def _dag_moves(pa: list[int], children: list[set[int]], table: ScoreTable):
    """All valid single-edge additions, deletions and reversals."""
    n = table.n_nodes
    moves = []
    for v in range(n):
        for u in range(n):
            if u == v:
                continue
            if pa[v] >> u & 1:
                moves.append(("del", u, v))
                # u->v becomes v->u: needs admissibility and no other u..v path
                if (pa[u] | (1 << v)) in table._lookup[u]:
                    children[u].discard(v)
                    ok = not _has_path(children, u, v)
                    children[u].add(v)
                    if ok:
                        moves.append(("rev", u, v))
            else:
                if (pa[v] | (1 << u)) in table._lookup[v]:
                    if not _has_path(children, v, u):
                        moves.append(("add", u, v))
    return moves


def structure_mcmc(table: ScoreTable, cfg: ChainConfig,
                   rng: np.random.Generator | None = None) -> PosteriorSamples:
    """Metropolis-Hastings over DAGs with single-edge moves.

    Proposals are uniform over the valid neighbourhood (additions,
    deletions, reversals respecting acyclicity, the parent cap and the
    blacklist); the acceptance ratio carries the neighbourhood-size
    correction.  Starts from the empty graph.
    """
    if rng is None:
        rng = chain_rng(cfg.seed)
    n = table.n_nodes
    pa = [0] * n
    children: list[set[int]] = [set() for _ in range(n)]
    local = [table.local(v, ()) for v in range(n)]
    burn = cfg.burn_in
    records = []
    accepted = 0

    def apply(move):
        op, u, v = move
        if op == "add":
            pa[v] |= 1 << u
            children[u].add(v)
        elif op == "del":
            pa[v] &= ~(1 << u)
            children[u].discard(v)
        else:
            pa[v] &= ~(1 << u)
            children[u].discard(v)
            pa[u] |= 1 << v
            children[v].add(u)

    def undo(move):
        op, u, v = move
        if op == "add":
            apply(("del", u, v))
        elif op == "del":
            apply(("add", u, v))
        else:
            apply(("rev", v, u))

    for it in range(1, cfg.iterations + 1):
        moves = _dag_moves(pa, children, table)
        if moves:
            move = moves[int(rng.integers(0, len(moves)))]
            fwd = len(moves)
            op, u, v = move
            apply(move)
            new_v = table._lookup[v][pa[v]]
            delta = new_v - local[v]
            new_u = local[u]
            if op == "rev":
                new_u = table._lookup[u][pa[u]]
                delta += new_u - local[u]
            back = len(_dag_moves(pa, children, table))
            log_acc = delta + math.log(fwd) - math.log(back)
            if log_acc >= 0.0 or rng.random() < math.exp(log_acc):
                local[v] = new_v
                local[u] = new_u
                accepted += 1
            else:
                undo(move)
        if it > burn and (it - burn) % cfg.thinning == 0:
            edges = frozenset((u, v) for v in range(n) for u in range(n)
                              if pa[v] >> u & 1)
            records.append((it, Dag(n, edges), float(sum(local))))
    return PosteriorSamples(n, tuple(records), accepted / cfg.iterations)
