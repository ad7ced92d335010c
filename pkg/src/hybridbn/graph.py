"""DAGs, CPDAGs and ordered partitions.

Nodes are integer indices ``0..n-1``; an optional name table lives with the
dataset, not the graph.  All graph values are immutable after construction,
so every operation here is a pure function.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

__all__ = [
    "Dag",
    "Cpdag",
    "OrderedPartition",
    "skeleton",
    "cpdag",
    "shd",
    "dag_to_partition",
    "partition_compatible",
    "enumerate_dags",
    "all_ordered_partitions",
    "write_dag_csv",
    "read_dag_csv",
]


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph on ``node_count`` indexed nodes.

    ``edges`` holds (parent, child) pairs.  Construction rejects self loops,
    out-of-range endpoints and directed cycles.
    """

    node_count: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        object.__setattr__(self, "edges", frozenset(self.edges))
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self loop on node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ValueError(f"edge ({u},{v}) out of range")
        if self.topological_order() is None:
            raise ValueError("graph contains a directed cycle")

    def parents(self, v: int) -> frozenset[int]:
        return frozenset(u for u, w in self.edges if w == v)

    def parent_map(self) -> list[frozenset[int]]:
        pa = [set() for _ in range(self.node_count)]
        for u, v in self.edges:
            pa[v].add(u)
        return [frozenset(s) for s in pa]

    def topological_order(self) -> list[int] | None:
        """Kahn's algorithm; None if a cycle is present."""
        indeg = [0] * self.node_count
        children = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            indeg[v] += 1
            children[u].append(v)
        queue = [v for v in range(self.node_count) if indeg[v] == 0]
        order = []
        while queue:
            v = queue.pop()
            order.append(v)
            for w in children[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
        return order if len(order) == self.node_count else None

    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))


@dataclass(frozen=True)
class Cpdag:
    """Canonical representative of a Markov equivalence class.

    Compelled edges are directed, reversible edges undirected.  The two sets
    are disjoint on the skeleton.
    """

    node_count: int
    directed: frozenset[tuple[int, int]]
    undirected: frozenset[tuple[int, int]]  # stored as (min, max)

    def __post_init__(self):
        object.__setattr__(self, "directed", frozenset(self.directed))
        und = frozenset((min(a, b), max(a, b)) for a, b in self.undirected)
        object.__setattr__(self, "undirected", und)
        dir_skel = {(min(a, b), max(a, b)) for a, b in self.directed}
        if dir_skel & self.undirected:
            raise ValueError("directed and undirected edge sets overlap")

    def skeleton(self) -> frozenset[tuple[int, int]]:
        return frozenset({(min(a, b), max(a, b)) for a, b in self.directed}
                         | self.undirected)


@dataclass(frozen=True)
class OrderedPartition:
    """Permutation of the nodes plus block sizes.

    Blocks are listed so that, walking the permutation left to right, each
    node's parents may only come from blocks listed after its own, with at
    least one parent in the immediately following block; the last block holds
    the parentless nodes.  Within a block nodes are kept sorted so equal
    partitions compare equal.
    """

    permutation: tuple[int, ...]
    block_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "permutation", tuple(self.permutation))
        object.__setattr__(self, "block_sizes", tuple(self.block_sizes))
        n = len(self.permutation)
        if sorted(self.permutation) != list(range(n)):
            raise ValueError("permutation is not a bijection on 0..n-1")
        if any(s < 1 for s in self.block_sizes):
            raise ValueError("block sizes must be positive")
        if sum(self.block_sizes) != n:
            raise ValueError("block sizes must sum to the node count")
        # canonical form: ascending node order inside each block
        blocks = []
        pos = 0
        for s in self.block_sizes:
            blocks.append(tuple(sorted(self.permutation[pos:pos + s])))
            pos += s
        object.__setattr__(self, "_blocks", tuple(blocks))
        object.__setattr__(
            self, "permutation", tuple(v for b in blocks for v in b))

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        return self._blocks

    @property
    def node_count(self) -> int:
        return len(self.permutation)


def skeleton(dag: Dag) -> frozenset[tuple[int, int]]:
    """Unordered adjacency pairs of a DAG, duplicates collapsed."""
    return frozenset((min(u, v), max(u, v)) for u, v in dag.edges)


def _v_structures(dag: Dag) -> set[tuple[int, int]]:
    """Directed edges compelled by some collider a -> b <- c, a not adj c."""
    adj = skeleton(dag)
    pa = dag.parent_map()
    compelled = set()
    for b in range(dag.node_count):
        for a, c in itertools.combinations(sorted(pa[b]), 2):
            if (min(a, c), max(a, c)) not in adj:
                compelled.add((a, b))
                compelled.add((c, b))
    return compelled


def cpdag(dag: Dag) -> Cpdag:
    """Map a DAG to its equivalence-class representative.

    Start from the skeleton with collider edges directed, then close under
    the orientation rules (no new colliders, no cycles); whatever remains
    unforced stays undirected.
    """
    n = dag.node_count
    directed = _v_structures(dag)
    undirected = {e for e in skeleton(dag)
                  if e not in {(min(a, b), max(a, b)) for a, b in directed}}

    def adjacent(a, b):
        return ((min(a, b), max(a, b)) in undirected
                or (a, b) in directed or (b, a) in directed)

    changed = True
    while changed:
        changed = False
        for a, b in sorted(undirected):
            orient = None  # winner of (x, y) orientation for edge {a, b}
            for x, y in ((a, b), (b, a)):
                # chain u -> x - y with u, y nonadjacent forces x -> y
                if any((u, x) in directed and not adjacent(u, y)
                       for u in range(n) if u not in (x, y)):
                    orient = (x, y)
                    break
                # directed path x -> w -> y plus x - y forces x -> y
                if any((x, w) in directed and (w, y) in directed
                       for w in range(n)):
                    orient = (x, y)
                    break
                # x - c, x - d with c -> y, d -> y and c, d nonadjacent
                done = False
                for c, d in itertools.combinations(range(n), 2):
                    if c in (x, y) or d in (x, y):
                        continue
                    if ((min(x, c), max(x, c)) in undirected
                            and (min(x, d), max(x, d)) in undirected
                            and (c, y) in directed and (d, y) in directed
                            and not adjacent(c, d)):
                        orient = (x, y)
                        done = True
                        break
                if done:
                    break
            if orient is not None:
                undirected.remove((min(a, b), max(a, b)))
                directed.add(orient)
                changed = True
    return Cpdag(n, frozenset(directed), frozenset(undirected))


def shd(estimate: Dag, truth: Dag) -> int:
    """Structural Hamming distance between two DAGs.

    Skeleton false negatives plus false positives, plus one per skeleton
    edge present in both graphs whose orientation status (direction, or
    directed-vs-undirected) differs between the two equivalence-class
    representatives.
    """
    if estimate.node_count != truth.node_count:
        raise ValueError("node counts differ")
    skel_e, skel_t = skeleton(estimate), skeleton(truth)
    fp = len(skel_e - skel_t)
    fn = len(skel_t - skel_e)
    ce, ct = cpdag(estimate), cpdag(truth)

    def status(c: Cpdag, e: tuple[int, int]) -> str:
        if e in c.undirected:
            return "-"
        return ">" if (e[0], e[1]) in c.directed else "<"

    direction_errors = sum(
        1 for e in skel_e & skel_t if status(ce, e) != status(ct, e))
    return fp + fn + direction_errors


def dag_to_partition(dag: Dag) -> OrderedPartition:
    """Collapse a DAG to its ordered partition by peeling parentless nodes.

    The layer removed first ends up listed last, so the first block holds
    the nodes that survive longest.
    """
    remaining = set(range(dag.node_count))
    pa = [set(p) for p in dag.parent_map()]
    layers = []
    while remaining:
        outpoints = sorted(v for v in remaining if not pa[v])
        if not outpoints:
            raise ValueError("graph contains a directed cycle")
        layers.append(tuple(outpoints))
        remaining -= set(outpoints)
        for v in remaining:
            pa[v] -= set(outpoints)
    layers.reverse()
    return OrderedPartition(
        tuple(v for layer in layers for v in layer),
        tuple(len(layer) for layer in layers),
    )


def partition_compatible(dag: Dag, partition: OrderedPartition) -> bool:
    """True when the DAG satisfies the partition's parent constraints.

    Every node in block i < m draws all parents from later blocks with at
    least one in block i+1; nodes in the last block are parentless.
    """
    if dag.node_count != partition.node_count:
        return False
    blocks = partition.blocks
    block_of = {}
    for i, b in enumerate(blocks):
        for v in b:
            block_of[v] = i
    pa = dag.parent_map()
    last = len(blocks) - 1
    for v in range(dag.node_count):
        i = block_of[v]
        if i == last:
            if pa[v]:
                return False
            continue
        if not pa[v]:
            return False
        if any(block_of[u] <= i for u in pa[v]):
            return False
        if not any(block_of[u] == i + 1 for u in pa[v]):
            return False
    return True


def enumerate_dags(n: int) -> list[Dag]:
    """All DAGs on n nodes (three states per unordered pair, acyclic only)."""
    pairs = list(itertools.combinations(range(n), 2))
    dags = []
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), s in zip(pairs, states):
            if s == 1:
                edges.append((a, b))
            elif s == 2:
                edges.append((b, a))
        try:
            dags.append(Dag(n, frozenset(edges)))
        except ValueError:
            continue
    return dags


def all_ordered_partitions(n: int) -> list[OrderedPartition]:
    """Every ordered partition of n nodes (Fubini-number many)."""
    results = []

    def rec(remaining: frozenset[int], blocks: list[tuple[int, ...]]):
        if not remaining:
            results.append(OrderedPartition(
                tuple(v for b in blocks for v in b),
                tuple(len(b) for b in blocks)))
            return
        items = sorted(remaining)
        for r in range(1, len(items) + 1):
            for sub in itertools.combinations(items, r):
                rec(remaining - set(sub), blocks + [sub])

    rec(frozenset(range(n)), [])
    return results


def write_dag_csv(dag: Dag, path: str, names: list[str] | None = None) -> None:
    """Edge list with ``from,to`` header; node list goes to ``path + '.nodes'``."""
    if names is None:
        names = [f"X{i + 1}" for i in range(dag.node_count)]
    if len(names) != dag.node_count:
        raise ValueError("name table size mismatch")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["from", "to"])
        for u, v in dag.sorted_edges():
            writer.writerow([names[u], names[v]])
    with open(path + ".nodes", "w") as fh:
        fh.write(",".join(names) + "\n")


def read_dag_csv(path: str, names: list[str] | None = None) -> tuple[Dag, list[str]]:
    """Inverse of :func:`write_dag_csv`; names default to the sidecar list."""
    if names is None:
        with open(path + ".nodes") as fh:
            names = fh.read().strip().split(",")
    index = {name: i for i, name in enumerate(names)}
    edges = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["from", "to"]:
            raise ValueError(f"expected 'from,to' header in {path}")
        for row in reader:
            if not row:
                continue
            u, v = row[0].strip(), row[1].strip()
            if u not in index or v not in index:
                raise ValueError(f"unknown node name in edge {u}->{v}")
            edges.add((index[u], index[v]))
    return Dag(len(names), frozenset(edges)), names
