"""Shared test oracles, independent of the library's own code paths."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from hybridbn.graph import Dag


def d_separated(dag: Dag, x: int, y: int, z: frozenset[int]) -> bool:
    """Moralisation oracle: x indep y given z in the ancestral moral graph."""
    n = dag.node_count
    pa = dag.parent_map()
    # ancestors of {x, y} | z, inclusive
    needed = {x, y} | set(z)
    anc = set()
    stack = list(needed)
    while stack:
        v = stack.pop()
        if v in anc:
            continue
        anc.add(v)
        stack.extend(pa[v])
    # moral graph on the ancestral set
    adj = {v: set() for v in anc}
    for v in anc:
        for u in pa[v]:
            adj[u].add(v)
            adj[v].add(u)
        for u, w in itertools.combinations(pa[v], 2):
            adj[u].add(w)
            adj[w].add(u)
    # connectivity avoiding z
    if x in z or y in z:
        return True
    seen = {x}
    stack = [x]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u == y:
                return False
            if u not in seen and u not in z:
                seen.add(u)
                stack.append(u)
    return True


def independence_pattern(dag: Dag) -> frozenset:
    """All d-separation statements of a DAG; equal patterns <=> same class."""
    n = dag.node_count
    stmts = set()
    for x, y in itertools.combinations(range(n), 2):
        rest = [v for v in range(n) if v not in (x, y)]
        for r in range(len(rest) + 1):
            for z in itertools.combinations(rest, r):
                if d_separated(dag, x, y, frozenset(z)):
                    stmts.add((x, y, frozenset(z)))
    return frozenset(stmts)


def orthant_probability(rho: float) -> float:
    """P(X > 0, Y > 0) for standard bivariate normal with correlation rho."""
    return 0.25 + np.arcsin(rho) / (2.0 * np.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240814)
