"""Synthetic data generators and the two modelling views.

Four two-node processes (continuous/discrete parent and child in every
combination) and one four-node benchmark, all with a known ground-truth
DAG.  ``rag_view`` re-kinds everything as continuous for Gaussian scoring;
``discretize`` cuts continuous columns at equal quantiles for categorical
scoring.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .graph import Dag

__all__ = [
    "Column",
    "Dataset",
    "ScenarioConfig",
    "SCENARIOS",
    "gen_2node",
    "gen_4node",
    "generate",
    "discretize",
    "rag_view",
    "write_dataset",
    "read_dataset",
]

SCENARIOS = ("cc", "cd", "dc", "dd")


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "continuous" | "categorical"
    levels: int | None = None  # categorical only

    def __post_init__(self):
        if self.kind not in ("continuous", "categorical"):
            raise ValueError(f"unknown column kind {self.kind!r}")
        if self.kind == "categorical" and (self.levels is None or self.levels < 2):
            raise ValueError("categorical columns need levels >= 2")
        if self.kind == "continuous" and self.levels is not None:
            raise ValueError("continuous columns carry no level count")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-typed data matrix.

    ``values`` is (n_rows, n_cols) float64; categorical columns hold small
    integer codes in ``[0, levels)``.
    """

    columns: tuple[Column, ...]
    values: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.columns == other.columns
                and np.array_equal(self.values, other.values))

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != len(self.columns):
            raise ValueError("values shape does not match column descriptors")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        for j, col in enumerate(self.columns):
            if col.kind == "categorical":
                codes = vals[:, j]
                if not np.all(codes == np.floor(codes)):
                    raise ValueError(f"column {col.name}: non-integer codes")
                if codes.size and (codes.min() < 0 or codes.max() >= col.levels):
                    raise ValueError(
                        f"column {col.name}: codes outside [0, {col.levels})")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def codes(self) -> np.ndarray:
        """Integer view for categorical scoring; requires all-categorical."""
        if any(c.kind != "categorical" for c in self.columns):
            raise ValueError("dataset has continuous columns")
        return self.values.astype(np.int64)

    def level_counts(self) -> tuple[int, ...]:
        if any(c.kind != "categorical" for c in self.columns):
            raise ValueError("dataset has continuous columns")
        return tuple(c.levels for c in self.columns)


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of one synthetic data-generation process."""

    scenario: str
    node_count: int = 2
    beta: float = 1.0
    sigma1: float = 1.0
    sigma2: float = 1.0
    p: float = 0.5
    n_rows: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.node_count not in (2, 4):
            raise ValueError("node_count must be 2 or 4")
        if self.n_rows < 1:
            raise ValueError("n_rows must be positive")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("sigmas must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.scenario == "dd" and not 0.0 <= self.beta <= 1.0:
            raise ValueError("dd requires beta in [0, 1]")


def _rng_for(cfg: ScenarioConfig, rng: np.random.Generator | None) -> np.random.Generator:
    if rng is not None:
        return rng
    return np.random.default_rng(np.random.SeedSequence(cfg.seed))


# conditional tables for the all-discrete four-node benchmark:
# rows indexed by code of C (0..3), columns by code of A (0..1)
_DD4_PB = np.array([
    [0.05, 0.10],
    [0.10, 0.30],
    [0.30, 0.70],
    [0.70, 0.95],
])
_DD4_PD = np.array([
    [0.95, 0.90],
    [0.90, 0.70],
    [0.70, 0.30],
    [0.30, 0.05],
])


def gen_2node(cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> tuple[Dataset, Dag]:
    """Two-variable sample with ground truth A -> B.

    cc: A ~ N(-1, s1^2), B|a ~ N(beta*a, s2^2)
    cd: A ~ N(-1, s1^2), B|a ~ Bernoulli(logistic(beta*(a - mu_A)))
    dc: A ~ Bernoulli(p), B|a ~ N(beta*a, s2^2)
    dd: A ~ Bernoulli(p), B|a ~ Bernoulli(0.5 +/- beta/2)
    """
    if cfg.node_count != 2:
        raise ValueError("gen_2node needs node_count=2")
    rng = _rng_for(cfg, rng)
    n = cfg.n_rows
    mu_a = -1.0
    truth = Dag(2, frozenset({(0, 1)}))
    if cfg.scenario == "cc":
        a = rng.normal(mu_a, cfg.sigma1, size=n)
        b = rng.normal(cfg.beta * a, cfg.sigma2)
        cols = (Column("A", "continuous"), Column("B", "continuous"))
    elif cfg.scenario == "cd":
        a = rng.normal(mu_a, cfg.sigma1, size=n)
        b = (rng.random(n) < expit(cfg.beta * (a - mu_a))).astype(float)
        cols = (Column("A", "continuous"), Column("B", "categorical", 2))
    elif cfg.scenario == "dc":
        a = (rng.random(n) < cfg.p).astype(float)
        b = rng.normal(cfg.beta * a, cfg.sigma2)
        cols = (Column("A", "categorical", 2), Column("B", "continuous"))
    else:  # dd
        a = (rng.random(n) < cfg.p).astype(float)
        p_b = np.where(a == 1.0, 0.5 + cfg.beta / 2.0, 0.5 - cfg.beta / 2.0)
        b = (rng.random(n) < p_b).astype(float)
        cols = (Column("A", "categorical", 2), Column("B", "categorical", 2))
    return Dataset(cols, np.column_stack([a, b])), truth


def gen_4node(cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> tuple[Dataset, Dag]:
    """Four-variable benchmark with ground truth A->B, C->B, A->D, C->D.

    Continuous parents are A ~ N(-3, 1) and C ~ N(6, 1); continuous children
    use means 1.5a + 3c (B) and 2a + 1.5c (D) with unit noise.  Discrete
    parents take labels 1..2 (A) and 1..4 (C), stored as codes 0..1 / 0..3,
    and enter the child formulas through their printed labels.
    """
    if cfg.node_count != 4:
        raise ValueError("gen_4node needs node_count=4")
    rng = _rng_for(cfg, rng)
    n = cfg.n_rows
    mu_a, mu_c = -3.0, 6.0
    truth = Dag(4, frozenset({(0, 1), (2, 1), (0, 3), (2, 3)}))
    if cfg.scenario == "cc":
        a = rng.normal(mu_a, 1.0, size=n)
        c = rng.normal(mu_c, 1.0, size=n)
        b = rng.normal(1.5 * a + 3.0 * c, 1.0)
        d = rng.normal(2.0 * a + 1.5 * c, 1.0)
        cols = tuple(Column(x, "continuous") for x in "ABCD")
    elif cfg.scenario == "cd":
        a = rng.normal(mu_a, 1.0, size=n)
        c = rng.normal(mu_c, 1.0, size=n)
        shift = a + c - mu_a - mu_c
        b = (rng.random(n) < expit(2.0 * shift)).astype(float)
        d = (rng.random(n) < expit(-1.5 * shift)).astype(float)
        cols = (Column("A", "continuous"), Column("B", "categorical", 2),
                Column("C", "continuous"), Column("D", "categorical", 2))
    elif cfg.scenario == "dc":
        a_code = rng.integers(0, 2, size=n).astype(float)
        c_code = rng.integers(0, 4, size=n).astype(float)
        a_lab, c_lab = a_code + 1.0, c_code + 1.0
        b = rng.normal(1.5 * a_lab + 3.0 * c_lab, 1.0)
        d = rng.normal(2.0 * a_lab + 1.5 * c_lab, 1.0)
        a, c = a_code, c_code
        cols = (Column("A", "categorical", 2), Column("B", "continuous"),
                Column("C", "categorical", 4), Column("D", "continuous"))
    else:  # dd
        a = (rng.random(n) < 0.5).astype(float)
        c = rng.integers(0, 4, size=n).astype(float)
        ai, ci = a.astype(int), c.astype(int)
        b = (rng.random(n) < _DD4_PB[ci, ai]).astype(float)
        d = (rng.random(n) < _DD4_PD[ci, ai]).astype(float)
        cols = (Column("A", "categorical", 2), Column("B", "categorical", 2),
                Column("C", "categorical", 4), Column("D", "categorical", 2))
    return Dataset(cols, np.column_stack([a, b, c, d])), truth


def generate(cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> tuple[Dataset, Dag]:
    return gen_2node(cfg, rng) if cfg.node_count == 2 else gen_4node(cfg, rng)


def discretize(data: Dataset, q: int) -> Dataset:
    """Cut each continuous column into q equal-quantile levels.

    Cut points are the empirical i/q quantiles (linear interpolation);
    values tied with a cut fall in the lower bin.  Categorical columns pass
    through unchanged.
    """
    if q < 2:
        raise ValueError("q must be at least 2")
    new_cols = []
    new_vals = []
    for j, col in enumerate(data.columns):
        v = data.values[:, j]
        if col.kind == "categorical":
            new_cols.append(col)
            new_vals.append(v)
            continue
        if np.min(v) == np.max(v):
            raise ValueError(f"column {col.name} is constant; no valid cuts")
        cuts = np.quantile(v, [i / q for i in range(1, q)], method="linear")
        codes = np.searchsorted(cuts, v, side="left").astype(float)
        new_cols.append(Column(col.name, "categorical", q))
        new_vals.append(codes)
    return Dataset(tuple(new_cols), np.column_stack(new_vals))


def rag_view(data: Dataset) -> Dataset:
    """Re-kind every column as continuous; codes become plain reals."""
    cols = tuple(Column(c.name, "continuous") for c in data.columns)
    return Dataset(cols, data.values)


def write_dataset(data: Dataset, path: str, schema_path: str | None = None) -> None:
    """CSV with a header row plus a JSON schema sidecar mapping name -> kind."""
    if schema_path is None:
        schema_path = path + ".schema.json"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(data.names)
        for row in data.values:
            writer.writerow([_fmt_cell(x, c) for x, c in zip(row, data.columns)])
    schema = {}
    for col in data.columns:
        if col.kind == "continuous":
            schema[col.name] = {"kind": "continuous"}
        else:
            schema[col.name] = {"kind": "categorical", "levels": col.levels}
    with open(schema_path, "w") as fh:
        json.dump(schema, fh, indent=2)
        fh.write("\n")


def _fmt_cell(x: float, col: Column) -> str:
    return str(int(x)) if col.kind == "categorical" else repr(float(x))


def read_dataset(path: str, schema_path: str | None = None) -> Dataset:
    if schema_path is None:
        schema_path = path + ".schema.json"
    with open(schema_path) as fh:
        schema = json.load(fh)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    cols = []
    for name in header:
        if name not in schema:
            raise ValueError(f"column {name} missing from schema")
        entry = schema[name]
        if entry["kind"] == "continuous":
            cols.append(Column(name, "continuous"))
        else:
            cols.append(Column(name, "categorical", int(entry["levels"])))
    values = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(cols))
    return Dataset(tuple(cols), values)
