import numpy as np
import pytest

from hybridbn.datagen import (
    Column,
    Dataset,
    ScenarioConfig,
    discretize,
    gen_2node,
    gen_4node,
    rag_view,
    read_dataset,
    write_dataset,
)

BIG = 100_000


def test_scenario_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig("xx")
    with pytest.raises(ValueError):
        ScenarioConfig("dd", beta=1.5)  # dependence parameter capped at 1
    with pytest.raises(ValueError):
        ScenarioConfig("cc", p=1.4)
    with pytest.raises(ValueError):
        ScenarioConfig("cc", node_count=3)


def test_cc_2node_covariance():
    ds, truth = gen_2node(ScenarioConfig("cc", beta=1.0, n_rows=BIG, seed=1))
    assert truth.edges == frozenset({(0, 1)})
    cov = np.cov(ds.values.T)
    assert np.allclose(cov, [[1.0, 1.0], [1.0, 2.0]], atol=0.05)
    assert ds.values[:, 0].mean() == pytest.approx(-1.0, abs=0.02)


def test_cd_2node_balance_at_parent_mean():
    ds, _ = gen_2node(ScenarioConfig("cd", beta=3.0, n_rows=BIG, seed=2))
    a, b = ds.values[:, 0], ds.values[:, 1]
    near = np.abs(a + 1.0) < 0.05  # parent near its mean: coin flip for b
    assert near.sum() > 2000
    assert b[near].mean() == pytest.approx(0.5, abs=0.05)
    assert ds.columns[1] == Column("B", "categorical", 2)


def test_dc_2node_conditional_means():
    ds, _ = gen_2node(ScenarioConfig("dc", beta=1.5, p=0.5, n_rows=BIG, seed=3))
    a, b = ds.values[:, 0], ds.values[:, 1]
    assert a.mean() == pytest.approx(0.5, abs=0.01)
    assert b[a == 1].mean() == pytest.approx(1.5, abs=0.03)
    assert b[a == 0].mean() == pytest.approx(0.0, abs=0.03)


def test_dd_2node_cells():
    ds, _ = gen_2node(ScenarioConfig("dd", beta=0.5, p=0.1, n_rows=BIG, seed=4))
    a, b = ds.values[:, 0], ds.values[:, 1]
    assert a.mean() == pytest.approx(0.1, abs=0.01)
    assert b[a == 1].mean() == pytest.approx(0.75, abs=0.02)
    assert b[a == 0].mean() == pytest.approx(0.25, abs=0.01)


def test_cc_4node_moments():
    ds, truth = gen_4node(ScenarioConfig("cc", node_count=4, n_rows=BIG, seed=5))
    assert truth.edges == frozenset({(0, 1), (2, 1), (0, 3), (2, 3)})
    a, b, c, d = (ds.values[:, i] for i in range(4))
    assert a.mean() == pytest.approx(-3.0, abs=0.02)
    assert c.mean() == pytest.approx(6.0, abs=0.02)
    assert (b - 1.5 * a - 3.0 * c).var() == pytest.approx(1.0, abs=0.05)
    assert (d - 2.0 * a - 1.5 * c).var() == pytest.approx(1.0, abs=0.05)


def test_cd_4node_children_binary():
    ds, _ = gen_4node(ScenarioConfig("cd", node_count=4, n_rows=BIG, seed=6))
    kinds = [col.kind for col in ds.columns]
    assert kinds == ["continuous", "categorical", "continuous", "categorical"]
    shift = ds.values[:, 0] + ds.values[:, 2] - (-3.0) - 6.0
    up = shift > 1.0
    assert ds.values[up, 1].mean() > 0.8  # steep positive logistic for B
    assert ds.values[up, 3].mean() < 0.2  # steep negative logistic for D


def test_dc_4node_labels_enter_means():
    ds, _ = gen_4node(ScenarioConfig("dc", node_count=4, n_rows=BIG, seed=7))
    a, b, c, d = (ds.values[:, i] for i in range(4))
    assert ds.columns[2].levels == 4
    mask = (a == 0) & (c == 3)  # labels 1 and 4
    assert b[mask].mean() == pytest.approx(1.5 * 1 + 3.0 * 4, abs=0.05)
    assert d[mask].mean() == pytest.approx(2.0 * 1 + 1.5 * 4, abs=0.05)


def test_dd_4node_conditional_table():
    ds, _ = gen_4node(ScenarioConfig("dd", node_count=4, n_rows=BIG, seed=8))
    a, b, c, d = (ds.values[:, i] for i in range(4))
    first = (a == 0) & (c == 0)  # labels A=1, C=1
    assert b[first].mean() == pytest.approx(0.05, abs=0.01)
    assert d[first].mean() == pytest.approx(0.95, abs=0.01)
    last = (a == 1) & (c == 3)  # labels A=2, C=4
    assert b[last].mean() == pytest.approx(0.95, abs=0.01)
    assert d[last].mean() == pytest.approx(0.05, abs=0.01)


def test_generators_deterministic():
    cfg = ScenarioConfig("cc", beta=0.7, n_rows=500, seed=11)
    d1, _ = gen_2node(cfg)
    d2, _ = gen_2node(cfg)
    assert np.array_equal(d1.values, d2.values)


def test_discretize_median_cut():
    ds = Dataset((Column("X", "continuous"),),
                 np.array([[1.0], [2.0], [3.0], [4.0]]))
    out = discretize(ds, 2)
    assert out.columns[0] == Column("X", "categorical", 2)
    assert out.values[:, 0].tolist() == [0.0, 0.0, 1.0, 1.0]


def test_discretize_quartiles_even_split():
    ds = Dataset((Column("X", "continuous"),),
                 np.arange(1.0, 9.0).reshape(-1, 1))
    out = discretize(ds, 4)
    assert np.bincount(out.values[:, 0].astype(int)).tolist() == [2, 2, 2, 2]


def test_discretize_passthrough_and_errors():
    cat = Dataset((Column("K", "categorical", 3),),
                  np.array([[0.0], [2.0], [1.0]]))
    out = discretize(cat, 5)
    assert out == cat
    const = Dataset((Column("X", "continuous"),), np.full((4, 1), 2.5))
    with pytest.raises(ValueError, match="constant"):
        discretize(const, 2)
    with pytest.raises(ValueError):
        discretize(cat, 1)


def test_discretize_median_balance(rng):
    ds = Dataset((Column("X", "continuous"),), rng.normal(size=(999, 1)))
    out = discretize(ds, 2)
    counts = np.bincount(out.values[:, 0].astype(int))
    assert abs(counts[0] - counts[1]) <= 1


def test_rag_view():
    ds = Dataset((Column("A", "categorical", 2), Column("B", "continuous")),
                 np.array([[0.0, 1.5], [1.0, -0.5], [1.0, 2.0], [0.0, 0.1]]))
    out = rag_view(ds)
    assert all(c.kind == "continuous" for c in out.columns)
    assert np.array_equal(out.values, ds.values)
    again = rag_view(out)
    assert again == out


def test_rag_after_median_split_balanced(rng):
    ds = Dataset((Column("X", "continuous"),), rng.normal(size=(1000, 1)))
    col = rag_view(discretize(ds, 2)).values[:, 0]
    assert set(np.unique(col)) == {0.0, 1.0}
    assert col.mean() == pytest.approx(0.5, abs=1 / 1000)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset((Column("A", "categorical", 2),), np.array([[2.0]]))
    with pytest.raises(ValueError):
        Dataset((Column("A", "categorical", 2),), np.array([[0.5]]))
    with pytest.raises(ValueError):
        Column("A", "categorical")  # missing level count


def test_dataset_csv_roundtrip(tmp_path):
    ds, _ = gen_2node(ScenarioConfig("cd", beta=1.0, n_rows=50, seed=9))
    path = str(tmp_path / "data.csv")
    write_dataset(ds, path)
    back = read_dataset(path)
    assert back.columns == ds.columns
    assert np.allclose(back.values, ds.values)
