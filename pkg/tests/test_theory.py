import math

import numpy as np
import pytest
from scipy.special import expit, ndtr

from conftest import orthant_probability
from hybridbn.theory import (
    LimitQuery,
    QuadratureConfig,
    finite_sample_ratio_mc,
    p11_tilde,
    r10_limit,
    rtilde10_limit,
    theory_curves,
    write_curves_csv,
)

LOG2 = math.log(2.0)


def test_query_validation():
    with pytest.raises(ValueError):
        LimitQuery("dd", beta=1.2)
    with pytest.raises(ValueError):
        LimitQuery("cc", beta=1.0, sigma1=0.0)


def test_r10_closed_forms():
    assert r10_limit(LimitQuery("cc", 0.0)) == 0.0
    assert r10_limit(LimitQuery("cc", 1.0)) == pytest.approx(
        0.5 * LOG2, abs=1e-15)
    assert r10_limit(LimitQuery("dc", 2.0)) == pytest.approx(
        0.5 * LOG2, abs=1e-15)
    assert r10_limit(LimitQuery("dd", 0.5, p=0.5)) == pytest.approx(
        0.5 * math.log(4.0 / 3.0), abs=1e-15)
    assert r10_limit(LimitQuery("dd", 1.0, p=0.5)) == math.inf
    with pytest.raises(ValueError, match="p = 1/2"):
        r10_limit(LimitQuery("dc", 1.0, p=0.3))


def test_p11_orthant_oracle():
    # median-split upper-quadrant mass equals the bivariate-normal orthant
    # probability at the implied correlation
    for beta, s1, s2 in [(0.5, 1.0, 1.0), (1.0, 1.0, 1.0), (2.0, 1.5, 0.7)]:
        rho = beta * s1 / math.sqrt(s2 * s2 + beta * beta * s1 * s1)
        got = p11_tilde(LimitQuery("cc", beta, sigma1=s1, sigma2=s2))
        assert got == pytest.approx(orthant_probability(rho), abs=1e-10)
    assert p11_tilde(LimitQuery("cc", 0.0)) == pytest.approx(0.25, abs=1e-12)


def test_p11_examples():
    assert p11_tilde(LimitQuery("cc", 1.0)) == pytest.approx(0.375, abs=1e-8)
    assert p11_tilde(LimitQuery("dc", 2.0)) == pytest.approx(
        0.5 * ndtr(1.0), abs=1e-10)
    with pytest.raises(ValueError):
        p11_tilde(LimitQuery("dd", 0.5))


def test_p11_quadrature_self_consistency():
    grids = {"cc": np.linspace(0.0, 2.0, 21), "cd": np.linspace(0.0, 2.0, 21)}
    for scenario, grid in grids.items():
        for beta in grid:
            a = p11_tilde(LimitQuery(scenario, float(beta)),
                          QuadratureConfig(nodes=128))
            b = p11_tilde(LimitQuery(scenario, float(beta)),
                          QuadratureConfig(nodes=256))
            assert abs(a - b) < 1e-10


def test_rtilde_values():
    # p11 = 3/8 plugged into the discretised-ratio expression
    expected = (math.log(4.0) + 0.75 * math.log(0.375)
                + 0.25 * math.log(0.125))
    assert rtilde10_limit(LimitQuery("cc", 1.0)) == pytest.approx(
        expected, abs=1e-8)
    # binary-symmetric mutual information at dependence 1/2
    beta = 0.5
    mi = (0.5 * (1 + beta) * math.log1p(beta)
          + 0.5 * (1 - beta) * math.log1p(-beta))
    assert rtilde10_limit(LimitQuery("dd", beta, p=0.5)) == pytest.approx(
        mi, abs=1e-12)
    assert rtilde10_limit(LimitQuery("dd", 1.0, p=0.5)) == pytest.approx(
        LOG2, abs=1e-12)


def test_rtilde_zero_at_independence():
    for scenario in ("cc", "cd", "dc", "dd"):
        assert rtilde10_limit(LimitQuery(scenario, 0.0)) == pytest.approx(
            0.0, abs=1e-12)
        assert r10_limit(LimitQuery(scenario, 0.0)) == pytest.approx(
            0.0, abs=1e-12)


def test_rtilde_saturates_at_log2():
    # the bound itself: discretised ratio can never exceed log 2, and it is
    # approached as the signal grows (slowly for the orthant scenarios,
    # which converge like arctan, so probe those far out)
    assert rtilde10_limit(LimitQuery("dc", 10.0)) == pytest.approx(
        LOG2, abs=1e-3)
    for scenario in ("cc", "cd"):
        val = rtilde10_limit(LimitQuery(scenario, 1e4))
        assert LOG2 - 1e-3 < val <= LOG2 + 1e-12


def test_cd_r10_against_monte_carlo_covariance():
    rng = np.random.default_rng(2)
    n = 10_000_000
    x1 = rng.normal(0.0, 1.0, size=n)
    x2 = (rng.random(n) < expit(x1)).astype(float)
    s = np.cov(np.vstack([x1, x2]))
    mc = 0.5 * math.log(s[0, 0] * s[1, 1]
                        / (s[0, 0] * s[1, 1] - s[0, 1] ** 2))
    assert r10_limit(LimitQuery("cd", 1.0)) == pytest.approx(mc, abs=1e-3)


@pytest.mark.parametrize("scenario,grid,params", [
    ("cc", np.linspace(0.0, 2.0, 21), {}),
    ("cd", np.linspace(0.0, 2.0, 21), {}),
    ("dc", np.linspace(0.0, 2.0, 21), {}),
    ("dd", np.linspace(0.0, 0.9, 19), {"p": 0.5}),
])
def test_curve_properties(scenario, grid, params):
    rows = theory_curves(scenario, grid, **params)
    prev_r10 = -1.0
    for beta, r10, rt10 in rows:
        assert r10 >= 0.0
        assert 0.0 <= rt10 <= LOG2 + 1e-12
        if beta > 0.0:
            assert r10 > rt10
        assert r10 > prev_r10 or beta == 0.0
        prev_r10 = r10


def test_dd_curve_passes_log2():
    rows = theory_curves("dd", np.linspace(0.0, 0.99, 34), p=0.5)
    r10s = [r for _, r, _ in rows]
    assert all(b > a for a, b in zip(r10s, r10s[1:]))  # strictly increasing
    assert any(r > LOG2 for r in r10s)


def test_finite_sample_smoke():
    est = finite_sample_ratio_mc(LimitQuery("cc", 1.0), 20_000, 8, seed=5)
    assert est.r10_mean == pytest.approx(0.5 * LOG2, abs=0.01)
    assert est.rtilde10_mean == pytest.approx(
        rtilde10_limit(LimitQuery("cc", 1.0)), abs=0.01)
    est0 = finite_sample_ratio_mc(LimitQuery("dd", 0.0, p=0.5), 20_000, 8,
                                  seed=6)
    assert abs(est0.r10_mean) < max(0.003, 3 * est0.r10_se)
    assert abs(est0.rtilde10_mean) < max(0.003, 3 * est0.rtilde10_se)
    with pytest.raises(ValueError):
        finite_sample_ratio_mc(LimitQuery("cc", 1.0), 50, 8)


def test_curves_csv(tmp_path):
    rows = theory_curves("cc", [0.0, 1.0])
    path = str(tmp_path / "curve.csv")
    write_curves_csv(rows, path, comment="seed=n/a demo")
    lines = open(path).read().splitlines()
    assert lines[0].startswith("#")
    assert lines[1] == "beta,r10,rtilde10"
    assert len(lines) == 4
