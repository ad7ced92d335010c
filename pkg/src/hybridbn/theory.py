"""Asymptotic expected log posterior ratios of the one-edge graph over the
empty graph, for the Gaussian-score strategy on raw data (r10) and the
categorical-score strategy on median-split data (rtilde10).

Closed forms exist for every scenario except the cross-moment integrals of
the continuous-parent/discrete-child case, which are evaluated by fixed
Gauss-Legendre quadrature on the half line (the Gaussian factor decays to
~1e-44 by x = 14, so truncation is far below the tolerance target).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf, log, sqrt

import numpy as np
from scipy.special import expit, ndtr

from .datagen import SCENARIOS, ScenarioConfig, discretize, generate, rag_view
from .scores import BdeScore, BgeScore

__all__ = [
    "LimitQuery",
    "QuadratureConfig",
    "RatioEstimate",
    "p11_tilde",
    "r10_limit",
    "rtilde10_limit",
    "finite_sample_ratio_mc",
    "theory_curves",
    "write_curves_csv",
]


@dataclass(frozen=True)
class LimitQuery:
    """One point at which to evaluate the posterior-ratio limits."""

    scenario: str
    beta: float
    sigma1: float = 1.0
    sigma2: float = 1.0
    p: float = 0.5

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("sigmas must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.scenario == "dd" and not 0.0 <= self.beta <= 1.0:
            raise ValueError("dd requires beta in [0, 1]")


@dataclass(frozen=True)
class QuadratureConfig:
    """Half-line rule: ``nodes``-point Gauss-Legendre on [0, cutoff]."""

    nodes: int = 128
    cutoff: float = 15.0
    tol: float = 1e-10

    def __post_init__(self):
        if self.nodes < 8:
            raise ValueError("need at least 8 quadrature nodes")
        if self.cutoff < 8.0:
            raise ValueError("cutoff truncates the Gaussian tail too early")


_RULE_CACHE: dict[tuple[int, float], tuple[np.ndarray, np.ndarray]] = {}


def _half_rule(quad: QuadratureConfig) -> tuple[np.ndarray, np.ndarray]:
    key = (quad.nodes, quad.cutoff)
    rule = _RULE_CACHE.get(key)
    if rule is None:
        t, w = np.polynomial.legendre.leggauss(quad.nodes)
        x = 0.5 * quad.cutoff * (t + 1.0)
        w = 0.5 * quad.cutoff * w * np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
        rule = (x, w)
        _RULE_CACHE[key] = rule
    return rule


def _half_gauss(f, quad: QuadratureConfig) -> float:
    """integral_0^inf phi(x) f(x) dx."""
    x, w = _half_rule(quad)
    return float(np.sum(w * f(x)))


def p11_tilde(q: LimitQuery, quad: QuadratureConfig | None = None) -> float:
    """Probability that both median-split variables land in their upper half.

    cc: int_0^inf phi(x) Phi(sigma1*beta*x / sigma2) dx
    cd: int_0^inf phi(x) logistic(beta*sigma1*x) dx
    dc: (1/2) Phi(beta / (2*sigma2))
    """
    quad = quad or QuadratureConfig()
    if q.scenario == "cc":
        c = q.sigma1 * q.beta / q.sigma2
        return _half_gauss(lambda x: ndtr(c * x), quad)
    if q.scenario == "cd":
        b = q.beta * q.sigma1
        return _half_gauss(lambda x: expit(b * x), quad)
    if q.scenario == "dc":
        return float(0.5 * ndtr(q.beta / (2.0 * q.sigma2)))
    raise ValueError(
        "the all-discrete scenario uses its exact cell probabilities, "
        "not a median-split orthant")


def _cd_covariance(q: LimitQuery, quad: QuadratureConfig) -> tuple[float, float, float]:
    # Full-line logistic-Gaussian moments, folded onto the half line where
    # the integrands are smooth: expit(bt) + expit(-bt) = 1 identically and
    # expit(bt) - expit(-bt) = tanh(bt/2) stay well-behaved for any b.
    b = q.beta * q.sigma1
    s11 = q.sigma1 * q.sigma1
    e_x2 = _half_gauss(lambda t: expit(b * t) + expit(-b * t), quad)
    s12 = q.sigma1 * _half_gauss(lambda t: t * (expit(b * t) - expit(-b * t)), quad)
    s22 = e_x2 - e_x2 * e_x2
    return s11, s12, s22


def r10_limit(q: LimitQuery, quad: QuadratureConfig | None = None) -> float:
    """Gaussian-score limit of the expected log posterior ratio per sample.

    cc: (1/2) log((sigma2^2 + beta^2 sigma1^2) / sigma2^2)
    cd: (1/2) log(S11 S22 / (S11 S22 - S12^2)) with quadrature moments
    dc (p = 1/2): (1/2) log(1 + beta^2 / (4 sigma2^2))
    dd: (1/2) log((1 - (2p-1)^2 beta^2) / (1 - beta^2)); +inf at beta = 1
    """
    quad = quad or QuadratureConfig()
    if q.scenario == "cc":
        return 0.5 * log(1.0 + (q.beta * q.sigma1 / q.sigma2) ** 2)
    if q.scenario == "cd":
        s11, s12, s22 = _cd_covariance(q, quad)
        return 0.5 * log(s11 * s22 / (s11 * s22 - s12 * s12))
    if q.scenario == "dc":
        if q.p != 0.5:
            raise ValueError(
                "the discrete-parent closed form assumes p = 1/2; use "
                "finite_sample_ratio_mc for other values")
        return 0.5 * log(1.0 + q.beta * q.beta / (4.0 * q.sigma2 * q.sigma2))
    # dd
    if q.beta == 1.0:
        return inf
    num = 1.0 - (2.0 * q.p - 1.0) ** 2 * q.beta * q.beta
    return 0.5 * log(num / (1.0 - q.beta * q.beta))


def _xlogx(x: float) -> float:
    return 0.0 if x <= 0.0 else x * log(x)


def rtilde10_limit(q: LimitQuery, quad: QuadratureConfig | None = None) -> float:
    """Categorical-score limit on median-split data; bounded by log 2.

    For the three scenarios with a continuous variable this is
    log 4 + 2 p11 log p11 + (1 - 2 p11) log(1/2 - p11) with the orthant
    probability p11; the all-discrete case is the mutual information of its
    exact 2x2 cell table.
    """
    quad = quad or QuadratureConfig()
    if q.scenario == "dd":
        p, beta = q.p, q.beta
        hi, lo = 0.5 + beta / 2.0, 0.5 - beta / 2.0
        cells = {
            (1, 1): p * hi, (1, 0): p * lo,
            (0, 1): (1.0 - p) * lo, (0, 0): (1.0 - p) * hi,
        }
        row = {1: p, 0: 1.0 - p}
        col = {1: cells[1, 1] + cells[0, 1], 0: cells[1, 0] + cells[0, 0]}
        total = 0.0
        for (i, j), c in cells.items():
            if c > 0.0:
                total += c * log(c / (row[i] * col[j]))
        return total
    p11 = min(p11_tilde(q, quad), 0.5)
    return log(4.0) + 2.0 * _xlogx(p11) + _xlogx(0.5 - p11) * 2.0


@dataclass(frozen=True)
class RatioEstimate:
    r10_mean: float
    r10_se: float
    rtilde10_mean: float
    rtilde10_se: float


def finite_sample_ratio_mc(q: LimitQuery, n_rows: int, replications: int,
                           seed: int = 0) -> RatioEstimate:
    """Monte-Carlo check of both limits through the exact score functions.

    Per replicate: draw a two-node dataset from the scenario, then compute
    (1/N) * [score(one-edge graph) - score(empty graph)] with the Gaussian
    score on the raw numeric view and with the categorical score on the
    median-split view.  Returns means with standard errors.
    """
    if n_rows < 100:
        raise ValueError("need at least 100 rows per replicate")
    if replications < 2:
        raise ValueError("need at least 2 replications")
    cfg = ScenarioConfig(scenario=q.scenario, node_count=2, beta=q.beta,
                         sigma1=q.sigma1, sigma2=q.sigma2, p=q.p,
                         n_rows=n_rows)
    r10 = np.empty(replications)
    rt10 = np.empty(replications)
    for rep in range(replications):
        rng = np.random.default_rng(np.random.SeedSequence((seed, rep)))
        ds, _ = generate(cfg, rng)
        bge = BgeScore.from_dataset(rag_view(ds))
        r10[rep] = (bge.log_marginal((0, 1)) - bge.log_marginal((0,))
                    - bge.log_marginal((1,))) / n_rows
        bde = BdeScore.from_dataset(discretize(ds, 2))
        g1 = bde.local_score(0, ()) + bde.local_score(1, (0,))
        g0 = bde.local_score(0, ()) + bde.local_score(1, ())
        rt10[rep] = (g1 - g0) / n_rows
    return RatioEstimate(
        float(r10.mean()), float(r10.std(ddof=1) / sqrt(replications)),
        float(rt10.mean()), float(rt10.std(ddof=1) / sqrt(replications)),
    )


def theory_curves(scenario: str, beta_grid, sigma1: float = 1.0,
                  sigma2: float = 1.0, p: float = 0.5,
                  quad: QuadratureConfig | None = None
                  ) -> list[tuple[float, float, float]]:
    """(beta, r10, rtilde10) rows over a grid, ready for plotting."""
    quad = quad or QuadratureConfig()
    rows = []
    for beta in beta_grid:
        q = LimitQuery(scenario, float(beta), sigma1, sigma2, p)
        rows.append((float(beta), r10_limit(q, quad), rtilde10_limit(q, quad)))
    return rows


def write_curves_csv(rows, path: str, comment: str | None = None) -> None:
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write("beta,r10,rtilde10\n")
        for beta, r10, rt10 in rows:
            fh.write(f"{beta!r},{r10!r},{rt10!r}\n")
