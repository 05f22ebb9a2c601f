"""Exact sampling variance/covariance formulas for small graphs, plus
Poisson-approximation diagnostics for the observed-count noise model.

These routines enumerate pair structure exhaustively (ordered vertex pairs
with shared-neighbor counts) and are meant as test oracles on graphs of at
most a few hundred vertices, not for production estimation.

Two displayed groupings were corrected against brute-force enumeration
over all seed subsets: the one-wave snowball variance carries
``-N_k^2 (1-p)^(2k+2)`` (not +), and the induced-sampling pair sums carry
an extra factor p^2 for including both vertices of the pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.stats import binom, poisson

from .graphs import Graph
from .operators import build_operator
from .sampling import sample_counts_batch

__all__ = [
    "CommonNeighborTensor",
    "common_neighbor_tensor",
    "snowball_cov",
    "induced_var",
    "PoissonDiagnostics",
    "poisson_diagnostics",
    "tv_distance_to_poisson",
]


@dataclass(frozen=True)
class CommonNeighborTensor:
    """Counts of ordered pairs of distinct vertices by (degree, degree,
    number of common neighbors), split into nonadjacent (n0) and adjacent
    (n1) pairs."""

    n0: dict
    n1: dict
    n_v: int

    def total_pairs(self) -> int:
        return sum(self.n0.values()) + sum(self.n1.values())


def common_neighbor_tensor(g: Graph) -> CommonNeighborTensor:
    adj = g.adjacency_sets()
    deg = g.degrees()
    n0: dict = {}
    n1: dict = {}
    for u in range(g.n_v):
        au = adj[u]
        du = int(deg[u])
        for v in range(g.n_v):
            if u == v:
                continue
            t = len(au & adj[v])
            key = (du, int(deg[v]), t)
            if v in au:
                n1[key] = n1.get(key, 0) + 1
            else:
                n0[key] = n0.get(key, 0) + 1
    return CommonNeighborTensor(n0, n1, g.n_v)


def snowball_cov(g: Graph, p: float, k: int, l: int) -> float:
    """Covariance of observed degree counts (N*_k, N*_l) under one-wave
    snowball sampling; for k == l this is the variance.

    A vertex is included iff it or one of its neighbors is seeded, so the
    exclusion probability of a degree-d vertex is (1-p)^(d+1); pair terms
    follow from the joint exclusion probabilities, which depend on
    adjacency and the number of common neighbors.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    q = 1.0 - p
    tensor = common_neighbor_tensor(g)
    deg = g.degrees()
    n_k = int(np.sum(deg == k))
    n_l = int(np.sum(deg == l))
    cross = 0.0
    for (a, b, t), cnt in tensor.n1.items():
        if a == k and b == l:
            cross += cnt * q ** (k + l - t)
    for (a, b, t), cnt in tensor.n0.items():
        if a == k and b == l:
            cross += cnt * q ** (k + l - t + 2)
    if k != l:
        return cross - n_k * n_l * q ** (k + l + 2)
    incl = 1.0 - q ** (k + 1)
    return (n_k * incl + cross
            - n_k ** 2 * q ** (2 * k + 2)
            - n_k * (1.0 - 2.0 * q ** (k + 1)))


def induced_var(g: Graph, p: float, k: int) -> float:
    """Variance of the observed count N*_k under induced subgraph sampling.

    Mean term: sum_i N_i P_ind(k, i). Pair terms sum over ordered pairs
    with degrees (r, s) and t common neighbors; m of the common neighbors
    are sampled and each vertex independently completes its observed
    degree to k from its non-shared neighbors. Binomial coefficients
    outside their support contribute zero.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    q = 1.0 - p
    deg = g.degrees()
    m_top = int(deg.max()) if deg.size else 0
    op = build_operator("induced", p, m_top)
    counts = np.bincount(deg, minlength=m_top + 1)
    mean_k = float(op.matrix[k] @ counts) if k <= m_top else 0.0
    tensor = common_neighbor_tensor(g)
    pair = 0.0
    for (r, s, t), cnt in tensor.n0.items():
        acc = 0.0
        for m in range(t + 1):
            c = comb(t, m)
            if not (0 <= k - m <= r - t and 0 <= k - m <= s - t):
                continue
            acc += (c * comb(r - t, k - m) * comb(s - t, k - m)
                    * p ** (2 * k - m + 2) * q ** ((r + s - t) - (2 * k - m)))
        pair += cnt * acc
    for (r, s, t), cnt in tensor.n1.items():
        acc = 0.0
        for m in range(t + 1):
            c = comb(t, m)
            if not (0 <= k - m - 1 <= r - t - 1 and 0 <= k - m - 1 <= s - t - 1):
                continue
            acc += (c * comb(r - t - 1, k - m - 1) * comb(s - t - 1, k - m - 1)
                    * p ** (2 * k - m) * q ** ((r + s - t) - (2 * k - m)))
        pair += cnt * acc
    return mean_k + pair - mean_k ** 2


def tv_distance_to_poisson(samples: np.ndarray, lam: float) -> float:
    """Total-variation distance between the empirical law of integer samples
    and Poisson(lam), including the Poisson tail beyond the sample range."""
    samples = np.asarray(samples, dtype=np.int64)
    if lam == 0.0:
        return float(np.mean(samples != 0))
    top = int(max(samples.max(initial=0), poisson.isf(1e-12, lam)) + 1)
    hist = np.bincount(samples, minlength=top + 1) / samples.size
    pmf = poisson.pmf(np.arange(top + 1), lam)
    tail = float(poisson.sf(top, lam))
    return 0.5 * (np.abs(hist - pmf).sum() + tail)


@dataclass(frozen=True)
class PoissonDiagnostics:
    """Poisson-approximation report for the cumulative observed count
    (vertices sampled with observed degree >= k) under induced sampling."""

    k: int
    lam: float
    mc_variance: float
    chen_stein_bound: float
    tv_empirical: float
    trials: int
    qq_pairs: list

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "lambda": self.lam,
            "mc_variance": self.mc_variance,
            "chen_stein_bound": self.chen_stein_bound,
            "tv_empirical": self.tv_empirical,
            "trials": self.trials,
            "qq_pairs": [[float(a), float(b)] for a, b in self.qq_pairs],
        }


def poisson_diagnostics(g: Graph, p: float, k: int, trials: int,
                        seed=None) -> PoissonDiagnostics:
    """Chen-Stein diagnostics for the cumulative count under induced
    sampling.

    The intensity is lam = sum over vertices of degree >= k of
    pi_{k,v} = p * P(Binomial(d_v, p) >= k); the bound is
    (1 - exp(-lam)) / lam * [Var - lam + 2 sum pi^2] with the variance
    estimated by Monte Carlo, and the empirical total-variation distance
    compares the simulated cumulative counts to Poisson(lam).
    """
    if trials < 1000:
        raise ValueError("need at least 1000 trials for stable diagnostics")
    deg = g.degrees()
    elig = deg >= k
    pi = np.zeros(g.n_v)
    if elig.any():
        pi[elig] = p * binom.sf(k - 1, deg[elig], p)
    lam = float(pi.sum())
    if lam == 0.0:
        return PoissonDiagnostics(k, 0.0, 0.0, 0.0, 0.0, trials, [])
    m_top = int(deg.max()) if deg.size else 0
    counts = sample_counts_batch("induced", g, p, trials, m_top, seed=seed)
    cumulative = counts[:, k:].sum(axis=1)
    var_mc = float(np.var(cumulative, ddof=1))
    bound = (1.0 - np.exp(-lam)) / lam * (var_mc - lam + 2.0 * float(pi @ pi))
    tv = tv_distance_to_poisson(cumulative, lam)
    pct = np.arange(1, 100)
    qq = list(zip(np.percentile(cumulative, pct),
                  poisson.ppf(pct / 100.0, lam)))
    return PoissonDiagnostics(k, lam, var_mc, float(bound), float(tv),
                              trials, qq)
