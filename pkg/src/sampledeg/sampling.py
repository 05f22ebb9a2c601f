"""Network sampling designs producing observed subgraphs and degree counts.

Five designs are supported:

``ego``
    Bernoulli(p) vertex seeds; every edge incident to a seed is observed,
    so a seed's observed degree equals its true degree.
``snowball1``
    Bernoulli(p) seeds plus all their neighbors; edges incident to any
    included vertex are observed, so included vertices keep true degrees.
``induced``
    Bernoulli(p) seeds; only edges with both endpoints seeded are kept.
``incident``
    Bernoulli(p) edge selection; endpoints of selected edges are observed
    with degree equal to their number of selected edges (never zero).
``random_walk``
    Simple random walk started from the degree-proportional stationary
    distribution, run until a budget of distinct edges is collected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .graphs import DegreeCountVector, Graph

__all__ = [
    "BERNOULLI_DESIGNS",
    "DESIGNS",
    "SampleResult",
    "sample",
    "sample_counts_batch",
    "observed_degree_batch",
    "empirical_inclusion_check",
    "calibrate_snowball_rate",
]

BERNOULLI_DESIGNS = ("ego", "snowball1", "induced", "incident")
DESIGNS = BERNOULLI_DESIGNS + ("random_walk",)


@dataclass
class SampleResult:
    """Observed subgraph, included vertex set, and observed degree counts."""

    design: str
    params: dict
    sampled_graph: Graph
    included_vertices: np.ndarray
    observed_counts: DegreeCountVector
    seed: object = None

    def to_json_dict(self) -> dict:
        return {
            "design": self.design,
            "params": self.params,
            "seed": self.seed,
            "n_v": self.sampled_graph.n_v,
            "n_v_star": int(self.included_vertices.size),
            "n_e_star": int(self.sampled_graph.n_e),
            "observed_counts": [float(x) for x in self.observed_counts.counts],
            "max_degree_bound": int(self.observed_counts.max_degree_bound),
        }


def _check_p(p) -> float:
    if p is None or not 0.0 < p <= 1.0:
        raise ValueError("sampling rate p must be in (0, 1]")
    return float(p)


def _counts_from(deg_star: np.ndarray, included: np.ndarray, m) -> DegreeCountVector:
    obs = deg_star[included] if included.size else np.zeros(0, dtype=np.int64)
    top = int(obs.max()) if obs.size else 0
    if m is None:
        m = top
    elif top > m:
        raise ValueError(f"observed degree {top} exceeds requested bound {m}")
    counts = np.bincount(obs, minlength=m + 1)[:m + 1]
    return DegreeCountVector(counts.astype(np.float64), int(m))


def sample(design: str, g: Graph, *, p: float | None = None,
           edge_budget: int | None = None, m: int | None = None,
           seed=None) -> SampleResult:
    """Draw one sample of ``g`` under the given design.

    ``p`` applies to the four Bernoulli designs, ``edge_budget`` to the
    random walk. ``m`` optionally pads the observed count vector to a
    fixed maximum-degree bound. Identical arguments and seed give an
    identical result.
    """
    if design not in DESIGNS:
        raise ValueError(f"unknown design {design!r}")
    rng = np.random.default_rng(seed)
    n = g.n_v
    edges = g.edges

    if design == "random_walk":
        return _sample_random_walk(g, edge_budget, m, seed, rng)

    pp = _check_p(p)
    seeds = rng.random(n) < pp

    if design == "ego":
        included = np.flatnonzero(seeds)
        keep = seeds[edges[:, 0]] | seeds[edges[:, 1]] if edges.size else np.zeros(0, bool)
    elif design == "snowball1":
        in_star = seeds.copy()
        if edges.size:
            in_star[edges[:, 0][seeds[edges[:, 1]]]] = True
            in_star[edges[:, 1][seeds[edges[:, 0]]]] = True
        included = np.flatnonzero(in_star)
        keep = in_star[edges[:, 0]] | in_star[edges[:, 1]] if edges.size else np.zeros(0, bool)
    elif design == "induced":
        included = np.flatnonzero(seeds)
        keep = seeds[edges[:, 0]] & seeds[edges[:, 1]] if edges.size else np.zeros(0, bool)
    else:  # incident
        keep = rng.random(edges.shape[0]) < pp if edges.size else np.zeros(0, bool)
        kept = edges[keep]
        included = np.unique(kept) if kept.size else np.zeros(0, np.int64)

    kept_edges = edges[keep] if edges.size else edges
    sub = Graph(n, kept_edges)
    deg_star = np.bincount(kept_edges.ravel(), minlength=n) if kept_edges.size \
        else np.zeros(n, dtype=np.int64)
    counts = _counts_from(deg_star, included, m)
    return SampleResult(design, {"p": pp}, sub, included, counts, seed)


def _sample_random_walk(g: Graph, edge_budget, m, seed, rng) -> SampleResult:
    if edge_budget is None or not 1 <= edge_budget <= g.n_e:
        raise ValueError("edge_budget must be in [1, n_e]")
    if not g.is_connected():
        raise ValueError("random walk sampling requires a connected graph")
    if g.is_bipartite():
        raise ValueError("random walk sampling requires a non-bipartite graph")
    deg = g.degrees()
    u = int(rng.choice(g.n_v, p=deg / deg.sum()))
    visited = {u}
    collected: set[tuple[int, int]] = set()
    while len(collected) < edge_budget:
        nbrs = g.neighbors(u)
        v = int(nbrs[rng.integers(nbrs.size)])
        collected.add((u, v) if u < v else (v, u))
        visited.add(v)
        u = v
    kept = np.array(sorted(collected), dtype=np.int64)
    sub = Graph(g.n_v, kept)
    deg_star = np.bincount(kept.ravel(), minlength=g.n_v)
    included = np.array(sorted(visited), dtype=np.int64)
    counts = _counts_from(deg_star, included, m)
    return SampleResult("random_walk", {"edge_budget": int(edge_budget)},
                        sub, included, counts, seed)


def observed_degree_batch(design: str, g: Graph, p: float, trials: int,
                          seed=None, chunk: int | None = None):
    """Observed degree per vertex for many independent Bernoulli-design draws.

    Yields ``(included, deg_star)`` boolean/int arrays of shape
    ``(chunk, n_v)`` per chunk of trials. Random-walk sampling is not
    vectorizable and is rejected.
    """
    if design not in BERNOULLI_DESIGNS:
        raise ValueError("batch sampling supports Bernoulli designs only")
    pp = _check_p(p)
    rng = np.random.default_rng(seed)
    n = g.n_v
    if chunk is None:
        chunk = max(1, min(trials, int(2e7 // max(n, 1))))
    adj = None
    inc_mat = None
    if design in ("snowball1", "induced"):
        adj = g.adjacency_matrix(dtype=np.float32)
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        if design == "incident":
            sel = rng.random((t, g.n_e)) < pp
            deg_star = np.zeros((t, n), dtype=np.int64)
            if g.n_e:
                if inc_mat is None:
                    inc_mat = np.zeros((g.n_e, n), dtype=np.float32)
                    inc_mat[np.arange(g.n_e), g.edges[:, 0]] = 1
                    inc_mat[np.arange(g.n_e), g.edges[:, 1]] = 1
                deg_star = (sel.astype(np.float32) @ inc_mat).astype(np.int64)
            included = deg_star > 0
        else:
            seeds = rng.random((t, n)) < pp
            if design == "ego":
                included = seeds
                deg_star = np.broadcast_to(g.degrees(), (t, n))
            elif design == "snowball1":
                reach = (seeds.astype(np.float32) @ adj) > 0
                included = seeds | reach
                deg_star = np.broadcast_to(g.degrees(), (t, n))
            else:  # induced
                included = seeds
                deg_star = (seeds.astype(np.float32) @ adj).astype(np.int64)
                deg_star = np.where(seeds, deg_star, 0)
        yield included, deg_star
        done += t


def sample_counts_batch(design: str, g: Graph, p: float, trials: int, m: int,
                        seed=None) -> np.ndarray:
    """Observed degree count vectors for many draws, shape (trials, m+1)."""
    out = np.zeros((trials, m + 1), dtype=np.int64)
    row = 0
    for included, deg_star in observed_degree_batch(design, g, p, trials, seed):
        t = included.shape[0]
        tr, vert = np.nonzero(included)
        obs = deg_star[tr, vert]
        if obs.size and obs.max() > m:
            raise ValueError(f"observed degree {obs.max()} exceeds bound {m}")
        flat = np.bincount(tr * (m + 1) + obs, minlength=t * (m + 1))
        out[row:row + t] = flat.reshape(t, m + 1)
        row += t
    return out


def empirical_inclusion_check(design: str, g: Graph, params: dict, k: int,
                              trials: int, seed=None) -> np.ndarray:
    """Empirical probability that a degree-k vertex is observed at each degree.

    Averages, over ``trials`` independent samples and over all vertices of
    true degree ``k``, the indicator of being included and observed at
    degree ``i``. The result estimates column ``k`` of the design's
    sampling operator.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    members = np.flatnonzero(g.degrees() == k)
    if members.size == 0:
        raise ValueError(f"graph has no vertex of degree {k}")
    freq = np.zeros(k + 1)
    if design == "random_walk":
        for child in np.random.SeedSequence(seed).spawn(trials):
            res = sample(design, g, edge_budget=params["edge_budget"],
                         seed=child)
            deg_star = np.bincount(res.sampled_graph.edges.ravel(),
                                   minlength=g.n_v)
            inc = np.zeros(g.n_v, dtype=bool)
            inc[res.included_vertices] = True
            for v in members:
                if inc[v]:
                    freq[deg_star[v]] += 1
    else:
        for included, deg_star in observed_degree_batch(
                design, g, params["p"], trials, seed):
            sub_inc = included[:, members]
            obs = deg_star[:, members][sub_inc]
            freq += np.bincount(obs, minlength=k + 1)[:k + 1]
    return freq / (trials * members.size)


def calibrate_snowball_rate(g: Graph, target_fraction: float) -> float:
    """Seed probability p whose expected one-wave inclusion fraction hits
    ``target_fraction``: solves mean(1 - (1-p)^(d_v + 1)) = target."""
    if not 0.0 < target_fraction < 1.0:
        raise ValueError("target fraction must be in (0, 1)")
    d = g.degrees().astype(np.float64)

    def gap(p):
        return np.mean(1.0 - (1.0 - p) ** (d + 1.0)) - target_fraction

    if gap(1.0 - 1e-12) < 0:
        return 1.0
    return float(brentq(gap, 1e-12, 1.0 - 1e-12, xtol=1e-12, rtol=1e-12))
