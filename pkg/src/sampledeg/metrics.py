"""Evaluation metrics: two-distribution K-S distance, degree-distribution
moments, spectral-radius bounds for the epidemic threshold."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import DegreeCountVector, Graph

__all__ = [
    "ks_d_statistic",
    "BoundsReport",
    "epidemic_bounds",
    "largest_adjacency_eigenvalue",
]


def _dist(v) -> np.ndarray:
    x = np.asarray(v.counts if isinstance(v, DegreeCountVector) else v,
                   dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("distribution vector must be nonnegative")
    tot = x.sum()
    if tot <= 0:
        raise ValueError("distribution vector must have positive total mass")
    return x / tot


def ks_d_statistic(f1, f2) -> float:
    """Maximum absolute gap between the two cumulative distributions.

    Inputs are nonnegative weight vectors over degrees 0..len-1; they are
    normalized internally and padded to a common length.
    """
    a, b = _dist(f1), _dist(f2)
    n = max(a.size, b.size)
    a = np.pad(a, (0, n - a.size))
    b = np.pad(b, (0, n - b.size))
    return float(np.abs(np.cumsum(a) - np.cumsum(b)).max())


@dataclass(frozen=True)
class BoundsReport:
    """Bounds on the epidemic threshold 1/lambda_1 from distribution moments:
    1/U <= 1/lambda_1 <= 1/sqrt(M2) <= 1/M1."""

    m1: float
    m2: float
    u: float
    inv_m1: float
    inv_sqrt_m2: float
    inv_u: float
    n_v: float
    n_e: float
    lambda1: float | None = None
    degenerate: bool = False

    def to_json_dict(self) -> dict:
        out = {
            "m1": self.m1,
            "m2": self.m2,
            "u": self.u,
            "inv_m1": self.inv_m1,
            "inv_sqrt_m2": self.inv_sqrt_m2,
            "inv_u": self.inv_u,
            "n_v": self.n_v,
            "n_e": self.n_e,
            "degenerate": self.degenerate,
        }
        out["lambda1"] = self.lambda1
        out["inv_lambda1"] = 1.0 / self.lambda1 if self.lambda1 else None
        return out


def epidemic_bounds(counts, n_e: float | None = None,
                    lambda1: float | None = None) -> BoundsReport:
    """Threshold bounds from a (possibly estimated, real-valued) degree
    count vector.

    M1 and M2 are the first and second raw moments of the normalized
    distribution; U = sqrt(2 n_e (n_v - 1) / n_v). When ``n_e`` is not
    supplied it is derived from the degree-sum identity
    n_e = sum_k k N_k / 2. An empty-mean distribution is flagged
    degenerate with infinite bounds.
    """
    c = np.asarray(counts.counts if isinstance(counts, DegreeCountVector)
                   else counts, dtype=np.float64)
    n_v = c.sum()
    if n_v <= 0:
        raise ValueError("count vector must have positive total")
    k = np.arange(c.size, dtype=np.float64)
    f = c / n_v
    m1 = float(k @ f)
    m2 = float((k * k) @ f)
    if n_e is None:
        n_e = float(k @ c) / 2.0
    if n_e < 0:
        raise ValueError("edge count must be nonnegative")
    u = float(np.sqrt(2.0 * n_e * (n_v - 1.0) / n_v)) if n_v > 1 else 0.0
    if m1 <= 0 or u <= 0:
        return BoundsReport(m1, m2, u, np.inf, np.inf, np.inf, n_v, n_e,
                            lambda1, degenerate=True)
    return BoundsReport(m1, m2, u, 1.0 / m1, 1.0 / np.sqrt(m2), 1.0 / u,
                        n_v, float(n_e), lambda1)


def largest_adjacency_eigenvalue(g: Graph, tol: float = 1e-10,
                                 max_iter: int = 100000) -> float:
    """Spectral radius of the adjacency matrix by power iteration.

    Iterates on A + I (the shift separates +/-lambda_1 pairs that make
    plain iteration oscillate on bipartite graphs) from a deterministic
    all-ones start with a tiny linear tilt, and stops when the Rayleigh
    quotient is stable to relative tolerance ``tol``.
    """
    if g.n_v == 0 or g.n_e == 0:
        raise ValueError("graph must have at least one edge")
    e0, e1 = g.edges[:, 0], g.edges[:, 1]
    n = g.n_v

    def matvec(x):
        # x + A x, the +I shift included
        return (x + np.bincount(e0, weights=x[e1], minlength=n)
                + np.bincount(e1, weights=x[e0], minlength=n))

    x = 1.0 + 1e-8 * np.arange(g.n_v)
    x /= np.linalg.norm(x)
    prev = 0.0
    for _ in range(max_iter):
        ax = matvec(x)
        lam = float(x @ ax)
        nrm = np.linalg.norm(ax)
        if nrm == 0.0:
            break
        x = ax / nrm
        if abs(lam - prev) <= tol * max(abs(lam), 1e-300):
            return lam - 1.0
        prev = lam
    raise RuntimeError("power iteration did not converge")
