"""Discrete kernel smoothing of degree counts and the diagonal covariance
proxy used to weight the least-squares fit.

Smoothing spreads each observed count over nearby degrees with an
Epanechnikov-shaped stencil. The weights attached to a source degree are
renormalized over the in-domain targets, so the total count mass is
preserved exactly for every bandwidth (boundary correction by
renormalization).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import DegreeCountVector

__all__ = [
    "CovarianceApprox",
    "smoothing_matrix",
    "smooth_counts",
    "select_bandwidth",
    "build_covariance",
    "DELTA_FLOOR_FACTOR",
]

DELTA_FLOOR_FACTOR = 1e-6


@dataclass(frozen=True)
class CovarianceApprox:
    """Diagonal covariance proxy: smoothed observed counts plus a ridge
    delta that caps the diagonal's condition number."""

    diagonal: np.ndarray
    delta: float
    bandwidth: int

    @property
    def inv_diagonal(self) -> np.ndarray:
        return 1.0 / self.diagonal

    @property
    def condition_number(self) -> float:
        return float(self.diagonal.max() / self.diagonal.min())


def _counts_array(n_star) -> np.ndarray:
    if isinstance(n_star, DegreeCountVector):
        return n_star.counts
    return np.asarray(n_star, dtype=np.float64)


def smoothing_matrix(m: int, h: int) -> np.ndarray:
    """Column-stochastic smoothing matrix S: entry (k, j) is the share of a
    count at degree j that lands on degree k, with weights proportional to
    max(0, 1 - ((k - j) / (h + 1))^2) over k in [j-h, j+h] clipped to the
    domain."""
    if h < 0:
        raise ValueError("bandwidth must be nonnegative")
    if h == 0:
        return np.eye(m + 1)
    k = np.arange(m + 1)
    kk, jj = np.meshgrid(k, k, indexing="ij")
    w = 1.0 - ((kk - jj) / (h + 1.0)) ** 2
    w[w < 0] = 0.0
    return w / w.sum(axis=0, keepdims=True)


def smooth_counts(n_star, h: int) -> np.ndarray:
    """Kernel-smoothed counts; total mass equals the input total."""
    c = _counts_array(n_star)
    return smoothing_matrix(c.size - 1, h) @ c


def select_bandwidth(n_star, h_max: int) -> int:
    """Least-squares cross-validation choice of integer bandwidth.

    Minimizes CV(h) = sum_k fhat_h(k)^2 - (2/n) sum_k N*_k fhat_loo(k)
    over h in {0..h_max}, where fhat_h is the smoothed relative-frequency
    vector and fhat_loo its leave-one-observation-out version; ties break
    toward the smaller bandwidth. A vector with a single nonzero cell
    returns 0.
    """
    if h_max < 0:
        raise ValueError("h_max must be nonnegative")
    c = _counts_array(n_star)
    n = c.sum()
    if n < 2:
        raise ValueError("need at least two observed vertices")
    if np.count_nonzero(c) <= 1:
        return 0
    best_h, best_cv = 0, np.inf
    for h in range(h_max + 1):
        s = smoothing_matrix(c.size - 1, h)
        smoothed = s @ c
        f = smoothed / n
        loo_at_k = (smoothed - np.diag(s)) / (n - 1.0)
        cv = float(f @ f - (2.0 / n) * (c @ loo_at_k))
        if cv < best_cv - 1e-15:
            best_h, best_cv = h, cv
    return best_h


def build_covariance(n_star, target_condition: float,
                     bandwidth: int | None = None,
                     h_max: int | None = None) -> CovarianceApprox:
    """Diagonal covariance proxy diag(smoothed counts) + delta * I.

    Delta solves (max + delta) / (min + delta) = target_condition when that
    has a positive solution, and otherwise falls back to a small positive
    floor, so the diagonal's condition number never exceeds the target.
    """
    if target_condition <= 1.0:
        raise ValueError("target condition number must exceed 1")
    c = _counts_array(n_star)
    if c.sum() <= 0:
        raise ValueError("observed counts are all zero")
    m = c.size - 1
    if bandwidth is None:
        if h_max is None:
            h_max = int(np.ceil((m + 1) / 4))
        bandwidth = select_bandwidth(c, h_max) if c.sum() >= 2 else 0
    smoothed = smooth_counts(c, bandwidth)
    hi, lo = smoothed.max(), smoothed.min()
    delta = (hi - target_condition * lo) / (target_condition - 1.0)
    floor = DELTA_FLOOR_FACTOR * hi
    if delta <= 0.0:
        delta = floor
    return CovarianceApprox(smoothed + delta, float(delta), int(bandwidth))
