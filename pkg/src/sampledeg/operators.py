"""Sampling operators: the matrix P whose (i, j) entry is the probability
that a degree-j vertex of the true graph is selected and observed with
degree i in the sample.

All entries are assembled in log space (log-gamma binomial coefficients)
and exponentiated at the end, so large maximum degrees do not overflow;
results below 1e-300 are flushed to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from .graphs import DegreeCountVector

__all__ = [
    "SamplingOperator",
    "SpectralDiagnostics",
    "build_operator",
    "expected_column_sums",
    "spectral",
    "eigenvalue_condition_ratio",
    "naive_estimate",
    "eigen_induced_closed_form",
    "operator_to_csv",
    "spectrum_to_csv",
]

_TINY = 1e-300


@dataclass(frozen=True)
class SamplingOperator:
    matrix: np.ndarray
    design: str
    m: int
    p: float | None = None
    edge_counts: tuple[int, int] | None = None  # (n_e, n_e_star), random walk


@dataclass(frozen=True)
class SpectralDiagnostics:
    """Full SVD of an operator: P = U @ diag(singular_values) @ V.T."""

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    condition_number: float


def _logcomb(n, k):
    """log C(n, k), with -inf outside the support 0 <= k <= n."""
    n = np.asarray(n, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        val = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return np.where((k >= 0) & (k <= n), val, -np.inf)


def build_operator(design: str, p_or_counts, m: int) -> SamplingOperator:
    """Build the (m+1) x (m+1) sampling operator for a design.

    Bernoulli designs take the sampling rate p in (0, 1]; the random walk
    takes ``(n_e, n_e_star)``, the true and sampled distinct edge counts.
    """
    if m < 0:
        raise ValueError("maximum degree bound must be nonnegative")
    i = np.arange(m + 1)

    if design == "random_walk":
        n_e, n_e_star = p_or_counts
        if not 1 <= n_e_star <= n_e:
            raise ValueError("need 1 <= n_e_star <= n_e")
        ii, jj = np.meshgrid(i, i, indexing="ij")
        logp = (_logcomb(jj, ii) + _logcomb(n_e - jj, n_e_star - ii)
                - _logcomb(n_e, n_e_star))
        with np.errstate(invalid="ignore"):
            mat = np.exp(logp)
        mat[~np.isfinite(logp)] = 0.0
        mat[(ii > jj) | (ii < 1)] = 0.0
        mat[mat < _TINY] = 0.0
        return SamplingOperator(mat, design, m, None, (int(n_e), int(n_e_star)))

    p = float(p_or_counts)
    if not 0.0 < p <= 1.0:
        raise ValueError("sampling rate p must be in (0, 1]")
    q = 1.0 - p

    if design == "ego":
        mat = np.eye(m + 1) * p
    elif design == "snowball1":
        mat = np.diag(1.0 - q ** (i + 1.0))
    elif design in ("induced", "incident"):
        ii, jj = np.meshgrid(i, i, indexing="ij")
        shift = 1 if design == "induced" else 0
        logp = _logcomb(jj, ii) + (ii + shift) * np.log(p) + xlogy(jj - ii, q)
        mat = np.where(ii <= jj, np.exp(logp), 0.0)
        if design == "incident":
            mat[0, :] = 0.0
        mat[mat < _TINY] = 0.0
    else:
        raise ValueError(f"unknown design {design!r}")
    return SamplingOperator(mat, design, m, p)


def expected_column_sums(op: SamplingOperator) -> np.ndarray:
    """Closed-form column sums implied by each design (inclusion probability
    of a degree-j vertex)."""
    j = np.arange(op.m + 1, dtype=np.float64)
    if op.design == "ego":
        return np.full(op.m + 1, op.p)
    if op.design == "snowball1":
        return 1.0 - (1.0 - op.p) ** (j + 1.0)
    if op.design == "induced":
        return np.full(op.m + 1, op.p)
    if op.design == "incident":
        return 1.0 - (1.0 - op.p) ** j
    n_e, n_e_star = op.edge_counts
    # P(at least one of j specific edges sampled), hypergeometric draw
    log_none = _logcomb(n_e - j, n_e_star) - _logcomb(n_e, n_e_star)
    out = 1.0 - np.where(np.isfinite(log_none), np.exp(log_none), 0.0)
    return out


def spectral(op: SamplingOperator) -> SpectralDiagnostics:
    """Full SVD with the condition number d_max / d_min (inf when d_min
    vanishes to working precision)."""
    u, s, vh = np.linalg.svd(op.matrix)
    d_max = float(s[0]) if s.size else 0.0
    d_min = float(s[-1]) if s.size else 0.0
    cond = d_max / d_min if d_min > 0.0 else np.inf
    return SpectralDiagnostics(s, u, vh.T, cond)


def eigenvalue_condition_ratio(op: SamplingOperator) -> float:
    """Ratio of extreme eigenvalue magnitudes.

    Every design here yields a triangular matrix, whose eigenvalues are
    exactly its diagonal entries; for the induced design this ratio equals
    p^(-m). It is a weaker instability measure than the SVD condition
    number (they coincide only for normal operators).
    """
    mat = op.matrix
    if np.allclose(mat, np.triu(mat)) or np.allclose(mat, np.tril(mat)):
        lam = np.abs(np.diag(mat))
    else:
        lam = np.abs(np.linalg.eigvals(mat))
    lo = lam.min()
    return float(lam.max() / lo) if lo > 0 else np.inf


def naive_estimate(op: SamplingOperator, n_star: DegreeCountVector,
                   rel_cutoff: float = 1e-12) -> np.ndarray:
    """Pseudo-inverse estimate sum_i (u_i . N*) / d_i * v_i over singular
    triplets with d_i above ``rel_cutoff * d_max``.

    May contain negative entries; returned as-is.
    """
    y = np.asarray(n_star.counts if isinstance(n_star, DegreeCountVector)
                   else n_star, dtype=np.float64)
    if y.size != op.m + 1:
        raise ValueError("count vector length must match operator size")
    u, s, vh = np.linalg.svd(op.matrix)
    keep = s >= rel_cutoff * s[0]
    coef = (u[:, keep].T @ y) / s[keep]
    return vh[keep].T @ coef


def eigen_induced_closed_form(p: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigen-decomposition of the induced-sampling operator.

    Returns ``(eigenvalues, eigenvectors)`` with 0-based degree indexing:
    eigenvalue k is p^(k+1) and eigenvector k has entries
    (-1)^(k-j) * C(k, j) for j <= k, zero above.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("sampling rate p must be in (0, 1]")
    if m < 0:
        raise ValueError("maximum degree bound must be nonnegative")
    k = np.arange(m + 1)
    eigenvalues = p ** (k + 1.0)
    jj, kk = np.meshgrid(k, k, indexing="ij")
    signs = np.where((kk - jj) % 2 == 0, 1.0, -1.0)
    vecs = np.where(jj <= kk, signs * np.exp(_logcomb(kk, jj)), 0.0)
    return eigenvalues, vecs


def operator_to_csv(op: SamplingOperator, path) -> None:
    np.savetxt(path, op.matrix, delimiter=",", fmt="%.17g")


def spectrum_to_csv(diag: SpectralDiagnostics, path) -> None:
    idx = np.arange(diag.singular_values.size)
    np.savetxt(path, np.column_stack([idx, diag.singular_values]),
               delimiter=",", fmt=["%d", "%.17g"],
               header="index,singular_value", comments="")
