"""Smoothing-parameter selection by Monte Carlo unbiased risk estimation.

The weighted risk of an estimate is E[(P N - P N_hat)^T C^{-1}
(P N - P N_hat)]. Its unbiased estimate, up to a constant that does not
depend on lambda, is

    (P N_hat)^T C^{-1} P N_hat + 2 * div - 2 (P N_hat)^T C^{-1} N*

where div = Trace(P dN_hat/dN*) is the degrees-of-freedom term. Under a
Gaussian noise model with covariance C, Stein's lemma cancels the C^{-1}
weight against C, so the trace is unweighted. The trace is estimated by
randomized finite differences: div ~ (1/K) sum_i b_i^T P
(f(N* + eps b_i) - f(N*)) / eps with b_i standard normal probes, which is
exact in expectation for estimators that are linear in N*.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimator import PwlsProblem
from .graphs import DegreeCountVector
from .operators import SamplingOperator

__all__ = [
    "SureConfig",
    "SureCurve",
    "default_lambda_grid",
    "mc_divergence",
    "wmse_hat",
    "select_lambda",
    "sure_curve_to_csv",
]


@dataclass
class SureConfig:
    """Monte Carlo settings: probe scale, replicate count, lambda grid."""

    epsilon: float = 0.1
    k_reps: int = 100
    lambda_grid: np.ndarray | None = None
    seed: object = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.k_reps < 1:
            raise ValueError("need at least one Monte Carlo replicate")
        if self.lambda_grid is not None:
            grid = np.asarray(self.lambda_grid, dtype=np.float64)
            if grid.size == 0:
                raise ValueError("lambda grid must be nonempty")
            if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
                raise ValueError("lambda grid must be positive and strictly increasing")
            self.lambda_grid = grid


@dataclass
class SureCurve:
    lambdas: np.ndarray
    wmse: np.ndarray
    divergence: np.ndarray
    div_stderr: np.ndarray
    converged: np.ndarray
    argmin_lambda: float
    solutions: list = field(default_factory=list, repr=False)

    def best_solution(self):
        i = int(np.flatnonzero(self.lambdas == self.argmin_lambda)[0])
        return self.solutions[i]


def default_lambda_grid(op, c_hat, points: int = 13, decades: float = 6.0) -> np.ndarray:
    """Log-spaced grid centered on the curvature-balance pilot value
    Trace(P^T C^{-1} P) / Trace(Omega)."""
    prob = PwlsProblem(op, c_hat, 1.0)
    tr_omega = np.trace(prob.omega)
    lam0 = np.trace(prob.ptp) / tr_omega if tr_omega > 0 else 1.0
    half = decades / 2.0
    return lam0 * 10.0 ** np.linspace(-half, half, points)


def _counts(x) -> np.ndarray:
    if isinstance(x, DegreeCountVector):
        return x.counts
    return np.asarray(x, dtype=np.float64)


def mc_divergence(estimate_fn, op, n_star, cfg: SureConfig) -> tuple[float, float]:
    """Randomized estimate of Trace(P dN_hat/dN*) with its standard error.

    ``estimate_fn`` maps a count vector to an estimate at fixed lambda.
    Reproducible from cfg.seed; the probes are standard normal.
    """
    p = op.matrix if isinstance(op, SamplingOperator) else np.asarray(op, float)
    y = _counts(n_star)
    rng = np.random.default_rng(cfg.seed)
    probes = rng.standard_normal((cfg.k_reps, y.size))
    base = np.asarray(estimate_fn(y), dtype=np.float64)
    vals = np.empty(cfg.k_reps)
    for i, b in enumerate(probes):
        shifted = np.asarray(estimate_fn(y + cfg.epsilon * b), dtype=np.float64)
        vals[i] = b @ (p @ (shifted - base)) / cfg.epsilon
    div = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(cfg.k_reps)) if cfg.k_reps > 1 \
        else float("nan")
    return div, stderr


def wmse_hat(op, n_star, c_hat, n_hat, div: float) -> float:
    """Computable part of the unbiased weighted-risk estimate (the term
    depending only on the truth is dropped; it does not involve lambda)."""
    p = op.matrix if isinstance(op, SamplingOperator) else np.asarray(op, float)
    y = _counts(n_star)
    x = _counts(n_hat)
    w = c_hat.inv_diagonal if hasattr(c_hat, "inv_diagonal") else 1.0 / np.asarray(c_hat)
    t = p @ x
    return float(t @ (w * t) + 2.0 * div - 2.0 * t @ (w * y))


def select_lambda(op, n_star, c_hat, n_v: float, cfg: SureConfig) -> SureCurve:
    """Sweep the lambda grid, estimating the risk curve with common random
    probes, and return the curve with its argmin.

    Grid points where the solver fails to converge are flagged and
    excluded from the argmin but do not abort the sweep.
    """
    if cfg.lambda_grid is None:
        raise ValueError("SureConfig.lambda_grid is required for a sweep")
    y = _counts(n_star)
    prob = PwlsProblem(op, c_hat, n_v)
    rng = np.random.default_rng(cfg.seed)
    probes = rng.standard_normal((cfg.k_reps, y.size))
    p_probes = probes @ prob.p            # rows b_i^T P, reused across grid

    grid = cfg.lambda_grid
    wmse = np.full(grid.size, np.nan)
    divergence = np.full(grid.size, np.nan)
    stderr = np.full(grid.size, np.nan)
    converged = np.zeros(grid.size, dtype=bool)
    solutions = []
    warm = None
    for gi, lam in enumerate(grid):
        base = prob.solve(lam, y, warm_start=warm)
        solutions.append(base)
        if not base.converged:
            continue
        warm = base.n_hat.counts
        ok = True
        vals = np.empty(cfg.k_reps)
        for i in range(cfg.k_reps):
            shifted = prob.solve(lam, y + cfg.epsilon * probes[i],
                                 warm_start=warm)
            if not shifted.converged:
                ok = False
                break
            vals[i] = p_probes[i] @ (shifted.n_hat.counts - warm) / cfg.epsilon
        if not ok:
            continue
        converged[gi] = True
        divergence[gi] = vals.mean()
        stderr[gi] = vals.std(ddof=1) / np.sqrt(cfg.k_reps) if cfg.k_reps > 1 \
            else np.nan
        wmse[gi] = wmse_hat(op, y, c_hat, warm, divergence[gi])
    if not converged.any():
        raise RuntimeError("no lambda grid point converged")
    masked = np.where(converged, wmse, np.inf)
    argmin_lambda = float(grid[int(np.argmin(masked))])
    return SureCurve(grid.copy(), wmse, divergence, stderr, converged,
                     argmin_lambda, solutions)


def sure_curve_to_csv(curve: SureCurve, path) -> None:
    rows = np.column_stack([curve.lambdas, curve.wmse, curve.divergence,
                            curve.div_stderr, curve.converged.astype(int)])
    np.savetxt(path, rows, delimiter=",",
               fmt=["%.17g", "%.17g", "%.17g", "%.17g", "%d"],
               header="lambda,wmse_hat,divergence,div_stderr,converged",
               comments="")
