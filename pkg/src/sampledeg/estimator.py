"""Constrained, penalized weighted least-squares recovery of true degree
counts from observed counts.

The estimate solves

    minimize  (P N - N*)^T C^{-1} (P N - N*) + lambda * ||D N||^2
    subject to  N >= 0,  sum(N) = n_v

with D the second-difference stencil and C a positive diagonal covariance
proxy. The quadratic program is convex; it is solved by a deterministic
primal active-set method with warm starting, which is exact up to linear
solve accuracy. The equality-only variant (non-negativity dropped) has a
closed-form KKT solution that is linear in N* and doubles as an
independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import DegreeCountVector
from .operators import SamplingOperator
from .smoothing import CovarianceApprox

__all__ = [
    "PenaltyMatrix",
    "QPSolution",
    "PwlsProblem",
    "build_penalty",
    "solve_pwls",
    "solve_equality_only",
    "estimator_map",
]

_CLAMP = 1e-9


@dataclass(frozen=True)
class PenaltyMatrix:
    """Second-difference operator: row r is (..., 1, -2, 1, ...) starting at
    column r, so D annihilates affine sequences exactly."""

    matrix: np.ndarray

    @property
    def gram(self) -> np.ndarray:
        return self.matrix.T @ self.matrix


def build_penalty(m: int) -> PenaltyMatrix:
    if m < 2:
        raise ValueError("second differences need at least three cells (m >= 2)")
    d = np.zeros((m - 1, m + 1))
    r = np.arange(m - 1)
    d[r, r] = 1.0
    d[r, r + 1] = -2.0
    d[r, r + 2] = 1.0
    return PenaltyMatrix(d)


@dataclass
class QPSolution:
    n_hat: DegreeCountVector
    objective: float
    active_set: np.ndarray
    iterations: int
    converged: bool
    kkt_residual: float
    equality_multiplier: float

    def to_json_dict(self) -> dict:
        return {
            "n_hat": [float(x) for x in self.n_hat.counts],
            "objective": self.objective,
            "active_set": [int(i) for i in self.active_set],
            "iterations": self.iterations,
            "converged": self.converged,
            "kkt_residual": self.kkt_residual,
        }


def _matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, SamplingOperator) else np.asarray(op, float)


def _inv_diag(c_hat) -> np.ndarray:
    if isinstance(c_hat, CovarianceApprox):
        return c_hat.inv_diagonal
    w = np.asarray(c_hat, dtype=np.float64)
    if w.ndim == 2:
        w = np.diag(w)
    if np.any(w <= 0):
        raise ValueError("covariance diagonal must be positive")
    return 1.0 / w


def _counts(n_star) -> np.ndarray:
    if isinstance(n_star, DegreeCountVector):
        return n_star.counts
    return np.asarray(n_star, dtype=np.float64)


class PwlsProblem:
    """One (operator, covariance, total) instance, reusable across many
    (lambda, N*) solves; the weighted Gram pieces are precomputed once."""

    def __init__(self, op, c_hat, n_v: float):
        p = _matrix(op)
        self.m = p.shape[0] - 1
        w = _inv_diag(c_hat)
        if w.size != self.m + 1:
            raise ValueError("covariance size must match operator size")
        if n_v <= 0:
            raise ValueError("n_v must be positive")
        self.p = p
        self.w = w
        self.ptw = p.T * w                      # P^T C^{-1}
        self.ptp = self.ptw @ p                 # P^T C^{-1} P
        self.omega = build_penalty(self.m).gram if self.m >= 2 \
            else np.zeros((self.m + 1, self.m + 1))
        self.n_v = float(n_v)
        self._cached_lam = None
        self._cached_a = None

    def quad(self, lam: float) -> np.ndarray:
        """A(lambda) = P^T C^{-1} P + lambda * Omega."""
        if self._cached_lam != lam:
            self._cached_a = self.ptp + lam * self.omega
            self._cached_lam = lam
        return self._cached_a

    def objective(self, x: np.ndarray, lam: float, y: np.ndarray) -> float:
        r = self.p @ x - y
        pen = x @ (self.omega @ x)
        return float(r @ (self.w * r) + lam * pen)

    def solve(self, lam: float, n_star, warm_start: np.ndarray | None = None,
              tol: float = 1e-8, max_iter: int | None = None) -> QPSolution:
        """Primal active-set solve of the constrained problem.

        Deterministic: ties in blocking/releasing constraints break toward
        the lowest index. Returns the best iterate with ``converged=False``
        if the iteration cap is hit.
        """
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        y = _counts(n_star)
        if y.size != self.m + 1:
            raise ValueError("count vector length must match operator size")
        n = self.m + 1
        if max_iter is None:
            max_iter = 50 * n
        a = self.quad(lam)
        b = self.ptw @ y

        if warm_start is not None and warm_start.size == n \
                and np.all(warm_start >= 0) and warm_start.sum() > 0:
            x = warm_start * (self.n_v / warm_start.sum())
        else:
            x = np.full(n, self.n_v / n)
        active = x <= 0.0
        x[active] = 0.0

        mu = 0.0
        converged = False
        it = 0
        f_cur = self.objective(x, lam, y)
        stall = 0
        while it < max_iter:
            it += 1
            free = ~active
            g = 2.0 * (a @ x - b)
            scale = max(1.0, float(np.abs(g).max(initial=0.0)))
            f_idx = np.flatnonzero(free)
            k = f_idx.size
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = 2.0 * a[np.ix_(f_idx, f_idx)]
            kkt[:k, k] = 1.0
            kkt[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[:k] = -g[f_idx]
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
            if not np.all(np.isfinite(sol)):
                sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
            d = np.zeros(n)
            d[f_idx] = sol[:k]
            mu = -float(sol[k])  # stationarity: g - mu*1 - eta = 0

            # ratio test against the bounds the step would cross
            alpha = 1.0
            blocking = -1
            dec = np.flatnonzero(free & (d < -1e-14))
            if dec.size:
                ratios = -x[dec] / d[dec]
                j = int(np.argmin(ratios))
                if ratios[j] < alpha:
                    alpha = max(float(ratios[j]), 0.0)
                    blocking = int(dec[j])

            took_step = False
            if alpha > 0.0 and np.abs(d).max(initial=0.0) > 0.0:
                trial = x + alpha * d
                trial[active] = 0.0
                if blocking >= 0:
                    trial[blocking] = 0.0
                f_trial = self.objective(trial, lam, y)
                if f_trial < f_cur - 1e-14 * max(1.0, abs(f_cur)):
                    x, f_cur = trial, f_trial
                    if blocking >= 0:
                        active[blocking] = True
                    stall = 0
                    took_step = True
            elif blocking >= 0 and stall <= n:
                # degenerate step: pin the blocking bound and retry
                active[blocking] = True
                stall += 1
                took_step = True
            if took_step:
                continue

            # no usable descent on this working set: check bound multipliers
            w_idx = np.flatnonzero(active)
            if w_idx.size == 0:
                converged = True
                break
            eta = g[w_idx] - mu
            viol = np.flatnonzero(eta < -tol * scale)
            if viol.size == 0:
                converged = True
                break
            if stall > n:
                break
            active[w_idx[viol[0]]] = False  # lowest index, anti-cycling
            stall += 1

        # floating-point hygiene: drop tiny negatives, restore the total
        x = np.where((x < 0) & (x >= -_CLAMP), 0.0, x)
        if x.sum() > 0:
            x *= self.n_v / x.sum()
        g = 2.0 * (a @ x - b)
        scale = max(1.0, float(np.abs(g).max(initial=0.0)))
        eta = np.where(active, g - mu, 0.0)
        stat = g - mu - eta
        kkt_res = max(float(np.abs(stat[~active]).max(initial=0.0)),
                      float(max(0.0, -eta.min(initial=0.0))),
                      abs(x.sum() - self.n_v)) / scale
        return QPSolution(
            n_hat=DegreeCountVector(np.maximum(x, 0.0), self.m),
            objective=self.objective(x, lam, y),
            active_set=np.flatnonzero(active),
            iterations=it,
            converged=converged,
            kkt_residual=kkt_res,
            equality_multiplier=mu,
        )


def solve_pwls(op, n_star, c_hat, lam: float, n_v: float,
               tol: float = 1e-8, max_iter: int | None = None,
               warm_start: np.ndarray | None = None) -> QPSolution:
    """Solve the constrained penalized weighted least-squares problem."""
    return PwlsProblem(op, c_hat, n_v).solve(lam, n_star, warm_start, tol,
                                             max_iter)


def _kkt_blocks(prob: PwlsProblem, lam: float) -> np.ndarray:
    n = prob.m + 1
    b = np.zeros((n + 1, n + 1))
    b[:n, :n] = prob.quad(lam)
    b[:n, n] = 0.5
    b[n, :n] = 1.0
    return b


def solve_equality_only(op, n_star, c_hat, lam: float, n_v: float) -> np.ndarray:
    """Closed-form solution with only the total-count equality constraint.

    Solves [[A, 1/2], [1^T, 0]] [N; alpha] = [P^T C^{-1} N*; n_v] with
    A = P^T C^{-1} P + lambda * Omega. The result can carry negative
    entries; its total equals n_v exactly.
    """
    prob = PwlsProblem(op, c_hat, n_v)
    y = _counts(n_star)
    bmat = _kkt_blocks(prob, lam)
    rhs = np.concatenate([prob.ptw @ y, [prob.n_v]])
    try:
        sol = np.linalg.solve(bmat, rhs)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "equality-only KKT system is singular; increase lambda") from exc
    return sol[:prob.m + 1]


def estimator_map(op, c_hat, lam: float, n_v: float) -> tuple[np.ndarray, np.ndarray]:
    """Affine map (A, c) with N_hat = A @ N* + c for the equality-only
    estimator; A's rows are orthogonal to constants in the sense
    1^T A = 0 and 1^T c = n_v, so the total never depends on N*."""
    prob = PwlsProblem(op, c_hat, n_v)
    n = prob.m + 1
    bmat = _kkt_blocks(prob, lam)
    try:
        binv = np.linalg.inv(bmat)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "equality-only KKT system is singular; increase lambda") from exc
    top = binv[:n]
    a = top[:, :n] @ prob.ptw
    c = top[:, n] * prob.n_v
    return a, c
