"""Independent reference solvers used to validate iteration limits.

These deliberately share no code with the iteration kernels: the SVD is an
in-house one-sided Jacobi factorization (high relative accuracy for the small
singular values that matter on ill-conditioned instances), and the
regularizer-minimizing solver is a projected subgradient method over the
affine solution set. Oracles trade speed for accuracy and carry feasibility
flags instead of failing silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .regularizers import Regularizer


@dataclass
class SvdFactorization:
    """Thin SVD  A = U diag(s) V^T  with singular values sorted descending.

    ``u`` is (m, k), ``s`` is (k,), ``v`` is (n, k) with k = min(m, n).
    Columns of ``u`` belonging to zero singular values are zero.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    rank_tol: float = 1e-12

    def rank(self) -> int:
        if self.s.size == 0 or self.s[0] == 0.0:
            return 0
        return int(np.count_nonzero(self.s > self.rank_tol * self.s[0]))

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T

    def pinv_apply(self, y: np.ndarray, rank_tol: float | None = None) -> np.ndarray:
        """Minimal-norm least-squares solution of A x = y via truncation."""
        tol = self.rank_tol if rank_tol is None else rank_tol
        if self.s.size == 0 or self.s[0] == 0.0:
            return np.zeros(self.v.shape[0])
        keep = self.s > tol * self.s[0]
        coef = (self.u[:, keep].T @ y) / self.s[keep]
        return self.v[:, keep] @ coef


def jacobi_svd(matrix, tol: float = 1e-14, max_sweeps: int = 60,
               rank_tol: float = 1e-12) -> SvdFactorization:
    """One-sided Jacobi SVD of a dense matrix.

    Orthogonalizes column pairs with plane rotations until every pair is
    numerically orthogonal. Works on the taller orientation and transposes
    back, which keeps the rotations well conditioned.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    m, n = a.shape
    if m < n:
        fact = jacobi_svd(a.T, tol=tol, max_sweeps=max_sweeps, rank_tol=rank_tol)
        return SvdFactorization(u=fact.v, s=fact.s, v=fact.u, rank_tol=rank_tol)

    w = a.copy()
    v = np.eye(n)
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = w[:, i] @ w[:, i]
                beta = w[:, j] @ w[:, j]
                gamma = w[:, i] @ w[:, j]
                if gamma == 0.0 or alpha * beta == 0.0:
                    continue
                if abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1.0 / math.hypot(1.0, t)
                s = c * t
                wi = w[:, i].copy()
                w[:, i] = c * wi - s * w[:, j]
                w[:, j] = s * wi + c * w[:, j]
                vi = v[:, i].copy()
                v[:, i] = c * vi - s * v[:, j]
                v[:, j] = s * vi + c * v[:, j]
                rotated = True
        if not rotated:
            break

    sv = np.linalg.norm(w, axis=0)
    order = np.argsort(-sv, kind="stable")
    sv = sv[order]
    w = w[:, order]
    v = v[:, order]
    u = np.zeros_like(w)
    nonzero = sv > 0.0
    u[:, nonzero] = w[:, nonzero] / sv[nonzero]
    return SvdFactorization(u=u, s=sv, v=v, rank_tol=rank_tol)


def pseudoinverse_solve(matrix, y, rank_tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose solution: minimal-norm least-squares solution of A x = y.

    Singular values below ``rank_tol`` times the largest are truncated; the
    default is tight so that decaying spectra are not silently regularized.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    fact = jacobi_svd(matrix, rank_tol=rank_tol)
    return fact.pinv_apply(np.asarray(y, dtype=np.float64))


@dataclass
class RMinResult:
    """Output of :func:`r_min_solve` with a feasibility flag."""

    x: np.ndarray
    r_value: float
    residual: float
    flagged: bool


def r_min_solve(matrix, y, regularizer: Regularizer, budget: int = 150_000,
                restarts: int = 3, seed: int = 0,
                feasibility_tol: float = 1e-8) -> RMinResult:
    """High-accuracy regularizer-minimizing solution over {x : A x = y}.

    Alternates normalized subgradient steps on r with exact projection onto
    the affine solution set (computed from the SVD), using a geometrically
    decaying step size; the best feasible iterate over independent restarts
    is returned. Small exact-data instances only; the result is flagged when
    the feasibility target is missed.
    """
    a = np.array(matrix, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    fact = jacobi_svd(a)
    if fact.s[0] == 0.0:
        x = np.zeros(a.shape[1])
        return RMinResult(x, regularizer.value(x), float(np.linalg.norm(y)),
                          bool(np.linalg.norm(y) > feasibility_tol))

    keep = fact.s > fact.rank_tol * fact.s[0]
    # pinv as an explicit (n, m) matrix: projection is then two matvecs
    pinv = (fact.v[:, keep] / fact.s[keep]) @ fact.u[:, keep].T
    row_space = fact.v[:, keep]

    def project(x):
        return x - pinv @ (a @ x - y)

    x_pinv = pinv @ y
    scale = 1.0 + float(np.linalg.norm(x_pinv))
    best_x = x_pinv.copy()
    best_value = regularizer.value(best_x)

    rng = np.random.default_rng(seed)
    steps_per_restart = max(1000, budget // max(restarts, 1))
    # decay chosen so the final step is ~1e-10 of the initial one
    decay = math.exp(math.log(1e-10) / steps_per_restart)
    for restart in range(restarts):
        z = rng.standard_normal(a.shape[1])
        z_null = z - row_space @ (row_space.T @ z)
        x = project(x_pinv + 0.3 * restart * scale * z_null)
        step = 0.25 * scale * (1.0 + 0.5 * restart)
        for _ in range(steps_per_restart):
            g = regularizer.subgradient(x)
            ng = float(np.linalg.norm(g))
            if ng > 0.0:
                x = x - (step / ng) * g
            x = project(x)
            step *= decay
            value = regularizer.value(x)
            if value < best_value:
                best_value = value
                best_x = x.copy()

    residual = float(np.linalg.norm(a @ best_x - y))
    return RMinResult(best_x, best_value, residual,
                      bool(residual > feasibility_tol))
