"""Vectors and linear operators with adjoints.

Everything downstream touches the forward map only through
:class:`LinearOperator`, i.e. through ``apply`` (A x) and
``apply_adjoint`` (A* y) on 1-D float64 arrays.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class DimensionMismatch(ValueError):
    """Operator applied to a vector of the wrong length."""


def as_vector(values, length=None) -> np.ndarray:
    """Coerce ``values`` to a finite 1-D float64 array.

    Raises ``ValueError`` on empty or non-finite input and
    :class:`DimensionMismatch` if ``length`` is given and does not match.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector contains NaN or Inf entries")
    if length is not None and x.size != length:
        raise DimensionMismatch(f"expected length {length}, got {x.size}")
    return x


class LinearOperator:
    """Bounded linear map A : R^n -> R^m with an exact adjoint.

    Subclasses implement ``apply`` and ``apply_adjoint``; both must be pure
    (bit-identical outputs for equal inputs) and satisfy the adjoint identity
    <A x, y> = <x, A* y>.
    """

    kind = "abstract"

    def __init__(self, domain_dim: int, range_dim: int):
        if domain_dim < 1 or range_dim < 1:
            raise ValueError("operator dimensions must be positive")
        self.domain_dim = int(domain_dim)
        self.range_dim = int(range_dim)

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.apply(x)

    def to_dense(self) -> np.ndarray:
        """Materialize the operator as an (m, n) matrix, column by column."""
        cols = np.empty((self.range_dim, self.domain_dim))
        e = np.zeros(self.domain_dim)
        for j in range(self.domain_dim):
            e[j] = 1.0
            cols[:, j] = self.apply(e)
            e[j] = 0.0
        return cols

    def _check_domain(self, x: np.ndarray):
        if x.shape != (self.domain_dim,):
            raise DimensionMismatch(
                f"{self.kind}: domain vector has shape {x.shape}, "
                f"expected ({self.domain_dim},)"
            )

    def _check_range(self, y: np.ndarray):
        if y.shape != (self.range_dim,):
            raise DimensionMismatch(
                f"{self.kind}: range vector has shape {y.shape}, "
                f"expected ({self.range_dim},)"
            )


class DenseMatrixOperator(LinearOperator):
    """Explicit (m, n) matrix; forward is ``M @ x``, adjoint is ``M.T @ y``."""

    kind = "dense-matrix"

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=np.float64, order="C")
        if matrix.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("matrix contains NaN or Inf entries")
        super().__init__(matrix.shape[1], matrix.shape[0])
        self.matrix = matrix

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64)
        self._check_domain(x)
        return self.matrix @ x

    def apply_adjoint(self, y):
        y = np.asarray(y, dtype=np.float64)
        self._check_range(y)
        return self.matrix.T @ y

    def to_dense(self):
        return self.matrix.copy()


class ConvolutionOperator1D(LinearOperator):
    """Zero-padded 1-D convolution with an odd-length kernel (n -> n).

    The adjoint of convolution under zero padding is correlation with the
    same kernel.
    """

    kind = "convolution-1d"

    def __init__(self, n: int, kernel):
        kernel = np.array(kernel, dtype=np.float64)
        if kernel.ndim != 1 or kernel.size % 2 == 0:
            raise ValueError("kernel must be a 1-D array of odd length")
        if not np.all(np.isfinite(kernel)):
            raise ValueError("kernel contains NaN or Inf entries")
        if kernel.size > n:
            raise ValueError(f"kernel length {kernel.size} exceeds signal length {n}")
        super().__init__(n, n)
        self.kernel = kernel

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64)
        self._check_domain(x)
        return np.convolve(x, self.kernel, mode="same")

    def apply_adjoint(self, y):
        y = np.asarray(y, dtype=np.float64)
        self._check_range(y)
        return np.correlate(y, self.kernel, mode="same")


class NormEstimate(NamedTuple):
    """Result of ``estimate_norm``: the estimate, whether the tolerance was
    reached within the iteration budget, and the iterations used."""

    value: float
    converged: bool
    iterations: int


def estimate_norm(op: LinearOperator, tol: float = 1e-10, max_iter: int = 20000,
                  seed: int = 42) -> NormEstimate:
    """Estimate the operator norm ||A|| by power iteration on A*A.

    Deterministic for a fixed ``seed``. The estimate approaches ||A|| from
    below; callers selecting a step size should inflate it (see
    :func:`inflated_norm`).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.domain_dim)
    v /= np.linalg.norm(v)
    estimate = 0.0
    previous = np.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w = op.apply(v)
        estimate = float(np.linalg.norm(w))
        if estimate == 0.0:
            # null operator, or the start landed in the null space
            converged = True
            break
        if abs(estimate - previous) <= tol * estimate:
            converged = True
            break
        previous = estimate
        v = op.apply_adjoint(w)
        v /= np.linalg.norm(v)
    return NormEstimate(estimate, converged, iterations)


def inflated_norm(op: LinearOperator, inflation: float = 1.01, **kwargs) -> float:
    """Norm estimate inflated by a safety factor, for step-size selection.

    The inflation covers the power iteration's one-sided estimation error so
    that ``lam < 1 / inflated_norm(op)**2`` implies ``lam < 1 / ||A||**2``.
    """
    return inflation * estimate_norm(op, **kwargs).value
