"""Convex regularizers with deterministic subgradient selections, and the
bounded perturbation map built from the normalized negative subgradient."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REGULARIZER_KINDS = ("squared-norm", "l1", "tv-1d")
PERTURBATION_MODES = ("unconditional", "monotone")


@dataclass(frozen=True)
class Regularizer:
    """Nonnegative convex functional r with a subgradient selection.

    kinds:
        ``squared-norm``  w * ||x||^2
        ``l1``            w * sum |x_i|
        ``tv-1d``         w * sum |x_{i+1} - x_i|   (anisotropic, 1-D)

    The subgradient selection is deterministic, with sign(0) = 0, so runs
    are reproducible.
    """

    kind: str
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in REGULARIZER_KINDS:
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if not self.weight > 0:
            raise ValueError("regularizer weight must be positive")

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "squared-norm":
            return self.weight * float(x @ x)
        if self.kind == "l1":
            return self.weight * float(np.abs(x).sum())
        return self.weight * float(np.abs(np.diff(x)).sum())

    def subgradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "squared-norm":
            return 2.0 * self.weight * x
        if self.kind == "l1":
            return self.weight * np.sign(x)
        # divergence form: g = D^T sign(D x) with forward differences D
        s = np.sign(np.diff(x))
        g = np.zeros_like(x)
        g[:-1] -= s
        g[1:] += s
        return self.weight * g


@dataclass(frozen=True)
class PerturbationMap:
    """Continuous perturbation direction with range in the unit ball.

    ``direction(x)`` is -D / max(||D||, smoothing_eps) with D the chosen
    subgradient; the max-clamp smooths the normalization around D = 0 while
    leaving -D/||D|| untouched whenever ||D|| >= smoothing_eps.

    ``mode="unconditional"`` always applies the step; ``mode="monotone"``
    keeps the step only when it does not increase the regularizer.
    """

    regularizer: Regularizer
    smoothing_eps: float = 1e-8
    mode: str = "unconditional"

    def __post_init__(self):
        if not self.smoothing_eps > 0:
            raise ValueError("smoothing_eps must be positive")
        if self.mode not in PERTURBATION_MODES:
            raise ValueError(f"unknown perturbation mode {self.mode!r}")

    def direction(self, x: np.ndarray) -> np.ndarray:
        d = self.regularizer.subgradient(x)
        scale = max(float(np.linalg.norm(d)), self.smoothing_eps)
        return -d / scale

    def perturb(self, x: np.ndarray, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("perturbation step t must be nonnegative")
        x = np.asarray(x, dtype=np.float64)
        if t == 0.0:
            return x.copy()
        candidate = x + t * self.direction(x)
        if (self.mode == "monotone"
                and self.regularizer.value(candidate) > self.regularizer.value(x)):
            return x.copy()
        return candidate
