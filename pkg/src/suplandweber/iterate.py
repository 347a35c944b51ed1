"""The basic and superiorized Landweber iterations.

``landweber_step`` and ``superiorized_step`` are the per-step reference
forms; ``run_iteration`` drives whole runs, dispatching the hot loop to the
selected kernel backend for the built-in operator and regularizer kinds and
falling back to a per-step python loop otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import backend
from .linops import (ConvolutionOperator1D, DenseMatrixOperator,
                     DimensionMismatch, LinearOperator, inflated_norm)
from .records import (FLAG_BUDGET_EXHAUSTED, FLAG_FIRED, ExperimentRecord,
                      StopInfo)
from .regularizers import PerturbationMap
from .stopping import StoppingRule, apriori_index

# convergence detection for exact-data runs: the iterate has to stall AND
# the remaining perturbation budget has to be spent
CONVERGENCE_EPS_X = 1e-10
CONVERGENCE_TAIL_TOL = 1e-10


@dataclass(frozen=True)
class StepSequence:
    """Summable perturbation step sizes t_k = t0 * ratio**k.

    ``kind="zero"`` forces t_k = 0 for all k, which makes the superiorized
    iteration collapse to the basic one exactly.
    """

    kind: str = "geometric"
    t0: float = 0.0
    ratio: float = 0.0

    def __post_init__(self):
        if self.kind not in ("geometric", "zero"):
            raise ValueError(f"unknown step sequence kind {self.kind!r}")
        if self.t0 < 0:
            raise ValueError("t0 must be nonnegative")
        if not 0.0 <= self.ratio < 1.0:
            raise ValueError("ratio must lie in [0, 1) so the steps are summable")

    @classmethod
    def zero(cls) -> "StepSequence":
        return cls(kind="zero", t0=0.0, ratio=0.0)

    def value(self, k: int) -> float:
        if self.kind == "zero" or self.t0 == 0.0:
            return 0.0
        return self.t0 * self.ratio ** k

    def tail_sum(self, k: int) -> float:
        """Remaining budget sum_{j > k} t_j."""
        if self.kind == "zero" or self.t0 == 0.0:
            return 0.0
        return self.t0 * self.ratio ** (k + 1) / (1.0 - self.ratio)

    def total(self) -> float:
        if self.kind == "zero" or self.t0 == 0.0:
            return 0.0
        return self.t0 / (1.0 - self.ratio)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "t0": self.t0, "ratio": self.ratio}

    @classmethod
    def from_dict(cls, data: dict) -> "StepSequence":
        return cls(**data)


@dataclass(frozen=True)
class IterationConfig:
    """Step size, perturbation schedule, and run budget for one iteration."""

    lam: float
    steps: StepSequence = field(default_factory=StepSequence.zero)
    perturbation: Optional[PerturbationMap] = None
    max_iter: int = 100_000
    record_every: int = 1

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be positive")

    def to_dict(self) -> dict:
        pert = None
        if self.perturbation is not None:
            pert = {
                "regularizer": {"kind": self.perturbation.regularizer.kind,
                                "weight": self.perturbation.regularizer.weight},
                "smoothing_eps": self.perturbation.smoothing_eps,
                "mode": self.perturbation.mode,
            }
        return {"lambda": self.lam, "steps": self.steps.to_dict(),
                "perturbation": pert, "max_iter": self.max_iter,
                "record_every": self.record_every}


@dataclass
class IterationState:
    """Iterate x_k with the last half-step and freshly computed residual
    norm and regularizer value."""

    k: int
    x: np.ndarray
    x_half: np.ndarray
    residual_norm: float
    reg_value: float


@dataclass(frozen=True)
class References:
    """Optional reference solutions; present ones become error columns."""

    pinv: Optional[np.ndarray] = None
    rmin: Optional[np.ndarray] = None
    exact_limit: Optional[np.ndarray] = None


def default_lambda(op: LinearOperator, safety: float = 0.9) -> float:
    """Admissible step size safety / L**2 with L the inflated norm estimate,
    so that lambda * ||A||**2 < 1 holds despite estimation error."""
    norm = inflated_norm(op)
    if norm == 0.0:
        raise ValueError("cannot pick a step size for the zero operator")
    return safety / norm ** 2


def check_lambda(op: LinearOperator, lam: float) -> float:
    """Validate 0 < lam < 1/L**2 against the inflated norm estimate."""
    norm = inflated_norm(op)
    if norm > 0 and not lam < 1.0 / norm ** 2:
        raise ValueError(
            f"lambda {lam} is not admissible: needs lambda < {1.0 / norm ** 2:.6g}")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return lam


def landweber_step(op: LinearOperator, y_data: np.ndarray, x: np.ndarray,
                   lam: float) -> np.ndarray:
    """One gradient step on the least-squares functional:
    x - lam * A*(A x - y)."""
    residual = op.apply(x) - y_data
    return x - lam * op.apply_adjoint(residual)


def initial_state(op: LinearOperator, y_data: np.ndarray,
                  config: IterationConfig, x0=None) -> IterationState:
    x = np.zeros(op.domain_dim) if x0 is None else np.array(x0, dtype=np.float64)
    if x.shape != (op.domain_dim,):
        raise DimensionMismatch(f"x0 has shape {x.shape}, "
                                f"expected ({op.domain_dim},)")
    resid = float(np.linalg.norm(op.apply(x) - y_data))
    reg = (config.perturbation.regularizer.value(x)
           if config.perturbation is not None else float("nan"))
    return IterationState(0, x, x.copy(), resid, reg)


def superiorized_step(op: LinearOperator, y_data: np.ndarray,
                      state: IterationState,
                      config: IterationConfig) -> IterationState:
    """Half-step perturbation followed by a Landweber step.

    With no perturbation or t_k = 0 this is exactly ``landweber_step``.
    """
    t_k = config.steps.value(state.k)
    pert = config.perturbation
    if pert is not None and t_k > 0.0:
        x_half = pert.perturb(state.x, t_k)
    else:
        x_half = state.x
    x_next = landweber_step(op, y_data, x_half, config.lam)
    resid = float(np.linalg.norm(op.apply(x_next) - y_data))
    reg = pert.regularizer.value(x_next) if pert is not None else float("nan")
    return IterationState(state.k + 1, x_next, x_half, resid, reg)


def _stop_plan(config: IterationConfig, stop: StoppingRule):
    """Translate a stopping rule into kernel codes and the effective cap."""
    effective_max = min(config.max_iter, stop.cap)
    if stop.kind == "a-priori":
        index = apriori_index(stop, stop.delta)
        return backend.STOP_FIXED, index, 0.0, effective_max
    if stop.kind == "discrepancy":
        if stop.delta <= 0:
            raise ValueError("discrepancy rule is undefined at zero noise level")
        return backend.STOP_DISCREPANCY, 0, stop.tau * stop.delta, effective_max
    return backend.STOP_CONVERGENCE, 0, 0.0, effective_max


def _fast_path_ok(op, config: IterationConfig) -> bool:
    if not isinstance(op, (DenseMatrixOperator, ConvolutionOperator1D)):
        return False
    pert = config.perturbation
    if pert is not None and pert.regularizer.kind not in backend.REG_CODES:
        return False
    return True


def _run_fast(op, y_data, config, stop, references, x0, kernels):
    stop_kind, stop_index, stop_threshold, effective_max = _stop_plan(config, stop)
    n = op.domain_dim
    x_start = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    if x_start.shape != (n,):
        raise DimensionMismatch(f"x0 has shape {x_start.shape}, expected ({n},)")

    if isinstance(op, DenseMatrixOperator):
        op_kind, mat, kern = backend.OP_DENSE, op.matrix, np.zeros(1)
    else:
        op_kind, mat, kern = backend.OP_CONV, np.zeros((1, 1)), op.kernel

    pert = config.perturbation
    if pert is None:
        reg_kind, weight, eps, monotone = backend.REG_NONE, 0.0, 1.0, 0
    else:
        reg_kind = backend.REG_CODES[pert.regularizer.kind]
        weight = pert.regularizer.weight
        eps = pert.smoothing_eps
        monotone = 1 if pert.mode == "monotone" else 0

    steps = config.steps
    t0 = 0.0 if steps.kind == "zero" else steps.t0
    gamma = 0.0 if steps.kind == "zero" else steps.ratio

    refs = np.zeros((3, n))
    ref_mask = 0
    for i, ref in enumerate((references.pinv, references.rmin,
                             references.exact_limit)):
        if ref is not None:
            refs[i] = np.asarray(ref, dtype=np.float64)
            ref_mask |= 1 << i

    max_rows = effective_max // config.record_every + 2
    rec = np.empty((max_rows, 6))
    x_out = np.empty(n)
    half_out = np.empty(n)

    k, fired, n_rows, resid, reg = kernels.run_driver(
        op_kind, np.ascontiguousarray(mat), np.ascontiguousarray(kern),
        np.ascontiguousarray(y_data, dtype=np.float64),
        np.ascontiguousarray(x_start), config.lam,
        t0, gamma, reg_kind, weight, eps, monotone,
        stop_kind, stop_index, stop_threshold,
        CONVERGENCE_EPS_X, CONVERGENCE_TAIL_TOL,
        effective_max, config.record_every,
        refs, ref_mask, rec, x_out, half_out)
    state = IterationState(k, x_out, half_out, resid, reg)
    return state, rec[:n_rows].copy(), fired


def _run_per_step(op, y_data, config, stop, references, x0):
    stop_kind, stop_index, stop_threshold, effective_max = _stop_plan(config, stop)
    state = initial_state(op, y_data, config, x0=x0)
    refs = [references.pinv, references.rmin, references.exact_limit]
    rows = []
    fired = False
    conv_fired = False
    while True:
        if stop_kind == backend.STOP_FIXED:
            fired = state.k >= stop_index
        elif stop_kind == backend.STOP_DISCREPANCY:
            fired = state.residual_norm <= stop_threshold
        else:
            fired = conv_fired
        done = fired or state.k >= effective_max
        if state.k % config.record_every == 0 or done:
            errs = [float(np.linalg.norm(state.x - r)) if r is not None
                    else float("nan") for r in refs]
            rows.append([state.k, state.residual_norm, state.reg_value] + errs)
        if done:
            break
        prev_x = state.x
        state = superiorized_step(op, y_data, state, config)
        if stop_kind == backend.STOP_CONVERGENCE:
            dx = float(np.linalg.norm(state.x - prev_x))
            conv_fired = (dx <= CONVERGENCE_EPS_X * (1.0 + float(np.linalg.norm(prev_x)))
                          and config.steps.tail_sum(state.k - 1) <= CONVERGENCE_TAIL_TOL)
    rec = np.array(rows, dtype=np.float64).reshape(-1, 6)
    return state, rec, fired


def run_iteration(op: LinearOperator, y_data, config: IterationConfig,
                  stop: StoppingRule, references: References | None = None,
                  x0=None, engine: str = "auto"):
    """Run the (superiorized) Landweber iteration from x0 = 0.

    Returns ``(state, record)``. The record flag is "fired" when the
    stopping rule triggered (including detected convergence for the
    max-iter rule) and "budget-exhausted" otherwise.

    ``engine`` selects the loop implementation: "auto" uses the backend
    chosen at import time when the operator and regularizer have fast
    kernels, "compiled"/"python" force a specific backend, and "step"
    forces the per-step python loop (needed for custom operator or
    regularizer types).
    """
    y_data = np.asarray(y_data, dtype=np.float64)
    if y_data.shape != (op.range_dim,):
        raise DimensionMismatch(f"data has shape {y_data.shape}, "
                                f"expected ({op.range_dim},)")
    if references is None:
        references = References()

    if engine == "auto":
        engine = backend.active_name() if _fast_path_ok(op, config) else "step"
    if engine == "step":
        state, rec, fired = _run_per_step(op, y_data, config, stop,
                                          references, x0)
    elif engine in ("compiled", "python"):
        if not _fast_path_ok(op, config):
            raise ValueError("operator or regularizer has no fast kernel; "
                             "use engine='step'")
        state, rec, fired = _run_fast(op, y_data, config, stop, references,
                                      x0, backend.get(engine))
    else:
        raise ValueError(f"unknown engine {engine!r}")

    flag = FLAG_FIRED if fired else FLAG_BUDGET_EXHAUSTED
    stop_info = StopInfo(rule=stop.to_dict(),
                         fired_index=state.k if fired else None, flag=flag)
    record = ExperimentRecord(rows=rec, stop=stop_info,
                              config=config.to_dict(),
                              delta=stop.delta if stop.delta > 0 else None)
    return state, record
