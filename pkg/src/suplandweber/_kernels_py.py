"""Pure-python (numpy) iteration kernels.

Fallback backend with the same contract as the compiled ``_kernels``
extension: one driver running the whole perturbed-then-corrected recurrence

    x_half = x + t_k * d(x)
    x_next = x_half - lam * A^T (A x_half - y)

with geometric step decay, built-in regularizer perturbations, stopping
logic, and history recording. Integer codes select variants; see the
constants below (they must match the compiled module).
"""

from __future__ import annotations

import numpy as np

COMPILED = False

OP_DENSE = 0
OP_CONV = 1

REG_NONE = -1
REG_SQNORM = 0
REG_L1 = 1
REG_TV = 2

STOP_FIXED = 0
STOP_DISCREPANCY = 1
STOP_CONVERGENCE = 2


def dense_apply(mat, x):
    return mat @ x


def dense_apply_adjoint(mat, y):
    return mat.T @ y


def conv_apply(kernel, x):
    return np.convolve(x, kernel, mode="same")


def conv_apply_adjoint(kernel, y):
    return np.correlate(y, kernel, mode="same")


def reg_value(kind, weight, x):
    if kind == REG_SQNORM:
        return weight * float(x @ x)
    if kind == REG_L1:
        return weight * float(np.abs(x).sum())
    if kind == REG_TV:
        return weight * float(np.abs(np.diff(x)).sum())
    return float("nan")


def reg_subgradient(kind, weight, x):
    if kind == REG_SQNORM:
        return 2.0 * weight * x
    if kind == REG_L1:
        return weight * np.sign(x)
    s = np.sign(np.diff(x))
    g = np.zeros_like(x)
    g[:-1] -= s
    g[1:] += s
    return weight * g


def run_driver(op_kind, mat, kern, y, x0, lam,
               t0, gamma,
               reg_kind, weight, eps, monotone,
               stop_kind, stop_index, stop_threshold,
               conv_eps_x, conv_tail_tol,
               max_iter, record_every,
               refs, ref_mask, rec, x_out, half_out):
    """Run the iteration; fill ``rec`` rows and the output buffers.

    ``refs`` is a (3, n) array of reference solutions; bit i of ``ref_mask``
    marks row i as present. Returns (k_final, fired, n_rows,
    final_residual_norm, final_reg_value). Rows are written at k = 0, every
    ``record_every`` iterations, and at the final index. The residual norm
    in a row is always recomputed at that k.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("step ratio must lie in [0, 1)")
    if op_kind == OP_DENSE:
        apply_fwd = lambda v: dense_apply(mat, v)
        apply_adj = lambda v: dense_apply_adjoint(mat, v)
    elif op_kind == OP_CONV:
        apply_fwd = lambda v: conv_apply(kern, v)
        apply_adj = lambda v: conv_apply_adjoint(kern, v)
    else:
        raise ValueError(f"unknown operator code {op_kind}")

    x = x0.copy()
    half = x
    t_next = float(t0)
    inv_tail = 1.0 / (1.0 - gamma) if gamma < 1.0 else float("inf")
    k = 0
    n_rows = 0
    fired = False
    conv_fired = False
    rvec = None
    resid = float("nan")
    final_resid = float("nan")

    while True:
        if stop_kind == STOP_FIXED:
            fired = k >= stop_index
        elif stop_kind == STOP_DISCREPANCY:
            rvec = apply_fwd(x) - y
            resid = float(np.linalg.norm(rvec))
            fired = resid <= stop_threshold
        else:
            fired = conv_fired
        done = fired or k >= max_iter
        if k % record_every == 0 or done:
            if rvec is None:
                rvec = apply_fwd(x) - y
                resid = float(np.linalg.norm(rvec))
            rec[n_rows, 0] = k
            rec[n_rows, 1] = resid
            rec[n_rows, 2] = reg_value(reg_kind, weight, x)
            for i in range(3):
                if ref_mask >> i & 1:
                    rec[n_rows, 3 + i] = float(np.linalg.norm(x - refs[i]))
                else:
                    rec[n_rows, 3 + i] = float("nan")
            n_rows += 1
        if done:
            final_resid = resid
            break

        t_k = t_next
        t_next = t_next * gamma
        if reg_kind != REG_NONE and t_k > 0.0:
            g = reg_subgradient(reg_kind, weight, x)
            scale = max(float(np.linalg.norm(g)), eps)
            candidate = x + t_k * (-g / scale)
            if monotone and reg_value(reg_kind, weight, candidate) > reg_value(
                    reg_kind, weight, x):
                half = x
            else:
                half = candidate
        else:
            half = x

        if half is x and rvec is not None:
            r_half = rvec
        else:
            r_half = apply_fwd(half) - y
        x_new = half - lam * apply_adj(r_half)

        if stop_kind == STOP_CONVERGENCE:
            dx = float(np.linalg.norm(x_new - x))
            tail = t_next * inv_tail
            conv_fired = (dx <= conv_eps_x * (1.0 + float(np.linalg.norm(x)))
                          and tail <= conv_tail_tol)
        x = x_new
        k += 1
        rvec = None
        resid = float("nan")

    x_out[:] = x
    half_out[:] = half
    return k, fired, n_rows, final_resid, reg_value(reg_kind, weight, x)
