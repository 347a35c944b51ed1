# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled iteration kernels.

Same contract as ``_kernels_py``; the whole recurrence runs in C loops so
long runs are not dominated by per-iteration interpreter overhead. Integer
codes must stay in sync with the fallback module.
"""

import numpy as np

from libc.math cimport sqrt, NAN

COMPILED = True

OP_DENSE = 0
OP_CONV = 1

REG_NONE = -1
REG_SQNORM = 0
REG_L1 = 1
REG_TV = 2

STOP_FIXED = 0
STOP_DISCREPANCY = 1
STOP_CONVERGENCE = 2


cdef inline double _sign(double v) noexcept nogil:
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


cdef inline double _nrm2(const double[::1] v) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(v.shape[0]):
        acc += v[i] * v[i]
    return sqrt(acc)


cdef void _dense_apply(const double[:, ::1] a, const double[::1] x,
                       double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(a.shape[0]):
        acc = 0.0
        for j in range(a.shape[1]):
            acc += a[i, j] * x[j]
        out[i] = acc


cdef void _dense_adjoint(const double[:, ::1] a, const double[::1] y,
                         double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double yi
    for j in range(a.shape[1]):
        out[j] = 0.0
    for i in range(a.shape[0]):
        yi = y[i]
        for j in range(a.shape[1]):
            out[j] += a[i, j] * yi


cdef void _conv_apply(const double[::1] kern, const double[::1] x,
                      double[::1] out) noexcept nogil:
    # out[i] = sum_j kern[j] * x[i + p - j], zero padding outside [0, n)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t L = kern.shape[0]
    cdef Py_ssize_t p = L // 2
    cdef Py_ssize_t i, j, idx
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(L):
            idx = i + p - j
            if 0 <= idx < n:
                acc += kern[j] * x[idx]
        out[i] = acc


cdef void _conv_adjoint(const double[::1] kern, const double[::1] y,
                        double[::1] out) noexcept nogil:
    # out[i] = sum_j kern[j] * y[i + j - p]  (correlation)
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t L = kern.shape[0]
    cdef Py_ssize_t p = L // 2
    cdef Py_ssize_t i, j, idx
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(L):
            idx = i + j - p
            if 0 <= idx < n:
                acc += kern[j] * y[idx]
        out[i] = acc


cdef double _reg_value(int kind, double w, const double[::1] x) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    cdef double d
    if kind == 0:  # squared-norm
        for i in range(x.shape[0]):
            acc += x[i] * x[i]
        return w * acc
    if kind == 1:  # l1
        for i in range(x.shape[0]):
            acc += x[i] if x[i] >= 0.0 else -x[i]
        return w * acc
    if kind == 2:  # tv-1d
        for i in range(x.shape[0] - 1):
            d = x[i + 1] - x[i]
            acc += d if d >= 0.0 else -d
        return w * acc
    return NAN


cdef void _reg_subgrad(int kind, double w, const double[::1] x,
                       double[::1] out) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s
    if kind == 0:
        for i in range(x.shape[0]):
            out[i] = 2.0 * w * x[i]
        return
    if kind == 1:
        for i in range(x.shape[0]):
            out[i] = w * _sign(x[i])
        return
    # tv-1d, divergence form of the forward-difference signs
    for i in range(x.shape[0]):
        out[i] = 0.0
    for i in range(x.shape[0] - 1):
        s = _sign(x[i + 1] - x[i])
        out[i] -= w * s
        out[i + 1] += w * s


def dense_apply(double[:, ::1] mat, double[::1] x):
    out = np.empty(mat.shape[0])
    _dense_apply(mat, x, out)
    return out


def dense_apply_adjoint(double[:, ::1] mat, double[::1] y):
    out = np.empty(mat.shape[1])
    _dense_adjoint(mat, y, out)
    return out


def conv_apply(double[::1] kern, double[::1] x):
    out = np.empty(x.shape[0])
    _conv_apply(kern, x, out)
    return out


def conv_apply_adjoint(double[::1] kern, double[::1] y):
    out = np.empty(y.shape[0])
    _conv_adjoint(kern, y, out)
    return out


def reg_value(int kind, double weight, double[::1] x):
    return _reg_value(kind, weight, x)


def reg_subgradient(int kind, double weight, double[::1] x):
    out = np.empty(x.shape[0])
    _reg_subgrad(kind, weight, x, out)
    return np.asarray(out)


def run_driver(int op_kind, double[:, ::1] mat, double[::1] kern,
               double[::1] y, double[::1] x0, double lam,
               double t0, double gamma,
               int reg_kind, double weight, double eps, int monotone,
               int stop_kind, long long stop_index, double stop_threshold,
               double conv_eps_x, double conv_tail_tol,
               long long max_iter, long long record_every,
               double[:, ::1] refs, int ref_mask,
               double[:, ::1] rec, double[::1] x_out, double[::1] half_out):
    """Compiled twin of ``_kernels_py.run_driver``; identical contract."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("step ratio must lie in [0, 1)")

    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t m = y.shape[0]
    cdef double[::1] x = np.empty(n)
    cdef double[::1] half = np.empty(n)
    cdef double[::1] xnew = np.empty(n)
    cdef double[::1] work = np.empty(n)
    cdef double[::1] rv = np.empty(m)
    cdef double[::1] tmp

    cdef Py_ssize_t i, j
    cdef long long k = 0
    cdef Py_ssize_t n_rows = 0
    cdef bint fired = False
    cdef bint done = False
    cdef bint conv_fired = False
    cdef bint rvec_valid = False
    cdef bint half_is_x = True
    cdef double resid = NAN
    cdef double final_resid = NAN
    cdef double t_k, t_next, inv_tail, scale, acc, d, dx, nx, tail, rv_cand, rv_x

    for i in range(n):
        x[i] = x0[i]
    t_next = t0
    inv_tail = 1.0 / (1.0 - gamma)

    while True:
        if stop_kind == 0:
            fired = k >= stop_index
        elif stop_kind == 1:
            if op_kind == 0:
                _dense_apply(mat, x, rv)
            else:
                _conv_apply(kern, x, rv)
            for i in range(m):
                rv[i] -= y[i]
            resid = _nrm2(rv)
            rvec_valid = True
            fired = resid <= stop_threshold
        else:
            fired = conv_fired
        done = fired or k >= max_iter

        if k % record_every == 0 or done:
            if not rvec_valid:
                if op_kind == 0:
                    _dense_apply(mat, x, rv)
                else:
                    _conv_apply(kern, x, rv)
                for i in range(m):
                    rv[i] -= y[i]
                resid = _nrm2(rv)
                rvec_valid = True
            if n_rows >= rec.shape[0]:
                raise RuntimeError("record buffer overflow")
            rec[n_rows, 0] = <double> k
            rec[n_rows, 1] = resid
            rec[n_rows, 2] = _reg_value(reg_kind, weight, x)
            for i in range(3):
                if ref_mask >> i & 1:
                    acc = 0.0
                    for j in range(n):
                        d = x[j] - refs[i, j]
                        acc += d * d
                    rec[n_rows, 3 + i] = sqrt(acc)
                else:
                    rec[n_rows, 3 + i] = NAN
            n_rows += 1
        if done:
            final_resid = resid
            break

        t_k = t_next
        t_next = t_next * gamma
        half_is_x = True
        if reg_kind != -1 and t_k > 0.0:
            _reg_subgrad(reg_kind, weight, x, work)
            scale = _nrm2(work)
            if scale < eps:
                scale = eps
            for i in range(n):
                half[i] = x[i] - t_k * work[i] / scale
            if monotone:
                rv_cand = _reg_value(reg_kind, weight, half)
                rv_x = _reg_value(reg_kind, weight, x)
                if rv_cand <= rv_x:
                    half_is_x = False
            else:
                half_is_x = False
        if half_is_x:
            for i in range(n):
                half[i] = x[i]

        if not (half_is_x and rvec_valid):
            if op_kind == 0:
                _dense_apply(mat, half, rv)
            else:
                _conv_apply(kern, half, rv)
            for i in range(m):
                rv[i] -= y[i]
        if op_kind == 0:
            _dense_adjoint(mat, rv, work)
        else:
            _conv_adjoint(kern, rv, work)
        for i in range(n):
            xnew[i] = half[i] - lam * work[i]

        if stop_kind == 2:
            acc = 0.0
            for i in range(n):
                d = xnew[i] - x[i]
                acc += d * d
            dx = sqrt(acc)
            nx = _nrm2(x)
            tail = t_next * inv_tail
            conv_fired = (dx <= conv_eps_x * (1.0 + nx)
                          and tail <= conv_tail_tol)

        tmp = x
        x = xnew
        xnew = tmp
        k += 1
        rvec_valid = False
        resid = NAN

    for i in range(n):
        x_out[i] = x[i]
        half_out[i] = half[i]
    return (int(k), bool(fired), int(n_rows), final_resid,
            _reg_value(reg_kind, weight, x))
