# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, tan, exp, log, sqrt, pow, atan2, isfinite, NAN

cnp.import_array()

BACKEND = "cython"

cdef enum:
    MAX_STACK = 256

cdef enum:
    OP_CONST = 0
    OP_VAR = 1
    OP_NEG = 2
    OP_ADD = 3
    OP_SUB = 4
    OP_MUL = 5
    OP_DIV = 6
    OP_POW = 7
    OP_SIN = 8
    OP_COS = 9
    OP_TAN = 10
    OP_EXP = 11
    OP_LOG = 12
    OP_SQRT = 13
    OP_ATAN2 = 14


def christoffel_from_metric(ginv_in, dg_in):
    cdef double[:, ::1] ginv = np.ascontiguousarray(ginv_in, dtype=np.float64)
    cdef double[:, :, ::1] dg = np.ascontiguousarray(dg_in, dtype=np.float64)
    cdef Py_ssize_t n = ginv.shape[0]
    out_arr = np.zeros((n, n, n))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, k, l
    cdef double acc, t
    for i in range(n):
        for j in range(n):
            for k in range(n):
                acc = 0.0
                for l in range(n):
                    t = (dg[j, l, k] + dg[k, l, j]) - dg[l, j, k]
                    acc += ginv[i, l] * t
                out[i, j, k] = 0.5 * acc
    return out_arr


def quad_contract(gamma_in, v_in, w_in):
    cdef double[:, :, ::1] gamma = np.ascontiguousarray(gamma_in, dtype=np.float64)
    cdef double[::1] v = np.ascontiguousarray(v_in, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef Py_ssize_t n = gamma.shape[0]
    cdef Py_ssize_t p = gamma.shape[1]
    cdef Py_ssize_t q = gamma.shape[2]
    if v.shape[0] != p or w.shape[0] != q:
        raise ValueError("quad_contract: vector lengths do not match the tensor")
    out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, vj
    for i in range(n):
        acc = 0.0
        for j in range(p):
            vj = v[j]
            for k in range(q):
                acc += gamma[i, j, k] * vj * w[k]
        out[i] = acc
    return out_arr


def connection_table(E_in, DE_in, gamma_in):
    cdef double[:, ::1] E = np.ascontiguousarray(E_in, dtype=np.float64)
    cdef double[:, :, ::1] DE = np.ascontiguousarray(DE_in, dtype=np.float64)
    cdef double[:, :, ::1] gamma = np.ascontiguousarray(gamma_in, dtype=np.float64)
    cdef Py_ssize_t n = E.shape[0]
    cdef Py_ssize_t N = E.shape[1]
    out_arr = np.zeros((n, N, N))
    cdef double[:, :, ::1] out = out_arr
    # GE[i, k, a] = gamma[i, j, k] E[j, a]
    GE_arr = np.zeros((n, n, N))
    cdef double[:, :, ::1] GE = GE_arr
    cdef Py_ssize_t i, j, k, l, a, b
    cdef double acc
    for i in range(n):
        for k in range(n):
            for a in range(N):
                acc = 0.0
                for j in range(n):
                    acc += gamma[i, j, k] * E[j, a]
                GE[i, k, a] = acc
    for i in range(n):
        for a in range(N):
            for b in range(N):
                acc = 0.0
                for l in range(n):
                    acc += DE[i, b, l] * E[l, a]
                for k in range(n):
                    acc += GE[i, k, a] * E[k, b]
                out[i, a, b] = acc
    return out_arr


def rk4_integrate(f, y0, double dt, Py_ssize_t nsteps):
    y_arr = np.array(y0, dtype=np.float64).ravel()
    cdef Py_ssize_t dim = y_arr.shape[0]
    out_arr = np.empty((nsteps + 1, dim))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] y = y_arr
    tmp_arr = np.empty(dim)
    cdef double[::1] tmp = tmp_arr
    acc_arr = np.empty(dim)
    cdef double[::1] acc = acc_arr
    cdef double[::1] k
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef Py_ssize_t step, i
    for i in range(dim):
        out[0, i] = y[i]
    for step in range(nsteps):
        k = np.ascontiguousarray(f(y_arr), dtype=np.float64)
        for i in range(dim):
            acc[i] = k[i]
            tmp[i] = y[i] + half * k[i]
        k = np.ascontiguousarray(f(tmp_arr.copy()), dtype=np.float64)
        for i in range(dim):
            acc[i] += 2.0 * k[i]
            tmp[i] = y[i] + half * k[i]
        k = np.ascontiguousarray(f(tmp_arr.copy()), dtype=np.float64)
        for i in range(dim):
            acc[i] += 2.0 * k[i]
            tmp[i] = y[i] + dt * k[i]
        k = np.ascontiguousarray(f(tmp_arr.copy()), dtype=np.float64)
        for i in range(dim):
            acc[i] += k[i]
        y_arr = y_arr.copy()
        y = y_arr
        for i in range(dim):
            y[i] = y[i] + sixth * acc[i]
            if not isfinite(y[i]):
                raise FloatingPointError(f"non-finite state after step {step + 1}")
            out[step + 1, i] = y[i]
    return out_arr


cdef double _run(const int[:] ops, const double[:] args, Py_ssize_t lo,
                 Py_ssize_t hi, const double[:] x) nogil:
    cdef double stack[MAX_STACK]
    cdef int sp = 0
    cdef Py_ssize_t pc
    cdef int op
    cdef double a, b
    for pc in range(lo, hi):
        op = ops[pc]
        if op == OP_CONST:
            stack[sp] = args[pc]
            sp += 1
        elif op == OP_VAR:
            stack[sp] = x[<Py_ssize_t> args[pc]]
            sp += 1
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op <= OP_POW or op == OP_ATAN2:
            b = stack[sp - 1]
            a = stack[sp - 2]
            sp -= 1
            if op == OP_ADD:
                stack[sp - 1] = a + b
            elif op == OP_SUB:
                stack[sp - 1] = a - b
            elif op == OP_MUL:
                stack[sp - 1] = a * b
            elif op == OP_DIV:
                stack[sp - 1] = a / b if b != 0.0 else NAN
            elif op == OP_POW:
                stack[sp - 1] = pow(a, b)
            else:
                stack[sp - 1] = atan2(a, b)
        else:
            a = stack[sp - 1]
            if op == OP_SIN:
                a = sin(a)
            elif op == OP_COS:
                a = cos(a)
            elif op == OP_TAN:
                a = tan(a)
            elif op == OP_EXP:
                a = exp(a)
            elif op == OP_LOG:
                a = log(a) if a > 0.0 else NAN
            elif op == OP_SQRT:
                a = sqrt(a) if a >= 0.0 else NAN
            stack[sp - 1] = a
    return stack[sp - 1]


def eval_program(ops_in, args_in, x_in):
    cdef int[::1] ops = np.ascontiguousarray(ops_in, dtype=np.intc)
    cdef double[::1] args = np.ascontiguousarray(args_in, dtype=np.float64)
    cdef double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    return _run(ops, args, 0, ops.shape[0], x)


def eval_programs(ops_in, args_in, offsets_in, x_in):
    cdef int[::1] ops = np.ascontiguousarray(ops_in, dtype=np.intc)
    cdef double[::1] args = np.ascontiguousarray(args_in, dtype=np.float64)
    cdef Py_ssize_t[::1] offsets = np.ascontiguousarray(offsets_in, dtype=np.intp)
    cdef double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t count = offsets.shape[0] - 1
    out_arr = np.empty(count)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(count):
            out[i] = _run(ops, args, offsets[i], offsets[i + 1], x)
    return out_arr
