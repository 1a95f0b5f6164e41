"""Pure-Python/numpy implementations of the numeric kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same semantics. ``geored.kernels`` picks one at import time.
"""
from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

# expression VM opcodes (shared with the Cython build)
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

MAX_STACK = 256

_NAN = float("nan")


def christoffel_from_metric(ginv, dg):
    """Koszul contraction.

    ``dg[a, i, j]`` is the partial derivative of ``k_ij`` along axis ``a``.
    Returns ``G[i, j, k] = 1/2 k^{il} (d_j k_lk + d_k k_lj - d_l k_jk)``.
    """
    ginv = np.asarray(ginv, dtype=float)
    dg = np.asarray(dg, dtype=float)
    t = (np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0))) - dg
    return 0.5 * np.einsum("il,ljk->ijk", ginv, t)


def quad_contract(gamma, v, w):
    """``out[i] = gamma[i, j, k] v[j] w[k]``."""
    return np.einsum("ijk,j,k->i", gamma, v, w)


def connection_table(E, DE, gamma):
    """Covariant derivatives of frame fields along each other.

    ``E[:, a]`` are the frame vectors at a point, ``DE[:, a, l]`` their
    coordinate derivatives along axis ``l``. Returns
    ``C[:, a, b] = (nabla_{E_a} E_b)`` of shape (n, N, N).
    """
    E = np.asarray(E, dtype=float)
    DE = np.asarray(DE, dtype=float)
    deriv = np.einsum("ibl,la->iab", DE, E)
    return deriv + np.einsum("ijk,ja,kb->iab", gamma, E, E)


def rk4_integrate(f, y0, dt, nsteps):
    """Classical fixed-step RK4; returns an array of shape (nsteps + 1, dim).

    ``f`` maps a state vector to its derivative. Raises ``FloatingPointError``
    at the first non-finite state.
    """
    y = np.array(y0, dtype=float)
    out = np.empty((nsteps + 1, y.size))
    out[0] = y
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(nsteps):
        k1 = np.asarray(f(y), dtype=float)
        k2 = np.asarray(f(y + half * k1), dtype=float)
        k3 = np.asarray(f(y + half * k2), dtype=float)
        k4 = np.asarray(f(y + dt * k3), dtype=float)
        y = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite state after step {step + 1}")
        out[step + 1] = y
    return out


def _pow(a, b):
    try:
        return math.pow(a, b)
    except (ValueError, OverflowError):
        return _NAN


def _unary(fn, a):
    try:
        return fn(a)
    except (ValueError, OverflowError):
        return _NAN


def eval_program(ops, args, x):
    """Run one postfix program against the variable vector ``x``.

    Domain violations (log of a negative, division by zero, ...) produce NaN
    instead of raising; callers re-run the tree walker to locate the fault.
    """
    stack = []
    push = stack.append
    pop = stack.pop
    for op, arg in zip(ops, args):
        if op == OP_CONST:
            push(float(arg))
        elif op == OP_VAR:
            push(float(x[int(arg)]))
        elif op == OP_NEG:
            push(-pop())
        elif op <= OP_POW:
            b = pop()
            a = pop()
            if op == OP_ADD:
                push(a + b)
            elif op == OP_SUB:
                push(a - b)
            elif op == OP_MUL:
                push(a * b)
            elif op == OP_DIV:
                push(a / b if b != 0.0 else _NAN)
            else:
                push(_pow(a, b))
        elif op == OP_ATAN2:
            b = pop()
            a = pop()
            push(math.atan2(a, b))
        else:
            a = pop()
            if op == OP_SIN:
                push(_unary(math.sin, a))
            elif op == OP_COS:
                push(_unary(math.cos, a))
            elif op == OP_TAN:
                push(_unary(math.tan, a))
            elif op == OP_EXP:
                push(_unary(math.exp, a))
            elif op == OP_LOG:
                push(_unary(math.log, a) if a > 0.0 else _NAN)
            elif op == OP_SQRT:
                push(_unary(math.sqrt, a))
            else:
                raise ValueError(f"bad opcode {op}")
    return stack[-1]


def eval_programs(ops, args, offsets, x):
    """Evaluate a batch of concatenated programs; ``offsets`` has len count+1."""
    count = len(offsets) - 1
    out = np.empty(count)
    for i in range(count):
        lo, hi = offsets[i], offsets[i + 1]
        out[i] = eval_program(ops[lo:hi], args[lo:hi], x)
    return out
