"""Second-order vector fields on TM: sprays, integration, geodesic invariance."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import kernels
from .errors import (
    DivergenceError,
    DomainError,
    DomainExitError,
    InvariantError,
    RankDeficiencyError,
)
from .tensor_calc import (
    ChartDomain,
    Connection,
    Metric,
    TensorField,
    covariant_derivative,
    fd_jacobian,
    gradient,
    symmetric_product,
)

DEFAULT_DT = 1e-3
PASS_TOL = 1e-6
FAIL_TOL = 1e-4
RANK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TangentState:
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if self.x.shape != self.v.shape or self.x.ndim != 1:
            raise ValueError("x and v must be 1-d arrays of equal length")

    @property
    def dim(self) -> int:
        return self.x.size

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x, self.v])

    @classmethod
    def from_flat(cls, y) -> "TangentState":
        y = np.asarray(y, dtype=float)
        n = y.size // 2
        return cls(y[:n], y[n:])


class SecondOrderField:
    """Vector field on TM whose position part is the velocity itself.

    ``accel`` maps ``(x, v)`` to the acceleration; :meth:`__call__` returns
    ``(v, accel)`` so the second-order property holds by construction.
    """

    def __init__(self, accel: Callable[[np.ndarray, np.ndarray], np.ndarray], dim: int,
                 name: str = "", domain: Optional[ChartDomain] = None):
        self.accel = accel
        self.dim = dim
        self.name = name
        self.domain = domain

    def __call__(self, state: TangentState):
        if self.domain is not None:
            self.domain.check(state.x)
        return state.v.copy(), np.asarray(self.accel(state.x, state.v), dtype=float)

    def rhs(self, y: np.ndarray) -> np.ndarray:
        n = self.dim
        x, v = y[:n], y[n:]
        if self.domain is not None:
            self.domain.check(x)
        out = np.empty(2 * n)
        out[:n] = v
        out[n:] = self.accel(x, v)
        return out


@dataclass(eq=False)
class Trajectory:
    """Uniformly spaced samples of an integral curve."""

    t: np.ndarray
    states: np.ndarray
    dt: float
    method: str = "rk4"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.t.size > 1:
            steps = np.diff(self.t)
            if np.any(steps <= 0):
                raise InvariantError("trajectory times must increase strictly")

    @property
    def dim(self) -> int:
        return self.states.shape[1] // 2

    @property
    def x(self) -> np.ndarray:
        return self.states[:, : self.dim]

    @property
    def v(self) -> np.ndarray:
        return self.states[:, self.dim :]

    def final(self) -> TangentState:
        return TangentState.from_flat(self.states[-1])

    def __len__(self):
        return self.t.size


def step_count(t_end: float, dt: float) -> tuple[int, float]:
    """Number of RK4 steps and the uniform step that lands exactly on ``t_end``."""
    if not (dt > 0):
        raise ValueError("dt must be positive")
    if t_end < dt * (1 - 1e-12):
        raise ValueError("t_end must be at least dt")
    nsteps = max(1, int(math.ceil(t_end / dt - 1e-9)))
    return nsteps, t_end / nsteps


def integrate_flat(rhs, y0, t_end: float, dt: float, t0: float = 0.0):
    """RK4 on a flat state; returns ``(t, Y, dt_used)``.

    Domain exits inside ``rhs`` are re-raised as :class:`DomainExitError`
    carrying the time of the step in which they occurred.
    """
    nsteps, h = step_count(abs(t_end), dt)
    h = math.copysign(h, t_end) if t_end != 0 else h
    calls = [0]

    def counted(y):
        calls[0] += 1
        return rhs(y)

    try:
        ys = kernels.rk4_integrate(counted, np.asarray(y0, dtype=float), h, nsteps)
    except DomainError as exc:
        t_exit = t0 + ((calls[0] - 1) // 4) * h
        raise DomainExitError(f"left the chart domain near t={t_exit:.6g}: {exc}", t_exit) from exc
    except FloatingPointError as exc:
        step = max(1, (calls[0] - 1) // 4 + 1)
        raise DivergenceError(f"state diverged near t={t0 + step * h:.6g}", t0 + step * h) from exc
    t = t0 + h * np.arange(nsteps + 1)
    return t, ys, abs(h)


def integrate(field: SecondOrderField, s0: TangentState, t_end: float, dt: float = DEFAULT_DT) -> Trajectory:
    """Integrate ``field`` from ``s0`` over ``[0, t_end]`` with classical RK4.

    Negative ``t_end`` integrates backwards in time.
    """
    t, ys, h = integrate_flat(field.rhs, s0.flat(), t_end, dt)
    if t_end < 0:
        t, ys = t[::-1], ys[::-1]
    return Trajectory(t, ys, h, "rk4", {"field": field.name, "t_end": t_end, "dt_requested": dt})


def tangent_lift_value(X, state: TangentState, domain: Optional[ChartDomain] = None):
    """``X^T(v) = (X(x), DX(x) v)`` with a finite-difference Jacobian."""
    jac = fd_jacobian(X, state.x, domain)
    return np.asarray(X(state.x), dtype=float), jac @ state.v


def vertical_lift_value(v, w):
    w = np.asarray(w, dtype=float)
    return np.zeros_like(w), w.copy()


def geodesic_spray(conn: Connection) -> SecondOrderField:
    def accel(x, v):
        return -kernels.quad_contract(conn(x), v, v)

    return SecondOrderField(accel, conn.dim, f"geodesic_spray({conn.name})", conn.domain)


def forced_spray(conn: Connection, metric: Metric, V) -> SecondOrderField:
    """Spray minus the vertical lift of ``grad V``."""

    def accel(x, v):
        return -kernels.quad_contract(conn(x), v, v) - gradient(metric, V, x)

    return SecondOrderField(accel, conn.dim, f"forced_spray({conn.name})", conn.domain)


def energy(metric: Metric, state: TangentState, V=None) -> float:
    e = 0.5 * float(state.v @ metric(state.x) @ state.v)
    if V is not None:
        e += float(V(state.x))
    return e


class Distribution:
    """Distribution spanned pointwise by ``fields``.

    Without a metric, complements and projections are Euclidean in the chart.
    """

    def __init__(self, fields: Sequence, dim: int, metric: Optional[Metric] = None, name: str = "D"):
        if len(fields) == 0:
            raise ValueError("a distribution needs at least one spanning field")
        self.fields = list(fields)
        self.dim = dim
        self.metric = metric
        self.name = name

    @property
    def rank(self) -> int:
        return len(self.fields)

    def basis(self, x) -> np.ndarray:
        """Spanning vectors as columns, shape (n, p); checks full rank."""
        S = np.column_stack([np.asarray(f(x), dtype=float) for f in self.fields])
        if S.shape != (self.dim, self.rank):
            raise InvariantError(f"spanning fields of {self.name!r} have wrong shape {S.shape}")
        sv = np.linalg.svd(S, compute_uv=False)
        if sv[-1] <= RANK_TOL:
            raise RankDeficiencyError(
                f"distribution {self.name!r} rank-deficient at {np.asarray(x).tolist()} (sigma_min={sv[-1]:.3g})"
            )
        return S

    def _gram(self, x):
        return self.metric(x) if self.metric is not None else np.eye(self.dim)

    def projector(self, x) -> np.ndarray:
        """Orthogonal projector onto ``D_x``."""
        S = self.basis(x)
        K = self._gram(x)
        return S @ np.linalg.solve(S.T @ K @ S, S.T @ K)

    def perp_projector(self, x) -> np.ndarray:
        return np.eye(self.dim) - self.projector(x)

    def residual(self, x, w) -> float:
        """Norm of the component of ``w`` orthogonal to ``D_x``."""
        return float(np.linalg.norm(self.perp_projector(x) @ np.asarray(w, dtype=float)))

    def with_metric(self, metric: Metric) -> "Distribution":
        return Distribution(self.fields, self.dim, metric, self.name)


def projector_fields(D: Distribution, metric: Optional[Metric] = None):
    """``(P, P_perp)`` as (1,1) tensor fields; ``metric`` overrides ``D.metric``."""
    Dm = D.with_metric(metric) if metric is not None else D
    P = TensorField((1, 1), Dm.projector, f"P[{D.name}]", D.dim)
    Pp = TensorField((1, 1), Dm.perp_projector, f"Pperp[{D.name}]", D.dim)
    return P, Pp


def constrained_connection(conn: Connection, metric: Metric, D: Distribution) -> Connection:
    """Connection whose geodesics satisfy the velocity constraint ``v in D``.

    Christoffel symbols are read off the operator
    ``nabla_X Y + nabla_X(P_perp Y) - P_perp(nabla_X Y)`` applied to the
    coordinate basis fields.
    """
    _, Pp = projector_fields(D, metric)

    def christoffel(x):
        g = conn(x)
        pp = Pp(x)
        dpp = fd_jacobian(Pp, x, conn.domain)  # dpp[i, k, j] = d_j Pp[i, k]
        # (nabla_j Pp)^i_k = d_j Pp^i_k + G^i_jl Pp^l_k - Pp^i_l G^l_jk
        cov = np.transpose(dpp, (0, 2, 1)) + np.einsum("ijl,lk->ijk", g, pp) - np.einsum("il,ljk->ijk", pp, g)
        return g + cov

    return Connection(christoffel, conn.dim, False, conn.domain, f"constrained({conn.name},{D.name})")


def verdict(residual: float) -> str:
    if residual < PASS_TOL:
        return "pass"
    if residual > FAIL_TOL:
        return "fail"
    return "inconclusive"


@dataclass
class InvarianceReport:
    verdict: str
    max_residual: float
    max_residual_symmetric: float
    verdict_symmetric: str
    witnesses: List[dict]
    seed: int
    samples: int

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def consistent(self) -> bool:
        return self.verdict == self.verdict_symmetric

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "pass": self.passed,
            "max_residual": self.max_residual,
            "verdict_symmetric_product": self.verdict_symmetric,
            "max_residual_symmetric_product": self.max_residual_symmetric,
            "criteria_agree": self.consistent,
            "witnesses": self.witnesses,
            "seed": self.seed,
            "samples": self.samples,
        }


def _combination_field(D: Distribution, coeffs: np.ndarray, grads: np.ndarray, x0: np.ndarray):
    """Section of D with coefficients ``c_a + grad_a . (x - x0)``."""

    def fn(x):
        c = coeffs + grads @ (np.asarray(x) - x0)
        return sum(c[a] * np.asarray(D.fields[a](x), dtype=float) for a in range(D.rank))

    return fn


def geodesic_invariance_test(conn: Connection, D: Distribution, samples: int = 20, seed: int = 42,
                             combos: int = 3, domain: Optional[ChartDomain] = None) -> InvarianceReport:
    """Infinitesimal geodesic-invariance test.

    At each sampled point the self-derivative ``nabla_X X`` of random sections
    X of D (constant and linearly varying coefficients) and the symmetric
    products of the spanning fields are projected onto the complement of D.
    """
    rng = np.random.default_rng(seed)
    domain = domain or conn.domain
    pts = domain.sample(rng, samples)
    max_self = 0.0
    max_sym = 0.0
    witnesses = []
    for x in pts:
        D.basis(x)
        for _ in range(combos):
            coeffs = rng.normal(size=D.rank)
            coeffs /= np.linalg.norm(coeffs)
            grads = rng.normal(size=(D.rank, D.dim))
            X = _combination_field(D, coeffs, grads, x)
            w = covariant_derivative(conn, X, X, x)
            res = D.residual(x, w)
            if res > max_self:
                max_self = res
            if res >= PASS_TOL and len(witnesses) < 5:
                witnesses.append({"x": x.tolist(), "nabla_X_X": w.tolist(), "residual": res})
        for a in range(D.rank):
            for b in range(a, D.rank):
                w = symmetric_product(conn, D.fields[a], D.fields[b], x)
                res = D.residual(x, w)
                max_sym = max(max_sym, res)
    return InvarianceReport(verdict(max_self), max_self, max_sym, verdict(max_sym), witnesses, seed, samples)


def dynamic_invariance_check(conn: Connection, D: Distribution, s0: TangentState, t_end: float = 1.0,
                             dt: float = DEFAULT_DT) -> float:
    """Largest distance of the geodesic velocity from D along the trajectory."""
    start = D.residual(s0.x, s0.v)
    if start > 1e-10:
        raise InvariantError("initial velocity is not in the distribution", start)
    traj = integrate(geodesic_spray(conn), s0, t_end, dt)
    return max(D.residual(x, v) for x, v in zip(traj.x, traj.v))


def constraint_drift(traj: Trajectory, D: Distribution) -> float:
    return max(D.residual(x, v) for x, v in zip(traj.x, traj.v))
