"""Matrix Lie groups, trivial principal bundles M = B x G and principal connections.

Conventions
-----------
* Points of M are coordinate vectors ``p = (xbar, q)``: ``xbar`` in the base
  chart (dim m) and ``q`` exponential coordinates on G, ``g = exp(q^a E_a)``.
* G acts on the left of the fiber factor: ``h . (xbar, g) = (xbar, h g)``.
* ``A(v) = (dg g^-1) + Ad_g(a(xbar) v_base)``, with ``a`` the local form of
  the principal connection (an r x m matrix field on the base).
* Reduced fiber velocities are ``eta = Ad_{g^-1} A(v) = g^-1 dg + a v_base``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.linalg

from .errors import InvariantError, SingularMetricError
from .spray import TangentState
from .tensor_calc import (
    ChartDomain,
    Connection,
    Metric,
    TensorField,
    fd_jacobian,
    lie_bracket,
)

INVARIANCE_TOL = 1e-6
SERIES_TERMS = 40


class MatrixLieGroup:
    """A matrix Lie group described by a basis of its Lie algebra.

    Parameters
    ----------
    basis : array (r, d, d)
        Algebra basis ``E_a``.
    name : str
    log : callable, optional
        Closed-form inverse of ``exp`` on the chart, matrix -> coordinates.
        Defaults to the principal matrix logarithm.
    """

    def __init__(self, basis, name: str, log: Optional[Callable] = None,
                 coord_domain: Optional[ChartDomain] = None):
        self.basis = np.asarray(basis, dtype=float)
        if self.basis.ndim != 3 or self.basis.shape[1] != self.basis.shape[2]:
            raise ValueError("basis must have shape (r, d, d)")
        self.name = name
        self.dim = self.basis.shape[0]
        self.size = self.basis.shape[1]
        flat = self.basis.reshape(self.dim, -1).T
        if np.linalg.matrix_rank(flat) < self.dim:
            raise InvariantError(f"algebra basis of {name} is linearly dependent")
        self._vee = np.linalg.pinv(flat)
        self.structure = np.zeros((self.dim, self.dim, self.dim))
        for a in range(self.dim):
            for b in range(self.dim):
                Ea, Eb = self.basis[a], self.basis[b]
                self.structure[:, a, b] = self.vee(Ea @ Eb - Eb @ Ea)
        self.abelian = bool(np.max(np.abs(self.structure), initial=0.0) < 1e-14)
        self._log = log
        self.coord_domain = coord_domain if coord_domain is not None else ChartDomain(self.dim)
        self._check_axioms()

    def _check_axioms(self):
        c = self.structure
        anti = float(np.max(np.abs(c + c.transpose(0, 2, 1)), initial=0.0))
        if anti > 1e-12:
            raise InvariantError(f"structure constants of {self.name} not antisymmetric", anti)
        if self.jacobi_residual() > 1e-12:
            raise InvariantError(f"Jacobi identity fails for {self.name}", self.jacobi_residual())

    def jacobi_residual(self) -> float:
        c = self.structure
        # [[E_a,E_b],E_c] + cyclic, in structure constants
        t = np.einsum("dab,edc->eabc", c, c)
        cyc = t + np.transpose(t, (0, 2, 3, 1)) + np.transpose(t, (0, 3, 1, 2))
        return float(np.max(np.abs(cyc), initial=0.0))

    def hat(self, xi) -> np.ndarray:
        return np.tensordot(np.asarray(xi, dtype=float), self.basis, axes=1)

    def vee(self, mat) -> np.ndarray:
        return self._vee @ np.asarray(mat, dtype=float).ravel()

    def bracket(self, xi, zeta) -> np.ndarray:
        return np.einsum("cab,a,b->c", self.structure, xi, zeta)

    def ad(self, xi) -> np.ndarray:
        """Matrix of ``ad_xi`` on algebra coordinates."""
        return np.einsum("cab,a->cb", self.structure, np.asarray(xi, dtype=float))

    def exp(self, xi) -> np.ndarray:
        return scipy.linalg.expm(self.hat(xi))

    def identity(self) -> np.ndarray:
        return np.eye(self.size)

    def to_matrix(self, q) -> np.ndarray:
        return self.exp(q)

    def from_matrix(self, g) -> np.ndarray:
        if self._log is not None:
            return np.asarray(self._log(g), dtype=float)
        return self.vee(np.real(scipy.linalg.logm(g)))

    def Ad(self, g) -> np.ndarray:
        """Matrix of ``Ad_g`` on algebra coordinates."""
        ginv = np.linalg.inv(g)
        return np.column_stack([self.vee(g @ E @ ginv) for E in self.basis])

    def _dexp_series(self, q, sign: float) -> np.ndarray:
        if self.abelian:
            return np.eye(self.dim)
        ad = sign * self.ad(q)
        out = np.eye(self.dim)
        term = np.eye(self.dim)
        for k in range(1, SERIES_TERMS):
            term = term @ ad / (k + 1)
            out = out + term
            if np.max(np.abs(term)) < 1e-18:
                break
        return out

    def left_jacobian(self, q) -> np.ndarray:
        """``g^-1 dg/dq^b`` in algebra coordinates (columns indexed by b)."""
        return self._dexp_series(q, -1.0)

    def right_jacobian(self, q) -> np.ndarray:
        """``dg/dq^b g^-1`` in algebra coordinates."""
        return self._dexp_series(q, 1.0)

    def __repr__(self):
        return f"MatrixLieGroup({self.name!r}, dim={self.dim})"


def _so3_hat(w):
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def so2() -> MatrixLieGroup:
    E = np.array([[[0.0, -1.0], [1.0, 0.0]]])
    return MatrixLieGroup(E, "SO2", log=lambda g: np.array([math.atan2(g[1, 0], g[0, 0])]))


def so3() -> MatrixLieGroup:
    basis = np.array([_so3_hat(e) for e in np.eye(3)])
    dom = ChartDomain(3, predicate=lambda q: float(np.linalg.norm(q)) < math.pi - 1e-6,
                      sample_lower=np.full(3, -1.0), sample_upper=np.full(3, 1.0),
                      description="|q| < pi")
    return MatrixLieGroup(basis, "SO3", coord_domain=dom)


def translations(k: int = 1) -> MatrixLieGroup:
    """R^k as homogeneous (k+1) x (k+1) matrices."""
    basis = np.zeros((k, k + 1, k + 1))
    for a in range(k):
        basis[a, a, k] = 1.0
    return MatrixLieGroup(basis, f"R{k}", log=lambda g: np.array(g[:k, k], dtype=float))


GROUPS = {"SO2": so2, "SO3": so3, "R1": lambda: translations(1), "R2": lambda: translations(2),
          "R3": lambda: translations(3)}


def group_by_name(name: str) -> MatrixLieGroup:
    try:
        return GROUPS[name]()
    except KeyError:
        raise ValueError(f"unknown group {name!r}; known: {sorted(GROUPS)}") from None


@dataclass(eq=False)
class PrincipalConnection:
    """Principal connection given by its local form ``a: xbar -> (r, m)``."""

    group: MatrixLieGroup
    m: int
    a_form: Callable[[np.ndarray], np.ndarray]
    name: str = "A"

    def a(self, xbar) -> np.ndarray:
        return np.asarray(self.a_form(np.asarray(xbar, dtype=float)), dtype=float).reshape(self.group.dim, self.m)

    def __call__(self, p, w) -> np.ndarray:
        """``A(w)`` at the point ``p`` (right-trivialized algebra coordinates)."""
        m = self.m
        p = np.asarray(p, dtype=float)
        w = np.asarray(w, dtype=float)
        xbar, q = p[:m], p[m:]
        g = self.group.to_matrix(q)
        return self.group.right_jacobian(q) @ w[m:] + self.group.Ad(g) @ (self.a(xbar) @ w[:m])


def zero_connection(group: MatrixLieGroup, m: int) -> PrincipalConnection:
    zero = np.zeros((group.dim, m))
    return PrincipalConnection(group, m, lambda xbar: zero, "flat")


class SymmetryScenario:
    """Trivial principal bundle ``M = B x G`` carrying invariant geometry.

    The invariant geometry is a metric on M (from which the Levi-Civita
    connection is derived) or a connection given directly.
    """

    def __init__(self, name: str, base_domain: ChartDomain, group: MatrixLieGroup,
                 connection: Connection, principal: Optional[PrincipalConnection] = None,
                 metric: Optional[Metric] = None, meta: Optional[dict] = None):
        self.name = name
        self.base_domain = base_domain
        self.group = group
        self.m = base_domain.dim
        self.r = group.dim
        self.n = self.m + self.r
        if connection.dim != self.n:
            raise InvariantError(f"connection dimension {connection.dim} != m + r = {self.n}")
        if metric is not None and metric.dim != self.n:
            raise InvariantError(f"metric dimension {metric.dim} != m + r = {self.n}")
        self.connection = connection
        self.metric = metric
        self.principal = principal if principal is not None else zero_connection(group, self.m)
        self.meta = meta or {}

    @property
    def domain(self) -> ChartDomain:
        return self.connection.domain

    def with_principal(self, principal: PrincipalConnection) -> "SymmetryScenario":
        return SymmetryScenario(self.name, self.base_domain, self.group, self.connection,
                                principal, self.metric, dict(self.meta))

    def split_point(self, p):
        p = np.asarray(p, dtype=float)
        return p[: self.m], p[self.m :]

    def point(self, xbar, q=None) -> np.ndarray:
        q = np.zeros(self.r) if q is None else np.asarray(q, dtype=float)
        return np.concatenate([np.asarray(xbar, dtype=float).reshape(self.m), q])

    def act(self, h, p) -> np.ndarray:
        """Coordinates of ``h . p``."""
        xbar, q = self.split_point(p)
        return np.concatenate([xbar, self.group.from_matrix(h @ self.group.to_matrix(q))])

    def action_jacobian(self, h, p) -> np.ndarray:
        """Jacobian of ``p -> h . p`` in coordinates."""
        xbar, q = self.split_point(p)
        q2 = self.act(h, p)[self.m :]
        T = np.eye(self.n)
        T[self.m :, self.m :] = np.linalg.solve(self.group.left_jacobian(q2), self.group.left_jacobian(q))
        return T

    def sample_point(self, rng: np.random.Generator) -> np.ndarray:
        return self.domain.sample(rng, 1)[0]

    def sample_pair(self, rng: np.random.Generator, max_tries: int = 1000):
        """A point and a group element whose image stays inside the chart."""
        for _ in range(max_tries):
            p = self.sample_point(rng)
            h = self.sample_group_element(rng)
            if self.domain.contains(self.act(h, p)):
                return p, h
        raise InvariantError("could not sample a point/group pair inside the chart")

    def sample_group_element(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        return self.group.exp(scale * rng.uniform(-1.0, 1.0, self.r))

    def __repr__(self):
        return f"SymmetryScenario({self.name!r}, m={self.m}, G={self.group.name})"


def fiber_velocity_from_left(scen: SymmetryScenario, q, eta) -> np.ndarray:
    """Coordinate velocity ``qdot`` with ``g^-1 dg = eta``."""
    return np.linalg.solve(scen.group.left_jacobian(q), np.asarray(eta, dtype=float))


def infinitesimal_generator(scen: SymmetryScenario, xi, p) -> np.ndarray:
    """``xi_M(p) = d/dt (xbar, exp(t xi) g)`` in coordinates."""
    _, q = scen.split_point(p)
    out = np.zeros(scen.n)
    out[scen.m :] = np.linalg.solve(scen.group.right_jacobian(q), np.asarray(xi, dtype=float))
    return out


def invariant_frame(scen: SymmetryScenario, p) -> np.ndarray:
    """Columns ``H_1..H_m`` (lifts of the coordinate base fields) then ``V_1..V_r``."""
    xbar, q = scen.split_point(p)
    m = scen.m
    jl_inv = np.linalg.inv(scen.group.left_jacobian(q))
    E = np.zeros((scen.n, scen.n))
    E[:m, :m] = np.eye(m)
    if m:
        E[m:, :m] = -jl_inv @ scen.principal.a(xbar)
    E[m:, m:] = jl_inv
    return E


def invariant_vertical_field(scen: SymmetryScenario, eta) -> TensorField:
    """Left-invariant vertical field ``(xbar, g) -> (0, g eta)``."""
    eta = np.asarray(eta, dtype=float)

    def fn(p):
        _, q = scen.split_point(p)
        out = np.zeros(scen.n)
        out[scen.m :] = fiber_velocity_from_left(scen, q, eta)
        return out

    return TensorField((1, 0), fn, f"V[{eta.tolist()}]", scen.n)


def horizontal_lift(scen: SymmetryScenario, vbar, p) -> np.ndarray:
    """Horizontal vector at ``p`` projecting to ``vbar``."""
    vbar = np.asarray(vbar, dtype=float)
    xbar, q = scen.split_point(p)
    out = np.empty(scen.n)
    out[: scen.m] = vbar
    out[scen.m :] = fiber_velocity_from_left(scen, q, -scen.principal.a(xbar) @ vbar)
    return out


def horizontal_field(scen: SymmetryScenario, base_field) -> TensorField:
    """Invariant horizontal lift of a base vector field (or constant vector)."""
    if callable(base_field):
        fn = lambda p: horizontal_lift(scen, base_field(scen.split_point(p)[0]), p)
    else:
        const = np.asarray(base_field, dtype=float)
        fn = lambda p: horizontal_lift(scen, const, p)
    return TensorField((1, 0), fn, "hor", scen.n)


def locked_inertia(scen: SymmetryScenario, xbar) -> np.ndarray:
    k = scen.metric(scen.point(xbar))
    return k[scen.m :, scen.m :]


def mechanical_connection(scen: SymmetryScenario) -> PrincipalConnection:
    """Principal connection whose horizontal space is k-orthogonal to the orbits.

    Evaluated at ``g = e``: ``a = I_locked^{-1} k_{fiber,base}``.
    """
    if scen.metric is None:
        raise InvariantError("mechanical connection needs an invariant metric")
    m = scen.m

    def a_form(xbar):
        k = scen.metric(scen.point(xbar))
        # a principal block of a positive definite k is itself positive definite,
        # so only near-singular conditioning can go wrong here
        try:
            return scipy.linalg.solve(k[m:, m:], k[m:, :m], assume_a="pos")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            raise SingularMetricError(f"locked inertia singular at {np.asarray(xbar).tolist()}") from None

    return PrincipalConnection(scen.group, m, a_form, "mechanical")


@dataclass
class CheckReport:
    name: str
    passed: bool
    max_residual: float
    tolerance: float
    witnesses: List[dict] = field(default_factory=list)
    seed: Optional[int] = None

    def to_dict(self):
        return {"name": self.name, "pass": self.passed, "max_residual": self.max_residual,
                "tolerance": self.tolerance, "witnesses": self.witnesses, "seed": self.seed}


def _pullback(F: np.ndarray, valence, T: np.ndarray, Tinv: np.ndarray) -> np.ndarray:
    """Pull a tensor at ``h.p`` back to ``p`` through the action Jacobian."""
    r, s = valence
    out = F
    for idx in range(r + s):
        mat = Tinv if idx < r else T.T
        # contract tensor axis idx with mat (new index first)
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [idx])), 0, idx)
    return out


def invariance_check(scen: SymmetryScenario, obj, samples: int = 20, seed: int = 42,
                     tol: float = INVARIANCE_TOL) -> CheckReport:
    """Check invariance of a Metric, Connection or TensorField under the action."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    witnesses = []
    for _ in range(samples):
        p, h = scen.sample_pair(rng)
        p2 = scen.act(h, p)
        T = scen.action_jacobian(h, p)
        if isinstance(obj, Metric):
            res = float(np.max(np.abs(T.T @ obj(p2) @ T - obj(p))))
            label = "metric"
        elif isinstance(obj, Connection):
            # G(p')(T., T.) + d T - T G(p) = 0
            dT = fd_jacobian(lambda y: scen.action_jacobian(h, y), p, scen.domain)  # dT[i,k,j] = d_j T^i_k
            lhs = np.einsum("iab,aj,bk->ijk", obj(p2), T, T) + np.transpose(dT, (0, 2, 1))
            rhs = np.einsum("il,ljk->ijk", T, obj(p))
            res = float(np.max(np.abs(lhs - rhs)))
            label = "connection"
        elif isinstance(obj, TensorField):
            back = _pullback(obj(p2), obj.valence, T, np.linalg.inv(T))
            res = float(np.max(np.abs(back - obj(p)), initial=0.0))
            label = "tensor"
        else:
            raise TypeError(f"cannot check invariance of {type(obj).__name__}")
        if res > worst:
            worst = res
        if res >= tol and len(witnesses) < 5:
            witnesses.append({"p": p.tolist(), "h": h.tolist(), "residual": res})
    return CheckReport(f"{label}_invariance", worst < tol, worst, tol, witnesses, seed)


def principal_connection_check(scen: SymmetryScenario, samples: int = 100, seed: int = 42) -> CheckReport:
    """``A(xi_M) = xi`` (tol 1e-10) and ``A(Th w) = Ad_h A(w)`` (tol 1e-8)."""
    rng = np.random.default_rng(seed)
    A = scen.principal
    repro = 0.0
    equi = 0.0
    for i in range(samples):
        p = scen.sample_point(rng)
        xi = rng.normal(size=scen.r)
        repro = max(repro, float(np.max(np.abs(A(p, infinitesimal_generator(scen, xi, p)) - xi))))
        if i < 20:
            p, h = scen.sample_pair(rng)
            w = rng.normal(size=scen.n)
            lhs = A(scen.act(h, p), scen.action_jacobian(h, p) @ w)
            rhs = scen.group.Ad(h) @ A(p, w)
            equi = max(equi, float(np.max(np.abs(lhs - rhs))))
    passed = repro < 1e-10 and equi < 1e-8
    return CheckReport("principal_connection_axioms", passed, max(repro, equi), 1e-8,
                       [{"reproduction": repro, "equivariance": equi}], seed)


def split_state(scen: SymmetryScenario, s: TangentState):
    """``(vbar, eta)`` with ``eta = Ad_{g^-1} A(v)``."""
    xbar, q = scen.split_point(s.x)
    g = scen.group.to_matrix(q)
    A_val = scen.principal(s.x, s.v)
    eta = scen.group.Ad(np.linalg.inv(g)) @ A_val
    return s.v[: scen.m].copy(), eta


def unsplit_state(scen: SymmetryScenario, xbar, q, vbar, eta) -> TangentState:
    p = scen.point(xbar, q)
    v = horizontal_lift(scen, vbar, p) + invariant_vertical_field(scen, eta)(p)
    return TangentState(p, v)


def curvature_pairing(scen: SymmetryScenario, Xbar, Ybar, p) -> np.ndarray:
    """``B_A(X^h, Y^h) = -A([X^h, Y^h])`` at ``p`` with an FD Lie bracket."""
    Xh = horizontal_field(scen, Xbar)
    Yh = horizontal_field(scen, Ybar)
    br = lie_bracket(Xh, Yh, p, scen.domain)
    return -scen.principal(p, br)


def curvature_lemma_sides(scen: SymmetryScenario, Xbar, Ybar, eta, p):
    """Both sides of ``k(<X^h : V>, Y^h) = k(B_A(X^h, Y^h)_M, V)``."""
    from .tensor_calc import symmetric_product

    k = scen.metric(p)
    Xh = horizontal_field(scen, Xbar)
    Yh = horizontal_field(scen, Ybar)
    V = invariant_vertical_field(scen, eta)
    lhs = float(symmetric_product(scen.connection, Xh, V, p) @ k @ Yh(p))
    B = curvature_pairing(scen, Xbar, Ybar, p)
    rhs = float(infinitesimal_generator(scen, B, p) @ k @ V(p))
    return lhs, rhs
