"""Geodesic reduction of an invariant connection on M = B x G.

Every component map is read off one table of covariant derivatives of the
invariant frame ``E = (H_1..H_m, V_1..V_r)``: horizontal lifts of the
coordinate base fields followed by invariant vertical fields of the algebra
basis. Two projections split a vector ``w`` at ``p``: the base part ``w[:m]``
and the trivialized fiber part ``rho(w) = Ad_{g^-1} A(w)``.

With ``v = vbar^i H_i + eta^a V_a`` the reduced equations are

    vbar' = -G^A(vbar, vbar) - S(eta, eta) - pi<vbar^h : eta^V>
    eta'  =  R_Z(vbar) + U_Z(eta) - rho<vbar^h : eta^V>
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import GateFailure, InvariantError
from .lie import (
    SymmetryScenario,
    horizontal_field,
    invariant_frame,
    invariant_vertical_field,
    split_state,
)
from .spray import (
    DEFAULT_DT,
    TangentState,
    geodesic_spray,
    integrate,
    integrate_flat,
)
from .tensor_calc import Connection, covariant_derivative, fd_jacobian

GATE_TOL = 1e-5
FIBER_TOL = 1e-8


def _frame_fields(scen: SymmetryScenario):
    hs = [horizontal_field(scen, e) for e in np.eye(scen.m)]
    vs = [invariant_vertical_field(scen, e) for e in np.eye(scen.r)]
    return hs + vs


def rho(scen: SymmetryScenario, p, w) -> np.ndarray:
    """Fiber part ``J_L(q) w_q + a(xbar) w_base`` (equals Ad_{g^-1} A(w))."""
    xbar, q = scen.split_point(p)
    w = np.asarray(w, dtype=float)
    return scen.group.left_jacobian(q) @ w[scen.m :] + scen.principal.a(xbar) @ w[: scen.m]


@dataclass
class ComponentTable:
    """Projected covariant derivatives of the invariant frame at one point.

    ``base[:, a, b]`` and ``fiber[:, a, b]`` are the base and trivialized
    fiber parts of ``nabla_{E_a} E_b``.
    """

    base: np.ndarray
    fiber: np.ndarray
    m: int
    r: int

    @property
    def hh(self):
        m = self.m
        return self.base[:, :m, :m], self.fiber[:, :m, :m]

    @property
    def vv(self):
        m = self.m
        return self.base[:, m:, m:], self.fiber[:, m:, m:]

    def hv_sym(self):
        """Parts of ``<H_i : V_a>``, indexed ``[:, i, a]``."""
        m = self.m
        b = self.base[:, :m, m:] + np.transpose(self.base[:, m:, :m], (0, 2, 1))
        f = self.fiber[:, :m, m:] + np.transpose(self.fiber[:, m:, :m], (0, 2, 1))
        return b, f


def component_table(scen: SymmetryScenario, xbar, q=None, fields=None) -> ComponentTable:
    """``fields`` overrides the invariant frame with explicit field objects (slow path)."""
    p = scen.point(xbar, q)
    if fields is None:
        def frame(y):
            return invariant_frame(scen, y)
    else:
        def frame(y):
            return np.column_stack([f(y) for f in fields])
    E = frame(p)
    DE = fd_jacobian(frame, p, scen.domain)  # DE[i, b, l]
    C = kernels.connection_table(E, DE, scen.connection(p))
    base = C[: scen.m]
    xb, qq = scen.split_point(p)
    fiber = np.einsum("ij,jab->iab", scen.group.left_jacobian(qq), C[scen.m :]) + np.einsum(
        "ij,jab->iab", scen.principal.a(xb), C[: scen.m]
    )
    return ComponentTable(base, fiber, scen.m, scen.r)


class ReductionEngine:
    """Component maps of the reduced spray for one scenario.

    Tables are cached per base point; with a zero-dimensional base a single
    table serves the whole reduced flow.
    """

    def __init__(self, scen: SymmetryScenario, cache: bool = True):
        self.scen = scen
        self._cache = {} if cache else None

    def table(self, xbar, q=None) -> ComponentTable:
        xbar = np.asarray(xbar, dtype=float).reshape(self.scen.m)
        key = None
        if self._cache is not None and q is None:
            key = xbar.tobytes()
            hit = self._cache.get(key)
            if hit is not None:
                return hit
        tab = component_table(self.scen, xbar, q)
        if key is not None:
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[key] = tab
        return tab

    # --- the component maps -------------------------------------------------

    def reduced_christoffel(self, xbar, q=None) -> np.ndarray:
        return self.table(xbar, q).hh[0]

    def reduced_connection(self) -> Connection:
        scen = self.scen
        return Connection(lambda x: self.reduced_christoffel(x), scen.m, False, scen.base_domain,
                          f"reduced({scen.name})")

    def S_Z(self, xbar, vbar):
        """``(vbar, -pi nabla_{X^h} X^h)`` for the constant extension of ``vbar``."""
        scen = self.scen
        vbar = np.asarray(vbar, dtype=float)
        p = scen.point(xbar)
        Xh = horizontal_field(scen, vbar)
        acc = -covariant_derivative(scen.connection, Xh, Xh, p)[: scen.m]
        return vbar.copy(), acc

    def script_S(self, eta, xbar, q=None) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        return kernels.quad_contract(self.table(xbar, q).vv[0], eta, eta)

    def mixed_term(self, vbar, eta, xbar, q=None) -> np.ndarray:
        return kernels.quad_contract(self.table(xbar, q).hv_sym()[0], np.asarray(vbar, float), np.asarray(eta, float))

    def R_Z(self, vbar, xbar, q=None) -> np.ndarray:
        vbar = np.asarray(vbar, dtype=float)
        return -kernels.quad_contract(self.table(xbar, q).hh[1], vbar, vbar)

    def U_Z(self, eta, xbar, q=None) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        return -kernels.quad_contract(self.table(xbar, q).vv[1], eta, eta)

    def adjoint_connection_term(self, vbar, eta, xbar, q=None) -> np.ndarray:
        return kernels.quad_contract(self.table(xbar, q).hv_sym()[1], np.asarray(vbar, float), np.asarray(eta, float))

    # --- assembly -------------------------------------------------------------

    def rates(self, xbar, vbar, eta):
        """``(vbar', eta')`` of the reduced field."""
        tab = self.table(xbar)
        vbar = np.asarray(vbar, dtype=float)
        eta = np.asarray(eta, dtype=float)
        b_hh, f_hh = tab.hh
        b_vv, f_vv = tab.vv
        b_hv, f_hv = tab.hv_sym()
        vdot = (-kernels.quad_contract(b_hh, vbar, vbar) - kernels.quad_contract(b_vv, eta, eta)
                - kernels.quad_contract(b_hv, vbar, eta))
        edot = (-kernels.quad_contract(f_hh, vbar, vbar) - kernels.quad_contract(f_vv, eta, eta)
                - kernels.quad_contract(f_hv, vbar, eta))
        return vdot, edot

    def fiber_independence(self, rng: np.random.Generator, samples: int = 5) -> float:
        """Largest change of any projected table entry when moving along the fiber."""
        scen = self.scen
        worst = 0.0
        for _ in range(samples):
            p = scen.sample_point(rng)
            xbar, q = scen.split_point(p)
            t0 = self.table(xbar)
            t1 = self.table(xbar, q)
            worst = max(worst, float(np.max(np.abs(t0.base - t1.base), initial=0.0)),
                        float(np.max(np.abs(t0.fiber - t1.fiber), initial=0.0)))
        return worst


@dataclass(frozen=True, eq=False)
class ReducedState:
    xbar: np.ndarray
    vbar: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        for name in ("xbar", "vbar", "eta"):
            arr = np.asarray(getattr(self, name), dtype=float).ravel()
            if not np.all(np.isfinite(arr)):
                raise InvariantError(f"non-finite {name} in reduced state")
            object.__setattr__(self, name, arr)
        if self.xbar.shape != self.vbar.shape:
            raise ValueError("xbar and vbar must have equal length")

    def flat(self) -> np.ndarray:
        return np.concatenate([self.xbar, self.vbar, self.eta])

    @classmethod
    def from_flat(cls, y, m: int) -> "ReducedState":
        return cls(y[:m], y[m : 2 * m], y[2 * m :])


class ReducedField:
    def __init__(self, engine: ReductionEngine):
        self.engine = engine
        self.scen = engine.scen
        self.meta = {"scenario": self.scen.name, "group": self.scen.group.name,
                     "principal_connection": self.scen.principal.name}

    def __call__(self, s: ReducedState):
        self.scen.base_domain.check(s.xbar)
        vdot, edot = self.engine.rates(s.xbar, s.vbar, s.eta)
        return s.vbar.copy(), vdot, edot

    def rhs(self, y):
        m = self.scen.m
        xbar = y[:m]
        self.scen.base_domain.check(xbar)
        vdot, edot = self.engine.rates(xbar, y[m : 2 * m], y[2 * m :])
        return np.concatenate([y[m : 2 * m], vdot, edot])


def assemble_reduced_field(scen: SymmetryScenario) -> ReducedField:
    return ReducedField(ReductionEngine(scen))


@dataclass(eq=False)
class ReducedTrajectory:
    t: np.ndarray
    states: np.ndarray
    m: int
    dt: float
    meta: dict = field(default_factory=dict)

    @property
    def xbar(self):
        return self.states[:, : self.m]

    @property
    def vbar(self):
        return self.states[:, self.m : 2 * self.m]

    @property
    def eta(self):
        return self.states[:, 2 * self.m :]


def integrate_reduced(rf: ReducedField, s0: ReducedState, t_end: float, dt: float = DEFAULT_DT) -> ReducedTrajectory:
    t, ys, h = integrate_flat(rf.rhs, s0.flat(), t_end, dt)
    return ReducedTrajectory(t, ys, rf.scen.m, h, dict(rf.meta))


def reduce_state(scen: SymmetryScenario, s: TangentState) -> ReducedState:
    vbar, eta = split_state(scen, s)
    return ReducedState(s.x[: scen.m], vbar, eta)


@dataclass
class GateReport:
    scenario: str
    max_base_dev: float
    max_eta_dev: float
    tolerance: float
    t_end: float
    dt: float
    fiber_independence: Optional[float] = None

    @property
    def passed(self) -> bool:
        ok = self.max_base_dev < self.tolerance and self.max_eta_dev < self.tolerance
        if self.fiber_independence is not None:
            ok = ok and self.fiber_independence < FIBER_TOL
        return ok

    def to_dict(self):
        return {"scenario": self.scenario, "pass": self.passed, "max_base_dev": self.max_base_dev,
                "max_eta_dev": self.max_eta_dev, "tolerance": self.tolerance, "t_end": self.t_end,
                "dt": self.dt, "fiber_independence": self.fiber_independence}


def verify_reduction(scen: SymmetryScenario, s0: TangentState, t_end: float = 1.0, dt: float = DEFAULT_DT,
                     rf: Optional[ReducedField] = None, seed: Optional[int] = 42,
                     raise_on_fail: bool = False):
    """Compare the reduced flow with the projection of the full geodesic flow.

    Returns ``(report, reduced_trajectory)``.
    """
    rf = rf or assemble_reduced_field(scen)
    full = integrate(geodesic_spray(scen.connection), s0, t_end, dt)
    red = integrate_reduced(rf, reduce_state(scen, s0), t_end, dt)
    base_dev = 0.0
    eta_dev = 0.0
    for k in range(full.t.size):
        rs = reduce_state(scen, TangentState(full.x[k], full.v[k]))
        base = np.concatenate([rs.xbar - red.xbar[k], rs.vbar - red.vbar[k]])
        base_dev = max(base_dev, float(np.max(np.abs(base), initial=0.0)))
        eta_dev = max(eta_dev, float(np.max(np.abs(rs.eta - red.eta[k]), initial=0.0)))
    fib = None
    if seed is not None:
        fib = rf.engine.fiber_independence(np.random.default_rng(seed))
    report = GateReport(scen.name, base_dev, eta_dev, GATE_TOL, float(t_end), float(red.dt), fib)
    if raise_on_fail and not report.passed:
        raise GateFailure(
            f"reduced field of {scen.name!r} deviates from projected dynamics "
            f"(base {base_dev:.3g}, eta {eta_dev:.3g})", report)
    return report, red
