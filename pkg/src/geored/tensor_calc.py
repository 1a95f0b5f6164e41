"""Coordinate tensor calculus on a single chart.

Fields are plain callables ``point -> ndarray`` wrapped with their valence.
All derivatives are central finite differences with the step policy of
:func:`fd_step`; there is no symbolic differentiation anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import DomainError, InvariantError, SingularMetricError, StepExitsDomainError

FD_REL_STEP = 1e-6
SYMMETRY_TOL = 1e-12


def fd_step(xj: float) -> float:
    """Central-difference step for coordinate value ``xj``."""
    return max(1.0, abs(xj)) * FD_REL_STEP


@dataclass(frozen=True, eq=False)
class ChartDomain:
    """Open coordinate box with an optional extra validity predicate.

    ``sample_lower``/``sample_upper`` bound random sampling and default to the
    box itself clipped to [-2, 2].
    """

    dim: int
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    predicate: Optional[Callable[[np.ndarray], bool]] = None
    sample_lower: Optional[np.ndarray] = None
    sample_upper: Optional[np.ndarray] = None
    description: str = ""

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError("chart dimension must be non-negative")
        lo = np.full(self.dim, -np.inf) if self.lower is None else np.asarray(self.lower, float)
        hi = np.full(self.dim, np.inf) if self.upper is None else np.asarray(self.upper, float)
        if lo.shape != (self.dim,) or hi.shape != (self.dim,):
            raise ValueError("bounds must have shape (dim,)")
        if np.any(lo >= hi):
            raise ValueError("empty coordinate box")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        slo = np.clip(lo, -2.0, 2.0) if self.sample_lower is None else np.asarray(self.sample_lower, float)
        shi = np.clip(hi, -2.0, 2.0) if self.sample_upper is None else np.asarray(self.sample_upper, float)
        object.__setattr__(self, "sample_lower", slo)
        object.__setattr__(self, "sample_upper", shi)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        if np.any(x <= self.lower) or np.any(x >= self.upper):
            return False
        return self.predicate is None or bool(self.predicate(x))

    def check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.contains(x):
            raise DomainError(f"point {x.tolist()} outside chart domain {self.description}".rstrip())
        return x

    def sample(self, rng: np.random.Generator, count: int = 1, max_tries: int = 10000) -> np.ndarray:
        """Draw ``count`` points uniformly from the sampling box, rejecting invalid ones."""
        out = []
        tries = 0
        while len(out) < count:
            tries += 1
            if tries > max_tries:
                raise DomainError("could not sample valid points from the chart domain")
            x = rng.uniform(self.sample_lower, self.sample_upper)
            if self.contains(x):
                out.append(x)
        return np.array(out).reshape(count, self.dim)


def euclidean_domain(dim: int, **kw) -> ChartDomain:
    return ChartDomain(dim, **kw)


class TensorField:
    """A coordinate tensor field of valence ``(r, s)``.

    The evaluator returns the dense component array of shape ``(n,) * (r + s)``;
    scalars return shape ``()``.
    """

    def __init__(self, valence, fn, name: str = "", dim: Optional[int] = None):
        r, s = valence
        if r < 0 or s < 0:
            raise ValueError("valence entries must be non-negative")
        self.valence = (int(r), int(s))
        self.fn = fn
        self.name = name or getattr(fn, "__name__", "field")
        self.dim = dim

    @property
    def rank(self) -> int:
        return self.valence[0] + self.valence[1]

    def __call__(self, x) -> np.ndarray:
        val = np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)
        if self.dim is not None and val.shape != (self.dim,) * self.rank:
            raise InvariantError(
                f"field {self.name!r} returned shape {val.shape}, expected {(self.dim,) * self.rank}"
            )
        return val

    def __repr__(self):
        return f"TensorField({self.valence}, name={self.name!r})"


def vector_field(fn, name="", dim=None) -> TensorField:
    return TensorField((1, 0), fn, name, dim)


def scalar_field(fn, name="", dim=None) -> TensorField:
    return TensorField((0, 0), fn, name, dim)


def constant_vector_field(value, name="") -> TensorField:
    value = np.asarray(value, dtype=float)
    return TensorField((1, 0), lambda x: value.copy(), name or "const", value.size)


def fd_derivative(field, x, axis: int, domain: Optional[ChartDomain] = None) -> np.ndarray:
    """Central difference of ``field`` along coordinate ``axis`` at ``x``."""
    x = np.asarray(x, dtype=float)
    if domain is not None:
        domain.check(x)
    h = fd_step(x[axis])
    xp = x.copy()
    xm = x.copy()
    xp[axis] += h
    xm[axis] -= h
    if domain is not None and not (domain.contains(xp) and domain.contains(xm)):
        raise StepExitsDomainError(f"FD step along axis {axis} leaves the domain at {x.tolist()}")
    denom = xp[axis] - xm[axis]
    return (np.asarray(field(xp), dtype=float) - np.asarray(field(xm), dtype=float)) / denom


def fd_jacobian(field, x, domain: Optional[ChartDomain] = None) -> np.ndarray:
    """All partials; the derivative axis is appended last.

    For a vector field ``J[i, j] = d_j X^i``; for a matrix field ``D[i, j, a]``.
    """
    x = np.asarray(x, dtype=float)
    parts = [fd_derivative(field, x, a, domain) for a in range(x.size)]
    return np.stack(parts, axis=-1)


class Metric:
    """Riemannian metric on a chart.

    Symmetry (to 1e-12) and positive definiteness are checked at every point
    where the metric is evaluated. The returned matrix is exactly symmetric.
    """

    def __init__(self, fn, dim: int, domain: Optional[ChartDomain] = None, name: str = "metric"):
        self.field = fn if isinstance(fn, TensorField) else TensorField((0, 2), fn, name, dim)
        if self.field.valence != (0, 2):
            raise ValueError("metric must have valence (0, 2)")
        self.dim = dim
        self.domain = domain if domain is not None else ChartDomain(dim)
        self.name = name

    def raw(self, x) -> np.ndarray:
        return np.asarray(self.field.fn(np.asarray(x, dtype=float)), dtype=float).reshape(self.dim, self.dim)

    def __call__(self, x) -> np.ndarray:
        k = self.raw(x)
        scale = max(1.0, float(np.max(np.abs(k)))) if k.size else 1.0
        asym = float(np.max(np.abs(k - k.T))) if k.size else 0.0
        if asym > SYMMETRY_TOL * scale:
            raise InvariantError(f"metric {self.name!r} not symmetric at {np.asarray(x).tolist()}", asym)
        k = 0.5 * (k + k.T)
        try:
            np.linalg.cholesky(k)
        except np.linalg.LinAlgError:
            raise SingularMetricError(
                f"metric {self.name!r} not positive definite at {np.asarray(x).tolist()}"
            ) from None
        return k

    def inverse(self, x) -> np.ndarray:
        k = self(x)
        inv = np.linalg.inv(k)
        return 0.5 * (inv + inv.T)

    def derivative(self, x) -> np.ndarray:
        """``dg[a, i, j] = d_a k_ij`` by central differences."""
        x = np.asarray(x, dtype=float)
        parts = [fd_derivative(self.__call__, x, a, self.domain) for a in range(self.dim)]
        return np.stack(parts, axis=0)

    def inner(self, x, u, w) -> float:
        return float(np.asarray(u) @ self(x) @ np.asarray(w))


class Connection:
    """Affine connection given by its Christoffel symbols ``G[i, j, k]``.

    Convention: ``(nabla_X Y)^i = X^j d_j Y^i + G[i, j, k] X^j Y^k``.
    """

    def __init__(self, christoffel, dim: int, symmetric_lower: bool = False,
                 domain: Optional[ChartDomain] = None, name: str = "connection"):
        self.christoffel = christoffel
        self.dim = dim
        self.symmetric_lower = bool(symmetric_lower)
        self.domain = domain if domain is not None else ChartDomain(dim)
        self.name = name

    def __call__(self, x) -> np.ndarray:
        x = self.domain.check(x)
        g = np.asarray(self.christoffel(x), dtype=float).reshape(self.dim, self.dim, self.dim)
        if self.symmetric_lower and g.size:
            asym = float(np.max(np.abs(g - g.transpose(0, 2, 1))))
            if asym > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(g)))):
                raise InvariantError(f"connection {self.name!r} flagged torsion-free but is not", asym)
        return g

    def __repr__(self):
        return f"Connection({self.name!r}, dim={self.dim}, symmetric_lower={self.symmetric_lower})"


def flat_connection(dim: int, domain: Optional[ChartDomain] = None) -> Connection:
    zero = np.zeros((dim, dim, dim))
    return Connection(lambda x: zero, dim, True, domain, "flat")


def levi_civita(metric: Metric) -> Connection:
    """Christoffel symbols of the Levi-Civita connection of ``metric``."""

    def christoffel(x):
        ginv = metric.inverse(x)
        dg = metric.derivative(x)
        return kernels.christoffel_from_metric(ginv, dg)

    return Connection(christoffel, metric.dim, True, metric.domain, f"levi_civita({metric.name})")


def metric_compatibility_residual(metric: Metric, conn: Connection, x) -> float:
    """max |d_i k_jk - G^l_ij k_lk - G^l_ik k_jl| at ``x``."""
    k = metric(x)
    dg = metric.derivative(x)
    g = conn(x)
    rhs = np.einsum("lij,lk->ijk", g, k) + np.einsum("lik,jl->ijk", g, k)
    return float(np.max(np.abs(dg - rhs))) if dg.size else 0.0


def covariant_derivative(conn: Connection, X, Y, x) -> np.ndarray:
    """``nabla_X Y`` at ``x``."""
    x = np.asarray(x, dtype=float)
    jy = fd_jacobian(Y, x, conn.domain)
    xv = np.asarray(X(x), dtype=float)
    return jy @ xv + kernels.quad_contract(conn(x), xv, np.asarray(Y(x), dtype=float))


def symmetric_product(conn: Connection, X, Y, x) -> np.ndarray:
    """``<X : Y> = nabla_X Y + nabla_Y X``."""
    return covariant_derivative(conn, X, Y, x) + covariant_derivative(conn, Y, X, x)


def lie_bracket(X, Y, x, domain: Optional[ChartDomain] = None) -> np.ndarray:
    """``[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i``."""
    x = np.asarray(x, dtype=float)
    return fd_jacobian(Y, x, domain) @ np.asarray(X(x), float) - fd_jacobian(X, x, domain) @ np.asarray(Y(x), float)


def modify_connection(conn: Connection, S, symmetric_lower: Optional[bool] = None) -> Connection:
    """Connection with Christoffel symbols ``G + S`` for a (1,2) tensor field ``S``."""

    def christoffel(x):
        return conn(x) + np.asarray(S(x), dtype=float).reshape(conn.dim, conn.dim, conn.dim)

    flag = False if symmetric_lower is None else symmetric_lower
    name = f"{conn.name}+{getattr(S, 'name', 'S')}"
    return Connection(christoffel, conn.dim, flag, conn.domain, name)


def difference_tensor(conn_a: Connection, conn_b: Connection, x) -> np.ndarray:
    """``nabla^a - nabla^b`` as a (1,2) tensor at ``x``."""
    return conn_a(x) - conn_b(x)


def gradient(metric: Metric, V, x) -> np.ndarray:
    """``grad V = k^{ij} d_j V``."""
    x = np.asarray(x, dtype=float)
    dv = fd_jacobian(V, x, metric.domain).reshape(metric.dim)
    return np.linalg.solve(metric(x), dv)
