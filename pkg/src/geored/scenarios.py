"""Builtin scenarios and JSON scenario configs.

A scenario bundles a chart, a connection (usually Levi-Civita of a metric),
optional potential, named distributions, an optional velocity constraint,
an optional symmetry, and default integration settings.

Scenario names may carry parameters: ``"rigid_body:I=1,2,3"`` or
``"chaplygin_sleigh:m=1,J=1,a=0.5"``. A bare token after a comma continues
the previous key's value list.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from .errors import ConfigError, ExpressionError, GeoredError, InvariantError
from .expr import ExpressionArray
from .lie import (
    PrincipalConnection,
    SymmetryScenario,
    group_by_name,
    invariance_check,
    mechanical_connection,
    principal_connection_check,
    so2,
    so3,
    translations,
)
from .spray import (
    DEFAULT_DT,
    Distribution,
    SecondOrderField,
    TangentState,
    constrained_connection,
    forced_spray,
    geodesic_spray,
)
from .tensor_calc import (
    ChartDomain,
    Connection,
    Metric,
    TensorField,
    levi_civita,
    metric_compatibility_residual,
    scalar_field,
    vector_field,
)

log = logging.getLogger(__name__)

DEFAULT_SEED = 42


@dataclass(eq=False)
class Scenario:
    name: str
    coordinates: List[str]
    domain: ChartDomain
    connection: Connection
    metric: Optional[Metric] = None
    potential: Optional[TensorField] = None
    distributions: Dict[str, Distribution] = field(default_factory=dict)
    constraint: Optional[str] = None
    symmetry: Optional[SymmetryScenario] = None
    initial: Optional[TangentState] = None
    t_end: float = 1.0
    dt: float = DEFAULT_DT
    seed: int = DEFAULT_SEED
    frame_xi: Optional[np.ndarray] = None
    description: str = ""
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    def dynamics_connection(self) -> Connection:
        """The connection whose geodesics the scenario follows (constrained if declared)."""
        if self.constraint is None:
            return self.connection
        if self.metric is None:
            raise ConfigError("a velocity constraint needs a metric")
        return constrained_connection(self.connection, self.metric, self.distributions[self.constraint])

    def spray(self) -> SecondOrderField:
        conn = self.dynamics_connection()
        if self.potential is not None:
            if self.metric is None:
                raise ConfigError("a potential needs a metric")
            return forced_spray(conn, self.metric, self.potential)
        return geodesic_spray(conn)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "coordinates": list(self.coordinates),
            "metric": self.metric is not None,
            "torsion_free": self.connection.symmetric_lower,
            "potential": self.potential is not None,
            "distributions": sorted(self.distributions),
            "constraint": self.constraint,
            "symmetry": None if self.symmetry is None else {
                "group": self.symmetry.group.name,
                "base_dim": self.symmetry.m,
                "principal_connection": self.symmetry.principal.name,
            },
            "params": self.params,
        }


# --- name parsing ----------------------------------------------------------------

def parse_scenario_name(spec: str):
    """``"name:k=v,w,k2=u"`` -> ``("name", {"k": [v, w], "k2": [u]})``."""
    name, _, rest = spec.partition(":")
    params: Dict[str, list] = {}
    key = None
    if rest.strip():
        for tok in rest.split(","):
            tok = tok.strip()
            if not tok:
                raise ConfigError(f"empty parameter in {spec!r}")
            if "=" in tok:
                key, _, val = tok.partition("=")
                key = key.strip()
                if not key:
                    raise ConfigError(f"missing parameter name in {spec!r}")
                params[key] = [val.strip()]
            elif key is None:
                raise ConfigError(f"value {tok!r} without a parameter name in {spec!r}")
            else:
                params[key].append(tok)
    out = {}
    for k, vals in params.items():
        try:
            nums = [float(v) for v in vals]
        except ValueError:
            raise ConfigError(f"parameter {k!r} must be numeric, got {vals}") from None
        out[k] = nums[0] if len(nums) == 1 else nums
    return name.strip(), out


def _param(params: dict, key: str, default):
    val = params.get(key, default)
    if isinstance(default, (list, tuple)):
        arr = np.atleast_1d(np.asarray(val, dtype=float))
        if arr.shape != np.shape(default):
            raise ConfigError(f"parameter {key!r} needs {len(default)} values")
        return arr
    if isinstance(val, (list, tuple)):
        raise ConfigError(f"parameter {key!r} takes one value")
    return float(val)


def _check_params(name: str, params: dict, allowed):
    extra = set(params) - set(allowed)
    if extra:
        raise ConfigError(f"unknown parameter(s) {sorted(extra)} for scenario {name!r}")


# --- builtins ---------------------------------------------------------------------

def _coord_fields(n: int):
    return [vector_field(lambda x, e=e: e.copy(), f"d{i}", n) for i, e in enumerate(np.eye(n))]


def _with_symmetry(scen: Scenario, base_dom: ChartDomain, group, principal="mechanical") -> Scenario:
    sym = SymmetryScenario(scen.name, base_dom, group, scen.connection, metric=scen.metric)
    if principal == "mechanical":
        sym = sym.with_principal(mechanical_connection(sym))
    elif principal is not None:
        sym = sym.with_principal(principal)
    scen.symmetry = sym
    return scen


def euclidean2(params) -> Scenario:
    _check_params("euclidean2", params, [])
    dom = ChartDomain(2)
    met = Metric(lambda x: np.eye(2), 2, dom, "euclidean")
    fx, fy = _coord_fields(2)
    shear = vector_field(lambda x: np.array([1.0, x[0]]), "dx+x1*dy", 2)
    scen = Scenario("euclidean2", ["x", "y"], dom, levi_civita(met), met,
                    distributions={"x_axis": Distribution([fx], 2, met, "x_axis"),
                                   "shear": Distribution([shear], 2, met, "shear")},
                    initial=TangentState([0.0, 0.0], [1.0, 0.0]),
                    description="flat plane; translations along y")
    return _with_symmetry(scen, ChartDomain(1), translations(1))


def sho2(params) -> Scenario:
    _check_params("sho2", params, ["omega"])
    w = _param(params, "omega", 1.0)
    dom = ChartDomain(2)
    met = Metric(lambda x: np.eye(2), 2, dom, "euclidean")
    V = scalar_field(lambda x: 0.5 * w * w * float(x @ x), "V", None)
    return Scenario("sho2", ["x", "y"], dom, levi_civita(met), met, potential=V,
                    initial=TangentState([1.0, 0.0], [0.0, 1.0]), t_end=math.pi / 2,
                    description="isotropic oscillator V = |x|^2 / 2 in the flat plane",
                    params={"omega": w})


def _polar_domain() -> ChartDomain:
    return ChartDomain(2, lower=[1e-3, -math.pi], upper=[1e3, math.pi],
                       sample_lower=[0.5, -1.0], sample_upper=[2.0, 1.0],
                       description="r in (1e-3, 1e3), theta in (-pi, pi)")


def polar_plane(params) -> Scenario:
    _check_params("polar_plane", params, [])
    dom = _polar_domain()
    met = Metric(lambda x: np.diag([1.0, x[0] ** 2]), 2, dom, "polar")
    fr, fth = _coord_fields(2)
    scen = Scenario("polar_plane", ["r", "theta"], dom, levi_civita(met), met,
                    distributions={"radial": Distribution([fr], 2, met, "radial"),
                                   "angular": Distribution([fth], 2, met, "angular")},
                    initial=TangentState([1.0, 0.0], [0.0, 1.0]),
                    description="flat plane in polar coordinates, SO(2) acting on theta")
    base = ChartDomain(1, lower=[1e-3], upper=[1e3], sample_lower=[0.5], sample_upper=[2.0])
    return _with_symmetry(scen, base, so2())


def heisenberg_metric(x):
    y = x[1]
    return np.array([[1.0 + y * y, 0.0, -y], [0.0, 1.0, 0.0], [-y, 0.0, 1.0]])


def heisenberg_kk(params) -> Scenario:
    _check_params("heisenberg_kk", params, [])
    dom = ChartDomain(3)
    met = Metric(heisenberg_metric, 3, dom, "heisenberg")
    _, fy, fz = _coord_fields(3)
    hx = vector_field(lambda x: np.array([1.0, 0.0, x[1]]), "dx+y*dz", 3)
    scen = Scenario("heisenberg_kk", ["x", "y", "z"], dom, levi_civita(met), met,
                    distributions={"vertical": Distribution([fz], 3, met, "vertical"),
                                   "horizontal": Distribution([hx, fy], 3, met, "horizontal")},
                    initial=TangentState([0.1, 0.2, 0.3], [0.5, -0.3, 0.7]),
                    frame_xi=np.array([0.5, -0.3, 0.7]),
                    description="dx^2 + dy^2 + (dz - y dx)^2, R acting on z")
    return _with_symmetry(scen, ChartDomain(2), translations(1))


def heisenberg_y_control(params) -> Scenario:
    """Negative control: the Heisenberg metric with R declared to act on y.

    Coordinates are ordered (x, z, y) so the group coordinate comes last.
    Loading it in strict mode fails the invariance check.
    """
    _check_params("heisenberg_y_control", params, [])
    dom = ChartDomain(3)
    perm = [0, 2, 1]
    met = Metric(lambda p: heisenberg_metric(p[[0, 2, 1]])[np.ix_(perm, perm)], 3, dom, "heisenberg_xzy")
    scen = Scenario("heisenberg_y_control", ["x", "z", "y"], dom, levi_civita(met), met,
                    initial=TangentState([0.1, 0.3, 0.2], [0.5, 0.7, -0.3]),
                    description="negative control: y-translation is not a symmetry")
    return _with_symmetry(scen, ChartDomain(2), translations(1))


def rigid_body(params) -> Scenario:
    _check_params("rigid_body", params, ["I"])
    inertia = _param(params, "I", [1.0, 2.0, 3.0])
    if np.any(inertia <= 0):
        raise ConfigError("principal moments must be positive")
    G = so3()
    I = np.diag(inertia)

    def k(q):
        J = G.left_jacobian(q)
        return J.T @ I @ J

    dom = replace(G.coord_domain, sample_lower=np.full(3, -1.0), sample_upper=np.full(3, 1.0))
    met = Metric(k, 3, dom, "left_invariant")
    scen = Scenario("rigid_body", ["q1", "q2", "q3"], dom, levi_civita(met), met,
                    initial=TangentState([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]),
                    description="free rigid body on SO(3) in exponential coordinates",
                    params={"I": inertia.tolist()})
    return _with_symmetry(scen, ChartDomain(0), G)


def chaplygin_sleigh(params) -> Scenario:
    _check_params("chaplygin_sleigh", params, ["m", "J", "a"])
    m = _param(params, "m", 1.0)
    J = _param(params, "J", 1.0)
    a = _param(params, "a", 0.5)
    if m <= 0 or J <= 0:
        raise ConfigError("mass and inertia must be positive")

    def k(x):
        s, c = math.sin(x[2]), math.cos(x[2])
        return np.array([[m, 0.0, -m * a * s], [0.0, m, m * a * c], [-m * a * s, m * a * c, J + m * a * a]])

    dom = ChartDomain(3)
    met = Metric(k, 3, dom, "sleigh")
    blade = vector_field(lambda x: np.array([math.cos(x[2]), math.sin(x[2]), 0.0]), "blade", 3)
    spin = vector_field(lambda x: np.array([0.0, 0.0, 1.0]), "dtheta", 3)
    D = Distribution([blade, spin], 3, met, "knife_edge")
    return Scenario("chaplygin_sleigh", ["x", "y", "theta"], dom, levi_civita(met), met,
                    distributions={"knife_edge": D}, constraint="knife_edge",
                    initial=TangentState([0.0, 0.0, 0.0], [1.0, 0.0, 1.0]),
                    description="Chaplygin sleigh with knife-edge constraint",
                    params={"m": m, "J": J, "a": a})


def _product_scenario(name, group, fiber_scale, description) -> Scenario:
    dom = ChartDomain(3, lower=[-np.inf, -np.inf, -math.pi] if group.name == "SO2" else None,
                      upper=[np.inf, np.inf, math.pi] if group.name == "SO2" else None,
                      sample_lower=[-2.0, -2.0, -1.0], sample_upper=[2.0, 2.0, 1.0])
    met = Metric(lambda x: np.diag([1.0, 1.0 + x[0] ** 2, fiber_scale(x)]), 3, dom, name)
    scen = Scenario(name, ["x", "y", "phi"], dom, levi_civita(met), met,
                    initial=TangentState([0.2, -0.1, 0.0], [0.4, 0.3, 0.8]),
                    description=description)
    return _with_symmetry(scen, ChartDomain(2), group)


def warped_product(params) -> Scenario:
    _check_params("warped_product", params, [])
    return _product_scenario("warped_product", so2(), lambda x: 1.0 + x[1] ** 2,
                             "base dx^2 + (1+x^2) dy^2, SO(2) fiber scaled by 1+y^2")


def product_control(params) -> Scenario:
    _check_params("product_control", params, [])
    return _product_scenario("product_control", translations(1), lambda x: 1.0,
                             "product of base dx^2 + (1+x^2) dy^2 with a flat R fiber")


BUILTINS: Dict[str, Callable[[dict], Scenario]] = {
    "euclidean2": euclidean2,
    "sho2": sho2,
    "polar_plane": polar_plane,
    "heisenberg_kk": heisenberg_kk,
    "heisenberg_y_control": heisenberg_y_control,
    "rigid_body": rigid_body,
    "chaplygin_sleigh": chaplygin_sleigh,
    "warped_product": warped_product,
    "product_control": product_control,
}

SYMMETRIC_BUILTINS = ["euclidean2", "polar_plane", "heisenberg_kk", "rigid_body", "warped_product", "product_control"]


# --- construction-time checks ------------------------------------------------------

def construction_checks(scen: Scenario, samples: int = 10) -> dict:
    """Cheap invariant checks run on every load; returns residuals by name."""
    rng = np.random.default_rng(scen.seed)
    out = {}
    pts = scen.domain.sample(rng, samples)
    for x in pts:
        scen.connection(x)  # shape and torsion flag
    if scen.metric is not None:
        res = max(metric_compatibility_residual(scen.metric, scen.connection, x) for x in pts)
        out["metric_compatibility"] = res
    for name, D in scen.distributions.items():
        for x in pts:
            D.basis(x)
    if scen.initial is not None:
        scen.domain.check(scen.initial.x)
        if scen.constraint is not None:
            res = scen.distributions[scen.constraint].residual(scen.initial.x, scen.initial.v)
            if res > 1e-10:
                raise InvariantError(f"initial velocity violates constraint {scen.constraint!r}", res)
    if scen.symmetry is not None:
        sym = scen.symmetry
        obj = scen.metric if scen.metric is not None else scen.connection
        rep = invariance_check(sym, obj, samples=samples, seed=scen.seed)
        out[rep.name] = rep.max_residual
        if not rep.passed:
            raise InvariantError(
                f"scenario {scen.name!r}: geometry is not invariant under {sym.group.name}", rep.max_residual)
        pc = principal_connection_check(sym, samples=20, seed=scen.seed)
        out[pc.name] = pc.max_residual
        if not pc.passed:
            raise InvariantError(f"scenario {scen.name!r}: principal connection axioms fail", pc.max_residual)
    return out


def load_builtin(spec: str, strict: bool = True, overrides: Optional[dict] = None) -> Scenario:
    name, params = parse_scenario_name(spec)
    if overrides:
        params.update(overrides)
    if name not in BUILTINS:
        raise ConfigError(f"unknown scenario {name!r}; builtins: {', '.join(sorted(BUILTINS))}")
    scen = BUILTINS[name](params)
    if strict:
        construction_checks(scen)
    return scen


# --- JSON configs ----------------------------------------------------------------------

def _require(cfg: dict, key: str, kind, where="config"):
    if key not in cfg:
        raise ConfigError(f"{where}: missing field {key!r}")
    val = cfg[key]
    if not isinstance(val, kind):
        raise ConfigError(f"{where}: field {key!r} has the wrong type")
    return val


_KNOWN_KEYS = {"name", "description", "builtin", "params", "coordinates", "domain", "metric", "christoffel",
               "torsion_free", "potential", "distributions", "constraint", "symmetry", "initial",
               "integration", "output", "seed", "frame"}


def _vector(cfg_val, n, what):
    try:
        arr = np.asarray(cfg_val, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be numeric") from None
    if arr.shape != (n,):
        raise ConfigError(f"{what} must have {n} entries")
    return arr


def _expr_array(entries, names, shape, what):
    flat = np.asarray(entries, dtype=object)
    if flat.shape != tuple(shape):
        raise ConfigError(f"{what} must have shape {tuple(shape)}, got {flat.shape}")
    try:
        return ExpressionArray([str(e) for e in flat.ravel()], names, shape)
    except ExpressionError as exc:
        raise ConfigError(f"{what}: {exc}") from exc


def scenario_from_config(cfg: dict, strict: bool = True) -> Scenario:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    if "builtin" in cfg:
        params = cfg.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("params must be an object")
        scen = load_builtin(str(cfg["builtin"]), strict=False, overrides=params)
    else:
        scen = _inline_scenario(cfg)
    integ = cfg.get("integration", {})
    if "t_end" in integ:
        scen.t_end = float(integ["t_end"])
    if "dt" in integ:
        scen.dt = float(integ["dt"])
    if "seed" in cfg:
        scen.seed = int(cfg["seed"])
    if "initial" in cfg and "builtin" in cfg:
        init = cfg["initial"]
        perm = list(range(scen.dim))
        scen.initial = TangentState(_vector(init.get("x"), scen.dim, "initial.x")[perm],
                                    _vector(init.get("v"), scen.dim, "initial.v")[perm])
    if strict:
        construction_checks(scen)
    return scen


def _inline_scenario(cfg: dict) -> Scenario:
    coords = _require(cfg, "coordinates", list)
    if not coords or not all(isinstance(c, str) and c.isidentifier() for c in coords):
        raise ConfigError("coordinates must be a non-empty list of identifiers")
    if len(set(coords)) != len(coords):
        raise ConfigError("coordinate names must be distinct")
    n = len(coords)
    sym_cfg = cfg.get("symmetry")
    axes: List[str] = []
    if sym_cfg is not None:
        axes = list(_require(sym_cfg, "axes", list, "symmetry"))
        missing = [a for a in axes if a not in coords]
        if missing:
            raise ConfigError(f"symmetry axes {missing} are not declared coordinates")
    base = [c for c in coords if c not in axes]
    order = base + axes  # group coordinates last
    perm = [coords.index(c) for c in order]

    # domain
    dcfg = cfg.get("domain", {})
    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    slo = np.full(n, np.nan)
    shi = np.full(n, np.nan)
    for key, target in (("lower", lower), ("upper", upper)):
        for cname, val in dcfg.get(key, {}).items():
            if cname not in order:
                raise ConfigError(f"domain.{key}: unknown coordinate {cname!r}")
            target[order.index(cname)] = float(val)
    for cname, rng_ in dcfg.get("sample", {}).items():
        if cname not in order:
            raise ConfigError(f"domain.sample: unknown coordinate {cname!r}")
        lo, hi = rng_
        slo[order.index(cname)] = float(lo)
        shi[order.index(cname)] = float(hi)
    slo = np.where(np.isnan(slo), np.clip(lower, -2.0, 2.0), slo)
    shi = np.where(np.isnan(shi), np.clip(upper, -2.0, 2.0), shi)
    positive = dcfg.get("positive", [])
    pos = _expr_array(positive, order, (len(positive),), "domain.positive") if positive else None
    def pred(x, pos=pos):
        try:
            return bool(np.all(pos(x) > 0))
        except ExpressionError:
            return False
    try:
        dom = ChartDomain(n, lower, upper, pred if pos is not None else None, slo, shi, str(dcfg.get("description", "")))
    except ValueError as exc:
        raise ConfigError(f"domain: {exc}") from exc

    name = str(cfg.get("name", "inline"))
    metric = None
    if "metric" in cfg:
        entries = np.asarray(cfg["metric"], dtype=object)
        if entries.shape != (n, n):
            raise ConfigError(f"metric must be a {n}x{n} array of expressions")
        arr = _expr_array(entries[np.ix_(perm, perm)], order, (n, n), "metric")
        metric = Metric(lambda x, arr=arr: arr(x), n, dom, f"{name}.metric")
        conn = levi_civita(metric)
        if "christoffel" in cfg:
            raise ConfigError("give either metric or christoffel, not both")
    elif "christoffel" in cfg:
        entries = np.asarray(cfg["christoffel"], dtype=object)
        if entries.shape != (n, n, n):
            raise ConfigError(f"christoffel must be an {n}x{n}x{n} array of expressions")
        arr = _expr_array(entries[np.ix_(perm, perm, perm)], order, (n, n, n), "christoffel")
        conn = Connection(lambda x, arr=arr: arr(x), n, bool(cfg.get("torsion_free", False)), dom,
                          f"{name}.connection")
    else:
        raise ConfigError("config needs a metric or christoffel block")

    potential = None
    if "potential" in cfg:
        pexpr = _expr_array([cfg["potential"]], order, (1,), "potential")
        potential = scalar_field(lambda x, pexpr=pexpr: pexpr(x)[0], "V")

    dists = {}
    for dname, spans in cfg.get("distributions", {}).items():
        spans = np.asarray(spans, dtype=object)
        if spans.ndim != 2 or spans.shape[1] != n:
            raise ConfigError(f"distribution {dname!r}: each spanning field needs {n} components")
        fields = []
        for j, row in enumerate(spans):
            arr = _expr_array(row[perm], order, (n,), f"distribution {dname!r} field {j}")
            fields.append(vector_field(lambda x, arr=arr: arr(x), f"{dname}[{j}]", n))
        dists[dname] = Distribution(fields, n, metric, dname)
    constraint = cfg.get("constraint")
    if constraint is not None and constraint not in dists:
        raise ConfigError(f"constraint {constraint!r} is not a declared distribution")

    init = cfg.get("initial")
    initial = None
    if init is not None:
        initial = TangentState(_vector(init.get("x"), n, "initial.x")[perm], _vector(init.get("v"), n, "initial.v")[perm])
    frame = cfg.get("frame", {})
    xi = _vector(frame["xi"], n, "frame.xi")[perm] if "xi" in frame else None

    scen = Scenario(name, order, dom, conn, metric, potential, dists, constraint, None, initial,
                    description=str(cfg.get("description", "")), frame_xi=xi)
    if sym_cfg is not None:
        try:
            group = group_by_name(str(_require(sym_cfg, "group", str, "symmetry")))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if group.dim != len(axes):
            raise ConfigError(f"group {group.name} needs {group.dim} axes, got {len(axes)}")
        m = len(base)
        base_dom = ChartDomain(m, lower[:m], upper[:m], None, slo[:m], shi[:m])
        choice = sym_cfg.get("connection", "mechanical")
        if choice == "mechanical":
            if metric is None:
                raise ConfigError("the mechanical connection needs a metric")
            principal = "mechanical"
        else:
            arr = _expr_array(choice, base, (group.dim, m), "symmetry.connection")
            principal = PrincipalConnection(group, m, lambda xb, arr=arr: arr(xb), "explicit")
        _with_symmetry(scen, base_dom, group, principal)
    return scen


def load_scenario(spec: Optional[str] = None, config: Optional[str] = None, strict: bool = True) -> Scenario:
    """Load a builtin by (parameterized) name or a JSON config file."""
    if (spec is None) == (config is None):
        raise ConfigError("give exactly one of a scenario name or a config path")
    if spec is not None:
        return load_builtin(spec, strict)
    path = Path(config)
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return scenario_from_config(cfg, strict)
    except GeoredError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def list_builtins() -> List[dict]:
    out = []
    for name in sorted(BUILTINS):
        scen = BUILTINS[name]({})
        info = scen.summary()
        out.append({"name": name, "description": info["description"], "dim": scen.dim,
                    "symmetry": info["symmetry"], "distributions": info["distributions"],
                    "constraint": info["constraint"]})
    return out
