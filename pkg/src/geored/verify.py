"""Randomized verification suites shared by the CLI and the acceptance tests."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .frame_bundle import (
    FrameState,
    adapted_frame,
    adapted_frame_check,
    intrinsic_spray,
    orthonormal_frame,
    transport_frame,
)
from .lie import (
    curvature_lemma_sides,
    horizontal_lift,
    infinitesimal_generator,
    invariance_check,
    principal_connection_check,
)
from .reduction import GATE_TOL, assemble_reduced_field, verify_reduction
from .spray import (
    PASS_TOL,
    TangentState,
    constraint_drift,
    energy,
    geodesic_invariance_test,
    geodesic_spray,
    integrate,
    tangent_lift_value,
    verdict,
)
from .tensor_calc import covariant_derivative, metric_compatibility_residual

TOLERANCES = {
    "spray_identity": 1e-5,
    "intrinsic_spray": 1e-10,
    "frame_transport_geodesic": 1e-8,
    "frame_orthonormality": 1e-6,
    "metric_compatibility": 1e-5,
    "invariance": 1e-6,
    "principal_connection_reproduction": 1e-10,
    "principal_connection_equivariance": 1e-8,
    "mechanical_orthogonality": 1e-8,
    "reduction_gate": GATE_TOL,
    "fiber_independence": 1e-8,
    "curvature_lemma": 1e-5,
    "constraint_drift": 1e-6,
    "constrained_energy_drift": 1e-5,
    "forced_energy_drift": 1e-6,
    "geodesic_invariance_pass": PASS_TOL,
    "geodesic_invariance_fail": 1e-4,
}


def _check(name, value, tol, **extra):
    out = {"name": name, "max_residual": float(value), "tolerance": tol, "pass": bool(value < tol)}
    out.update(extra)
    return out


def random_extension(rng: np.random.Generator, x, v, scale: float = 0.5):
    """A smooth vector field X with ``X(x) = v``: random linear plus quadratic terms."""
    n = len(x)
    B = scale * rng.normal(size=(n, n))
    Q = scale * rng.normal(size=(n, n, n))
    x0 = np.array(x, dtype=float)
    v0 = np.array(v, dtype=float)

    def X(y):
        d = np.asarray(y) - x0
        return v0 + B @ d + np.einsum("ijk,j,k->i", Q, d, d)

    return X


def spray_identity_residuals(conn, state: TangentState, rng: np.random.Generator):
    """``|Z(v) - (X^T(v) - vlft nabla_X X)|`` and the same across two extensions."""
    Z = geodesic_spray(conn)
    zx, zv = Z(state)
    parts = []
    for _ in range(2):
        X = random_extension(rng, state.x, state.v)
        lx, lv = tangent_lift_value(X, state, conn.domain)
        parts.append(np.concatenate([lx, lv - covariant_derivative(conn, X, X, state.x)]))
    err = float(np.max(np.abs(parts[0] - np.concatenate([zx, zv]))))
    ext = float(np.max(np.abs(parts[0] - parts[1])))
    return err, ext


def sample_state(scen, rng: np.random.Generator) -> TangentState:
    x = scen.domain.sample(rng, 1)[0]
    return TangentState(x, rng.normal(size=scen.dim))


def spray_identity_check(scen, samples: int, rng) -> dict:
    worst = 0.0
    worst_ext = 0.0
    for _ in range(samples):
        err, ext = spray_identity_residuals(scen.connection, sample_state(scen, rng), rng)
        worst = max(worst, err)
        worst_ext = max(worst_ext, ext)
    tol = TOLERANCES["spray_identity"]
    return _check("spray_identity", max(worst, worst_ext), tol, decomposition=worst, extension_independence=worst_ext,
                  samples=samples)


def intrinsic_spray_check(scen, samples: int, rng) -> dict:
    worst = 0.0
    Z = geodesic_spray(scen.connection)
    n = scen.dim
    for _ in range(samples):
        s = sample_state(scen, rng)
        u = rng.normal(size=(n, n)) + 2.0 * np.eye(n)
        while abs(np.linalg.det(u)) < 1e-3:
            u = rng.normal(size=(n, n)) + 2.0 * np.eye(n)
        ix, iv = intrinsic_spray(scen.connection, s, u)
        zx, zv = Z(s)
        worst = max(worst, float(np.max(np.abs(ix - zx))), float(np.max(np.abs(iv - zv))))
    return _check("intrinsic_spray", worst, TOLERANCES["intrinsic_spray"], samples=samples)


def frame_transport_check(scen, t_end: float, dt: float) -> dict:
    """Frame transport along the scenario's initial geodesic."""
    s0 = scen.initial
    if scen.metric is not None:
        f0 = orthonormal_frame(scen.metric, s0.x)
    else:
        f0 = FrameState(s0.x, np.eye(scen.dim))
    xi = np.linalg.solve(f0.u, s0.v)
    ft = transport_frame(scen.connection, f0, xi, t_end, dt)
    geo = integrate(geodesic_spray(scen.connection), s0, t_end, dt)
    dev = float(np.max(np.abs(ft.x - geo.x)))
    out = [_check("frame_transport_geodesic", dev, TOLERANCES["frame_transport_geodesic"])]
    if scen.metric is not None:
        ortho = max(float(np.max(np.abs(u.T @ scen.metric(x) @ u - np.eye(scen.dim)))) for x, u in zip(ft.x, ft.u))
        out.append(_check("frame_orthonormality", ortho, TOLERANCES["frame_orthonormality"]))
    return out


def distribution_report(scen, name: str, seed: int, t_end: float, dt: float, samples: int = 20) -> dict:
    """Geodesic-invariance probes for one distribution.

    ``pass`` means the symmetric-product, self-derivative and drift probes
    agree with one another, not that D is invariant. Adapted-frame transport
    is reported alongside; its all-columns residual also sees the
    antisymmetric part of nabla on D, so it can fail for invariant but
    non-integrable D.
    """
    D = scen.distributions[name]
    conn = scen.connection
    rep = geodesic_invariance_test(conn, D, samples=samples, seed=seed)
    rng = np.random.default_rng(seed)
    x0 = scen.initial.x if scen.initial is not None else scen.domain.sample(rng, 1)[0]
    S = D.basis(x0)
    v0 = S @ (np.ones(D.rank) / np.sqrt(D.rank))
    traj = integrate(geodesic_spray(conn), TangentState(x0, v0), t_end, dt)
    drift = constraint_drift(traj, D)
    f0 = adapted_frame(D, x0)
    adapted = adapted_frame_check(conn, D, f0, t_end, np.ones(D.rank) / np.sqrt(D.rank), dt)
    verdicts = {rep.verdict, rep.verdict_symmetric, verdict(drift)}
    consistent = len(verdicts) == 1 and "inconclusive" not in verdicts
    return {
        "distribution": name,
        "verdict": rep.verdict,
        "infinitesimal": rep.to_dict(),
        "dynamic_drift": drift,
        "dynamic_verdict": verdict(drift),
        "adapted_frame": adapted.to_dict(),
        "consistent": consistent,
        "adapted_frame_consistent": adapted.verdict == rep.verdict,
        "pass": consistent,
    }


def symmetry_checks(scen, seed: int, t_end: float, dt: float, samples: int = 20) -> list:
    sym = scen.symmetry
    out = []
    obj = scen.metric if scen.metric is not None else scen.connection
    out.append(invariance_check(sym, obj, samples=samples, seed=seed).to_dict())
    if scen.metric is not None:
        out.append(invariance_check(sym, scen.connection, samples=samples, seed=seed).to_dict())
    pc = principal_connection_check(sym, samples=100, seed=seed)
    out.append(pc.to_dict())
    rng = np.random.default_rng(seed)
    if scen.metric is not None and sym.principal.name == "mechanical" and sym.m > 0:
        worst = 0.0
        for _ in range(samples):
            p = sym.sample_point(rng)
            h = horizontal_lift(sym, rng.normal(size=sym.m), p)
            g = infinitesimal_generator(sym, rng.normal(size=sym.r), p)
            worst = max(worst, abs(float(h @ scen.metric(p) @ g)))
        out.append(_check("mechanical_orthogonality", worst, TOLERANCES["mechanical_orthogonality"]))
    if scen.initial is not None:
        rf = assemble_reduced_field(sym)
        rep, _ = verify_reduction(sym, scen.initial, t_end, dt, rf=rf, seed=seed)
        d = rep.to_dict()
        d["name"] = "reduction_gate"
        out.append(d)
    if scen.metric is not None and sym.m >= 2:
        worst = 0.0
        for _ in range(samples):
            p = sym.sample_point(rng)
            lhs, rhs = curvature_lemma_sides(sym, rng.normal(size=sym.m), rng.normal(size=sym.m),
                                             rng.normal(size=sym.r), p)
            worst = max(worst, abs(lhs - rhs))
        out.append(_check("curvature_lemma", worst, TOLERANCES["curvature_lemma"], samples=samples))
    return out


def constraint_checks(scen, t_end: float, dt: float) -> list:
    D = scen.distributions[scen.constraint]
    traj = integrate(scen.spray(), scen.initial, t_end, dt)
    drift = constraint_drift(traj, D)
    e = [energy(scen.metric, TangentState(x, v)) for x, v in zip(traj.x, traj.v)]
    return [_check("constraint_drift", drift, TOLERANCES["constraint_drift"]),
            _check("constrained_energy_drift", max(e) - min(e), TOLERANCES["constrained_energy_drift"])]


def forced_checks(scen, t_end: float, dt: float) -> list:
    traj = integrate(scen.spray(), scen.initial, t_end, dt)
    e = [energy(scen.metric, TangentState(x, v), scen.potential) for x, v in zip(traj.x, traj.v)]
    return [_check("forced_energy_drift", max(e) - min(e), TOLERANCES["forced_energy_drift"])]


def verify_scenario(scen, seed: Optional[int] = None, t_end: Optional[float] = None, dt: Optional[float] = None,
                    samples: int = 20) -> dict:
    """Run every applicable suite; the report is a plain JSON-ready dict."""
    seed = scen.seed if seed is None else seed
    t_end = 1.0 if t_end is None else t_end
    dt = scen.dt if dt is None else dt
    rng = np.random.default_rng(seed)
    checks = []
    if scen.metric is not None:
        pts = scen.domain.sample(rng, samples)
        res = max(metric_compatibility_residual(scen.metric, scen.connection, x) for x in pts)
        checks.append(_check("metric_compatibility", res, TOLERANCES["metric_compatibility"]))
    checks.append(spray_identity_check(scen, samples, rng))
    checks.append(intrinsic_spray_check(scen, samples, rng))
    if scen.initial is not None and scen.constraint is None and scen.potential is None:
        checks.extend(frame_transport_check(scen, t_end, dt))
    if scen.symmetry is not None:
        checks.extend(symmetry_checks(scen, seed, t_end, dt, samples))
    if scen.constraint is not None and scen.initial is not None:
        checks.extend(constraint_checks(scen, t_end, dt))
    if scen.potential is not None and scen.initial is not None:
        checks.extend(forced_checks(scen, t_end, dt))
    dists = [distribution_report(scen, name, seed, t_end, dt) for name in sorted(scen.distributions)
             if name != scen.constraint]
    passed = all(c["pass"] for c in checks) and all(d["pass"] for d in dists)
    return {
        "scenario": scen.summary(),
        "seed": seed,
        "t_end": t_end,
        "dt": dt,
        "tolerances": dict(TOLERANCES),
        "checks": checks,
        "distributions": dists,
        "pass": passed,
    }
