import math

import numpy as np
import pytest

from geored.errors import FrameDegenerationError, InvariantError, NotAdaptedError
from geored.frame_bundle import (
    FrameState,
    FrameVector,
    adapted_frame,
    adapted_frame_check,
    association_map,
    canonical_form,
    connection_form,
    f_Y,
    intrinsic_spray,
    natural_lift,
    orthonormal_frame,
    standard_horizontal_field,
    sym_omega_theta,
    transport_frame,
)
from geored.spray import Distribution, TangentState, geodesic_spray, integrate
from geored.tensor_calc import (
    ChartDomain,
    Connection,
    Metric,
    constant_vector_field,
    covariant_derivative,
    flat_connection,
    levi_civita,
    lie_bracket,
    symmetric_product,
    vector_field,
)


def polar():
    dom = ChartDomain(2, lower=[1e-3, -math.pi], upper=[1e3, math.pi], sample_lower=[0.5, -1], sample_upper=[2, 1])
    met = Metric(lambda x: np.diag([1.0, x[0] ** 2]), 2, dom)
    return met, levi_civita(met)


def random_frame(rng, n):
    while True:
        u = rng.normal(size=(n, n)) + 2 * np.eye(n)
        if abs(np.linalg.det(u)) > 1e-2:
            return u


def test_singular_frame_rejected():
    with pytest.raises(InvariantError):
        FrameState([0.0, 0.0], np.zeros((2, 2)))


def test_association_map(rng):
    f = FrameState([0.0, 0.0], np.eye(2))
    assert np.array_equal(association_map(f, [1.0, 0.0]).v, [1.0, 0.0])
    assert np.array_equal(association_map(f, [0.0, 0.0]).v, [0.0, 0.0])
    u = FrameState([1.0, 2.0], random_frame(rng, 2))
    a = random_frame(rng, 2)
    xi = rng.normal(size=2)
    np.testing.assert_allclose(association_map(u.act(a), np.linalg.solve(a, xi)).v, association_map(u, xi).v, atol=1e-12)


def test_canonical_form_examples():
    f = FrameState([0.0, 0.0], np.eye(2))
    assert np.array_equal(canonical_form(FrameVector(f, np.zeros(2), np.zeros((2, 2)))), [0.0, 0.0])
    assert np.array_equal(canonical_form(FrameVector(f, np.array([3.0, 4.0]), np.zeros((2, 2)))), [3.0, 4.0])
    g = FrameState([0.0, 0.0], 2 * np.eye(2))
    np.testing.assert_allclose(canonical_form(FrameVector(g, np.array([2.0, 0.0]), np.zeros((2, 2)))), [1.0, 0.0])


def test_connection_form_horizontal_and_vertical(rng):
    _, conn = polar()
    f = FrameState([1.3, 0.2], random_frame(rng, 2))
    B = standard_horizontal_field(conn, rng.normal(size=2))(f)
    np.testing.assert_allclose(connection_form(conn, B), np.zeros((2, 2)), atol=1e-12)
    A = rng.normal(size=(2, 2))
    vert = FrameVector(FrameState([1.3, 0.2], np.eye(2)), np.zeros(2), A)
    assert np.array_equal(connection_form(conn, vert), A)


def test_prop_connection_form_reproduces_covariant_derivative(rng):
    met, conn = polar()
    c = rng.normal(size=(2, 3))
    X = vector_field(lambda x: np.array([c[0, 0] + c[0, 1] * x[0], c[0, 2] * x[1] ** 2 + 1.0]))
    Y = vector_field(lambda x: np.array([c[1, 0] * x[0] * x[1], c[1, 1] + c[1, 2] * x[0]]))
    for x in conn.domain.sample(rng, 50):
        f = FrameState(x, random_frame(rng, 2))
        lhs = covariant_derivative(conn, X, Y, x)
        rhs = lie_bracket(X, Y, x, conn.domain) + f.u @ (connection_form(conn, natural_lift(X, f, conn.domain)) @ f_Y(Y, f))
        np.testing.assert_allclose(lhs, rhs, atol=1e-5)


def test_standard_horizontal_field(rng):
    f = FrameState([0.0, 0.0], np.eye(2))
    B = standard_horizontal_field(flat_connection(2), [1.0, 2.0])(f)
    assert np.array_equal(B.xdot, [1.0, 2.0]) and np.array_equal(B.udot, np.zeros((2, 2)))
    _, conn = polar()
    xi = rng.normal(size=2)
    f = FrameState([1.1, 0.4], random_frame(rng, 2))
    np.testing.assert_allclose(canonical_form(standard_horizontal_field(conn, xi)(f)), xi, atol=1e-12)
    a = random_frame(rng, 2)
    Ba = standard_horizontal_field(conn, np.linalg.solve(a, xi))(f.act(a))
    B0 = standard_horizontal_field(conn, xi)(f)
    np.testing.assert_allclose(Ba.xdot, B0.xdot, atol=1e-12)
    np.testing.assert_allclose(Ba.udot, B0.udot @ a, atol=1e-12)


def test_intrinsic_spray_examples(rng):
    xd, vd = intrinsic_spray(flat_connection(2), TangentState([0.0, 0.0], [1.0, 2.0]))
    assert np.array_equal(xd, [1.0, 2.0]) and np.array_equal(vd, [0.0, 0.0])
    _, conn = polar()
    s = TangentState([1.0, 0.0], [0.0, 1.0])
    np.testing.assert_allclose(intrinsic_spray(conn, s)[1], geodesic_spray(conn)(s)[1], atol=1e-10)
    a = intrinsic_spray(conn, s, random_frame(rng, 2))
    b = intrinsic_spray(conn, s, random_frame(rng, 2))
    np.testing.assert_allclose(np.concatenate(a), np.concatenate(b), atol=1e-10)


def test_pseudotensorial_fY(rng):
    Y = vector_field(lambda x: np.array([x[0], 1.0 - x[1]]))
    f = FrameState([0.4, 0.9], random_frame(rng, 2))
    a = random_frame(rng, 2)
    np.testing.assert_allclose(f_Y(Y, f.act(a)), np.linalg.solve(a, f_Y(Y, f)), atol=1e-12)


def test_symmetric_product_via_frames(scenario, rng):
    conn = scenario("heisenberg_kk").connection
    X = vector_field(lambda x: np.array([1.0 + x[1], x[0] * x[2], 0.5]))
    Y = vector_field(lambda x: np.array([x[2], 1.0, x[0] ** 2]))
    for x in rng.uniform(-1, 1, size=(10, 3)):
        f = FrameState(x, random_frame(rng, 3))
        np.testing.assert_allclose(sym_omega_theta(conn, X, Y, f), symmetric_product(conn, X, Y, x), atol=1e-5)


def test_transport_flat():
    ft = transport_frame(flat_connection(2), FrameState([0.0, 0.0], np.eye(2)), [1.0, 0.5], 1.0)
    np.testing.assert_allclose(ft.x[-1], [1.0, 0.5], atol=1e-12)
    assert np.all(ft.u == np.eye(2))


def test_transport_matches_geodesic_and_keeps_orthonormality():
    met, conn = polar()
    f0 = FrameState([1.0, 0.0], np.eye(2))
    ft = transport_frame(conn, f0, [0.0, 1.0], 1.0)
    geo = integrate(geodesic_spray(conn), TangentState([1.0, 0.0], [0.0, 1.0]), 1.0)
    assert np.max(np.abs(ft.x - geo.x)) < 1e-8
    g0 = orthonormal_frame(met, [1.0, 0.0])
    ft = transport_frame(conn, g0, [0.3, 0.8], 1.0)
    worst = max(np.max(np.abs(u.T @ met(x) @ u - np.eye(2))) for x, u in zip(ft.x, ft.u))
    assert worst < 1e-6


def test_frame_degeneration_detected():
    # with xi = e1 the second frame vector decays like exp(-10 t)
    g = np.zeros((2, 2, 2))
    g[1, 0, 1] = 10.0
    conn = Connection(lambda x: g, 2)
    with pytest.raises(FrameDegenerationError) as info:
        transport_frame(conn, FrameState([0.0, 0.0], np.eye(2)), [1.0, 0.0], 3.0, 1e-2)
    assert 2.0 < info.value.time < 2.2


def test_adapted_full_distribution():
    D = Distribution([constant_vector_field([1.0, 0.0]), constant_vector_field([0.0, 1.0])], 2)
    rep = adapted_frame_check(flat_connection(2), D, FrameState([0.0, 0.0], np.eye(2)), 1.0, [0.6, 0.8])
    assert rep.max_residual == 0.0


def test_adapted_heisenberg_vertical(scenario):
    scen = scenario("heisenberg_kk")
    D = scen.distributions["vertical"]
    f0 = adapted_frame(D, np.array([0.2, 0.5, 0.1]))
    rep = adapted_frame_check(scen.connection, D, f0, 1.0)
    assert rep.max_residual < 1e-6 and rep.verdict == "pass"


def test_adapted_flat_shear_fails():
    D = Distribution([vector_field(lambda x: np.array([1.0, x[0]]))], 2)
    f0 = adapted_frame(D, np.array([0.0, 0.0]))
    rep = adapted_frame_check(flat_connection(2), D, f0, 1.0)
    assert rep.max_residual > 1e-3 and rep.verdict == "fail"


def test_adapted_check_rejects_unadapted_frame():
    D = Distribution([constant_vector_field([1.0, 0.0])], 2)
    with pytest.raises(NotAdaptedError):
        adapted_frame_check(flat_connection(2), D, FrameState([0.0, 0.0], np.array([[0.0, 1.0], [1.0, 0.0]])), 1.0)
