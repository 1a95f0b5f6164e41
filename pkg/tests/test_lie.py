import numpy as np
import pytest

from geored.errors import InvariantError
from geored.lie import (
    MatrixLieGroup,
    PrincipalConnection,
    SymmetryScenario,
    curvature_lemma_sides,
    curvature_pairing,
    group_by_name,
    horizontal_lift,
    infinitesimal_generator,
    invariance_check,
    invariant_frame,
    invariant_vertical_field,
    principal_connection_check,
    so2,
    so3,
    split_state,
    translations,
    unsplit_state,
)
from geored.scenarios import load_scenario
from geored.spray import TangentState
from geored.tensor_calc import ChartDomain, Metric, fd_jacobian, levi_civita


@pytest.mark.parametrize("make", [so2, so3, lambda: translations(1), lambda: translations(3)])
def test_group_axioms(make):
    G = make()
    assert G.jacobi_residual() < 1e-12
    c = G.structure
    assert np.max(np.abs(c + c.transpose(0, 2, 1)), initial=0) < 1e-12


def test_so3_structure_constants_are_cross_product():
    G = so3()
    eps = np.zeros((3, 3, 3))
    for (i, j, k), s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
        eps[k, i, j] = s
    np.testing.assert_allclose(G.structure, eps, atol=1e-14)


def test_dependent_basis_rejected():
    E = np.array([[[0.0, 1.0], [0.0, 0.0]], [[0.0, 2.0], [0.0, 0.0]]])
    with pytest.raises(InvariantError):
        MatrixLieGroup(E, "bad")


def test_unknown_group():
    with pytest.raises(ValueError):
        group_by_name("SU7")


@pytest.mark.parametrize("make", [so2, so3, lambda: translations(2)])
def test_exp_log_round_trip(make, rng):
    G = make()
    for _ in range(10):
        q = rng.uniform(-1, 1, G.dim)
        np.testing.assert_allclose(G.from_matrix(G.to_matrix(q)), q, atol=1e-10)


@pytest.mark.parametrize("make", [so2, so3])
def test_trivialized_jacobians_against_fd(make, rng):
    G = make()
    q = rng.uniform(-1, 1, G.dim)
    g = G.to_matrix(q)
    D = fd_jacobian(G.to_matrix, q)  # D[:, :, b] = dg/dq^b
    left = np.column_stack([G.vee(np.linalg.solve(g, D[:, :, b])) for b in range(G.dim)])
    right = np.column_stack([G.vee(D[:, :, b] @ np.linalg.inv(g)) for b in range(G.dim)])
    np.testing.assert_allclose(G.left_jacobian(q), left, atol=1e-8)
    np.testing.assert_allclose(G.right_jacobian(q), right, atol=1e-8)


def test_Ad_matches_conjugation(rng):
    G = so3()
    g = G.exp(rng.normal(size=3))
    xi = rng.normal(size=3)
    np.testing.assert_allclose(G.hat(G.Ad(g) @ xi), g @ G.hat(xi) @ g.T, atol=1e-12)
    np.testing.assert_allclose(G.Ad(g) @ xi, g @ xi, atol=1e-12)  # SO(3): Ad_g = g


def heis():
    return load_scenario("heisenberg_kk").symmetry


def rigid():
    return load_scenario("rigid_body").symmetry


def polar():
    return load_scenario("polar_plane").symmetry


def test_generator_examples(rng):
    sym = heis()
    p = np.array([0.1, 0.2, 0.3])
    assert np.array_equal(infinitesimal_generator(sym, [0.0], p), np.zeros(3))
    np.testing.assert_allclose(infinitesimal_generator(sym, [1.0], p), [0, 0, 1.0])
    rb = rigid()
    p = np.array([0.3, -0.2, 0.5])
    a, b = rng.normal(size=3), rng.normal(size=3)
    np.testing.assert_allclose(infinitesimal_generator(rb, a + 2 * b, p),
                               infinitesimal_generator(rb, a, p) + 2 * infinitesimal_generator(rb, b, p), atol=1e-12)


def test_generator_is_derivative_of_action(rng):
    rb = rigid()
    p = np.array([0.3, -0.2, 0.5])
    xi = rng.normal(size=3)
    h = 1e-6
    fd = (rb.act(rb.group.exp(h * xi), p) - rb.act(rb.group.exp(-h * xi), p)) / (2 * h)
    np.testing.assert_allclose(infinitesimal_generator(rb, xi, p), fd, atol=1e-7)


def test_invariant_vertical_field_so3(rng):
    rb = rigid()
    V = invariant_vertical_field(rb, [1.0, 0.0, 0.0])
    np.testing.assert_allclose(V(np.zeros(3)), infinitesimal_generator(rb, [1.0, 0, 0], np.zeros(3)), atol=1e-14)
    q = np.array([0.4, -0.3, 0.2])
    # pushed to the matrix group the value is g E_1
    g = rb.group.to_matrix(q)
    h = 1e-6
    dg = (rb.group.to_matrix(q + h * V(q)) - rb.group.to_matrix(q - h * V(q))) / (2 * h)
    np.testing.assert_allclose(dg, g @ rb.group.basis[0], atol=1e-8)
    rep = invariance_check(rb, V, samples=10)
    assert rep.passed and rep.max_residual < 1e-10
    zero = invariant_vertical_field(rb, [0.0, 0.0, 0.0])
    assert np.array_equal(zero(q), np.zeros(3))


def test_invariant_vertical_field_abelian_is_constant():
    V = invariant_vertical_field(heis(), [2.5])
    assert np.array_equal(V(np.array([0.3, 1.0, -4.0])), [0.0, 0.0, 2.5])


def test_invariant_frame_matches_fields():
    sym = heis()
    p = np.array([0.3, 1.2, -0.4])
    E = invariant_frame(sym, p)
    np.testing.assert_allclose(E[:, 0], horizontal_lift(sym, [1.0, 0.0], p))
    np.testing.assert_allclose(E[:, 2], invariant_vertical_field(sym, [1.0])(p))


def test_horizontal_lift_heisenberg(rng):
    sym = heis()
    np.testing.assert_allclose(horizontal_lift(sym, [1.0, 0.0], [0.0, 2.0, 0.0]), [1.0, 0.0, 2.0], atol=1e-14)
    for _ in range(10):
        p = rng.uniform(-2, 2, 3)
        vb = rng.normal(size=2)
        w = horizontal_lift(sym, vb, p)
        assert np.array_equal(w[:2], vb)
        assert abs(sym.principal(p, w)[0]) < 1e-12


def test_horizontal_lift_flat_a():
    sym = polar()
    np.testing.assert_allclose(horizontal_lift(sym, [0.7], [1.2, 0.3]), [0.7, 0.0], atol=0)


def test_mechanical_connection_examples():
    np.testing.assert_allclose(polar().principal.a([1.5]), [[0.0]], atol=1e-14)
    np.testing.assert_allclose(heis().principal.a([0.3, 3.0]), [[-3.0, 0.0]], atol=1e-14)
    assert rigid().principal.a(np.zeros(0)).shape == (3, 0)
    assert load_scenario("product_control").symmetry.principal.a([0.4, 0.2]).shape == (1, 2)
    np.testing.assert_allclose(load_scenario("warped_product").symmetry.principal.a([0.4, 0.2]), 0.0, atol=0)


def test_mechanical_orthogonality(rng):
    sym = heis()
    for _ in range(20):
        p = rng.uniform(-2, 2, 3)
        h = horizontal_lift(sym, rng.normal(size=2), p)
        g = infinitesimal_generator(sym, rng.normal(size=1), p)
        assert abs(float(h @ sym.metric(p) @ g)) < 1e-8


@pytest.mark.parametrize("name", ["polar_plane", "heisenberg_kk", "rigid_body", "warped_product", "euclidean2"])
def test_principal_connection_axioms(name):
    rep = principal_connection_check(load_scenario(name).symmetry, samples=100)
    assert rep.passed


def test_invariance_examples():
    eu = load_scenario("euclidean2").symmetry
    rep = invariance_check(eu, eu.metric)
    assert rep.passed and rep.max_residual < 1e-12
    h = heis()
    assert invariance_check(h, h.metric).passed
    assert invariance_check(h, h.connection).passed


def test_negative_control_fails():
    with pytest.raises(InvariantError):
        load_scenario("heisenberg_y_control")
    ctl = load_scenario("heisenberg_y_control", strict=False).symmetry
    rep = invariance_check(ctl, ctl.metric)
    assert not rep.passed and rep.witnesses and rep.max_residual > 1e-2


def test_x_translation_is_a_symmetry():
    # the same metric with R acting on x: coefficients are x-independent
    from geored.scenarios import heisenberg_metric

    perm = [1, 2, 0]
    met = Metric(lambda p: heisenberg_metric(p[[2, 0, 1]])[np.ix_(perm, perm)], 3)
    sym = SymmetryScenario("x_shift", ChartDomain(2), translations(1), levi_civita(met), metric=met)
    assert invariance_check(sym, met).passed


def test_split_round_trip(rng):
    for sym in (heis(), rigid(), polar()):
        for _ in range(5):
            p = sym.sample_point(rng)
            v = rng.normal(size=sym.n)
            vb, eta = split_state(sym, TangentState(p, v))
            back = unsplit_state(sym, p[: sym.m], p[sym.m :], vb, eta)
            np.testing.assert_allclose(back.v, v, atol=1e-12)
            np.testing.assert_array_equal(back.x, p)


def test_split_special_cases(rng):
    sym = rigid()
    p = np.array([0.2, 0.1, -0.4])
    xi = rng.normal(size=3)
    vb, eta = split_state(sym, TangentState(p, infinitesimal_generator(sym, xi, p)))
    g = sym.group.to_matrix(p)
    assert vb.size == 0
    np.testing.assert_allclose(eta, sym.group.Ad(g.T) @ xi, atol=1e-12)
    h = heis()
    p = np.array([0.2, 0.5, 1.0])
    vb, eta = split_state(h, TangentState(p, horizontal_lift(h, [0.3, 0.4], p)))
    np.testing.assert_allclose(eta, 0.0, atol=1e-15)


def test_curvature_pairing(rng):
    sym = heis()
    p = np.array([0.3, 0.4, 0.5])
    B = curvature_pairing(sym, [1.0, 0.0], [0.0, 1.0], p)
    assert B[0] == pytest.approx(1.0, abs=1e-6)
    X, Y = rng.normal(size=2), rng.normal(size=2)
    np.testing.assert_allclose(curvature_pairing(sym, X, Y, p), -curvature_pairing(sym, Y, X, p), atol=1e-10)
    flat = SymmetryScenario("const_a", ChartDomain(2), translations(1), sym.connection, metric=sym.metric)
    flat = flat.with_principal(PrincipalConnection(flat.group, 2, lambda xb: np.array([[0.5, -2.0]]), "const"))
    assert abs(curvature_pairing(flat, X, Y, p)[0]) < 1e-9


def test_curvature_lemma(rng):
    sym = heis()
    for _ in range(50):
        p = rng.uniform(-2, 2, 3)
        lhs, rhs = curvature_lemma_sides(sym, rng.normal(size=2), rng.normal(size=2), rng.normal(size=1), p)
        assert abs(lhs - rhs) < 1e-5
