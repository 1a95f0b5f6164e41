import numpy as np
import pytest

from geored.errors import InvariantError
from geored.lie import split_state
from geored.reduction import (
    GATE_TOL,
    ReducedState,
    ReductionEngine,
    _frame_fields,
    assemble_reduced_field,
    component_table,
    integrate_reduced,
    reduce_state,
    verify_reduction,
)
from geored.scenarios import load_scenario
from geored.spray import TangentState, geodesic_spray


def sym(name):
    return load_scenario(name).symmetry


@pytest.fixture(scope="module")
def polar():
    return ReductionEngine(sym("polar_plane"))


@pytest.fixture(scope="module")
def heis():
    return ReductionEngine(sym("heisenberg_kk"))


@pytest.fixture(scope="module")
def rigid():
    return ReductionEngine(sym("rigid_body"))


def test_polar_components(polar):
    r = 2.0
    assert np.max(np.abs(polar.reduced_christoffel([r]))) < 1e-8
    np.testing.assert_allclose(polar.script_S([1.0], [r]), [-r], atol=1e-7)
    np.testing.assert_allclose(polar.script_S([3.0], [r]), [-9 * r], atol=1e-6)
    np.testing.assert_allclose(polar.mixed_term([0.7], [1.3], [r]), [0.0], atol=1e-8)
    np.testing.assert_allclose(polar.R_Z([0.7], [r]), [0.0], atol=1e-8)
    np.testing.assert_allclose(polar.U_Z([1.3], [r]), [0.0], atol=1e-8)
    np.testing.assert_allclose(polar.adjoint_connection_term([0.7], [1.3], [r]), [2 * 0.7 * 1.3 / r], atol=1e-7)


def test_polar_rates_reproduce_central_force_free_motion(polar):
    r, rd, th = 1.5, 0.4, 0.8
    vd, ed = polar.rates([r], [rd], [th])
    np.testing.assert_allclose(vd, [r * th ** 2], atol=1e-7)
    np.testing.assert_allclose(ed, [-2 * rd * th / r], atol=1e-7)


def test_heisenberg_components(heis, rng):
    for _ in range(5):
        xb = rng.uniform(-2, 2, 2)
        assert np.max(np.abs(heis.R_Z(rng.normal(size=2), xb))) < 1e-8
        assert np.max(np.abs(heis.script_S(rng.normal(size=1), xb))) < 1e-8
        assert np.max(np.abs(heis.U_Z(rng.normal(size=1), xb))) < 1e-8


def test_rigid_body_euler(rigid):
    np.testing.assert_allclose(rigid.U_Z([1.0, 1.0, 1.0], np.zeros(0)), [-1.0, 1.0, -1.0 / 3.0], atol=1e-8)
    I = np.diag([1.0, 2.0, 3.0])
    w = np.array([0.3, -1.1, 0.6])
    euler = np.linalg.solve(I, np.cross(I @ w, w))
    np.testing.assert_allclose(rigid.U_Z(w, np.zeros(0)), euler, atol=1e-8)
    vd, ed = rigid.rates(np.zeros(0), np.zeros(0), w)
    assert vd.size == 0
    np.testing.assert_allclose(ed, euler, atol=1e-8)


def test_rigid_body_parameterised():
    eng = ReductionEngine(sym("rigid_body:I=2,2,5"))
    w = np.array([1.0, 0.5, -0.2])
    I = np.diag([2.0, 2.0, 5.0])
    np.testing.assert_allclose(eng.U_Z(w, np.zeros(0)), np.linalg.solve(I, np.cross(I @ w, w)), atol=1e-8)


def test_quadratic_maps_bilinear_and_homogeneous(heis, rng):
    xb = rng.uniform(-1, 1, 2)
    a, b = rng.normal(size=2), rng.normal(size=2)
    e = rng.normal(size=1)
    np.testing.assert_allclose(heis.R_Z(2.5 * a, xb), 6.25 * heis.R_Z(a, xb), atol=1e-9)
    np.testing.assert_allclose(heis.mixed_term(a + b, e, xb), heis.mixed_term(a, e, xb) + heis.mixed_term(b, e, xb),
                               atol=1e-9)
    np.testing.assert_allclose(heis.adjoint_connection_term(a, 3 * e, xb), 3 * heis.adjoint_connection_term(a, e, xb),
                               atol=1e-9)


@pytest.mark.parametrize("name", ["polar_plane", "heisenberg_kk", "rigid_body", "warped_product", "product_control"])
def test_fiber_independence(name, rng):
    eng = ReductionEngine(sym(name))
    assert eng.fiber_independence(rng, samples=3) < 1e-8


def test_tables_with_explicit_fields_match(rng):
    s = sym("heisenberg_kk")
    xb = rng.uniform(-1, 1, 2)
    q = rng.uniform(-1, 1, 1)
    fast = component_table(s, xb, q)
    slow = component_table(s, xb, q, fields=_frame_fields(s))
    np.testing.assert_allclose(fast.base, slow.base, atol=1e-12)
    np.testing.assert_allclose(fast.fiber, slow.fiber, atol=1e-12)


def test_S_Z_is_spray_of_reduced_connection(heis, rng):
    Zr = geodesic_spray(heis.reduced_connection())
    for _ in range(5):
        xb, vb = rng.uniform(-1, 1, 2), rng.normal(size=2)
        pos, acc = heis.S_Z(xb, vb)
        zx, zv = Zr(TangentState(xb, vb))
        np.testing.assert_allclose(pos, zx)
        np.testing.assert_allclose(acc, zv, atol=1e-8)


def test_eta_zero_reduces_to_S_Z(heis, rng):
    xb, vb = rng.uniform(-1, 1, 2), rng.normal(size=2)
    vd, ed = heis.rates(xb, vb, [0.0])
    np.testing.assert_allclose(vd, heis.S_Z(xb, vb)[1], atol=1e-8)
    np.testing.assert_allclose(ed, heis.R_Z(vb, xb), atol=1e-8)


def test_rates_match_projected_full_spray(rng):
    s = sym("warped_product")
    eng = ReductionEngine(s)
    Z = geodesic_spray(s.connection)
    for _ in range(3):
        p = s.sample_point(rng)
        v = rng.normal(size=s.n)
        st = TangentState(p, v)
        _, acc = Z(st)
        h = 1e-5
        plus = reduce_state(s, TangentState(p + h * v, v + h * acc))
        minus = reduce_state(s, TangentState(p - h * v, v - h * acc))
        vb, eta = split_state(s, st)
        vd, ed = eng.rates(p[: s.m], vb, eta)
        np.testing.assert_allclose(vd, (plus.vbar - minus.vbar) / (2 * h), atol=1e-6)
        np.testing.assert_allclose(ed, (plus.eta - minus.eta) / (2 * h), atol=1e-6)


@pytest.mark.parametrize("name", ["polar_plane", "heisenberg_kk", "rigid_body"])
def test_gate(name):
    scen = load_scenario(name)
    rep, red = verify_reduction(scen.symmetry, scen.initial, 1.0)
    assert rep.passed, rep.to_dict()
    assert rep.max_base_dev < GATE_TOL and rep.max_eta_dev < GATE_TOL
    assert red.t[-1] == pytest.approx(1.0)


def test_polar_radius_after_unit_time():
    s = sym("polar_plane")
    red = integrate_reduced(assemble_reduced_field(s), ReducedState([1.0], [0.0], [1.0]), 1.0)
    assert red.xbar[-1, 0] == pytest.approx(np.sqrt(2.0), abs=1e-8)
    # angular momentum r^2 eta is conserved
    np.testing.assert_allclose(red.xbar[:, 0] ** 2 * red.eta[:, 0], 1.0, atol=1e-9)


def test_reduced_state_validation():
    with pytest.raises(InvariantError):
        ReducedState([np.nan], [0.0], [1.0])
    with pytest.raises(ValueError):
        ReducedState([1.0, 2.0], [0.0], [1.0])
    s = ReducedState([1.0], [2.0], [3.0, 4.0])
    assert ReducedState.from_flat(s.flat(), 1).eta.tolist() == [3.0, 4.0]
