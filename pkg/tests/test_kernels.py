import numpy as np
import pytest

from geored import kernels
from geored.errors import ExpressionSyntaxError
from geored.expr import ExpressionArray, parse_expression

BACKENDS = kernels.available_backends()
PY = BACKENDS["python"]


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS
    assert BACKENDS[kernels.BACKEND].BACKEND == kernels.BACKEND


needs_c = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


@needs_c
def test_christoffel_equivalence(rng):
    C = BACKENDS["cython"]
    for n in (1, 2, 4):
        A = rng.normal(size=(n, n))
        ginv = A @ A.T + n * np.eye(n)
        dg = rng.normal(size=(n, n, n))
        dg = dg + dg.transpose(0, 2, 1)
        np.testing.assert_allclose(C.christoffel_from_metric(ginv, dg), PY.christoffel_from_metric(ginv, dg),
                                   rtol=1e-13, atol=1e-13)


@needs_c
def test_quad_contract_and_table_equivalence(rng):
    C = BACKENDS["cython"]
    n, N = 3, 4
    g = rng.normal(size=(n, n, n))
    v, w = rng.normal(size=n), rng.normal(size=n)
    np.testing.assert_allclose(C.quad_contract(g, v, w), PY.quad_contract(g, v, w), rtol=1e-13, atol=1e-13)
    rect = rng.normal(size=(2, 3, 4))
    a, b = rng.normal(size=3), rng.normal(size=4)
    np.testing.assert_allclose(C.quad_contract(rect, a, b), PY.quad_contract(rect, a, b), rtol=1e-13, atol=1e-13)
    E = rng.normal(size=(n, N))
    DE = rng.normal(size=(n, N, n))
    np.testing.assert_allclose(C.connection_table(E, DE, g), PY.connection_table(E, DE, g), rtol=1e-12, atol=1e-12)


@needs_c
def test_rk4_equivalence():
    C = BACKENDS["cython"]

    def f(y):
        return np.array([y[1], -y[0]])

    a = C.rk4_integrate(f, [1.0, 0.0], 0.01, 157)
    b = PY.rk4_integrate(f, [1.0, 0.0], 0.01, 157)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-14)
    with np.errstate(over="ignore", invalid="ignore"):
        for mod in (C, PY):
            with pytest.raises(FloatingPointError):
                mod.rk4_integrate(lambda y: y * y, [1.0], 0.5, 20)


@needs_c
def test_vm_equivalence(rng):
    C = BACKENDS["cython"]
    texts = ["x*y - sin(z)", "atan2(x, y)^2", "log(x) + sqrt(y)", "-x^3 / (1 + z^2)", "exp(tan(z/3))", "x/0"]
    arr = ExpressionArray(texts, ["x", "y", "z"])
    for _ in range(20):
        x = np.array([rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(-2, 2)])
        a = C.eval_programs(arr.ops, arr.args, arr.offsets, x)
        b = PY.eval_programs(arr.ops, arr.args, arr.offsets, x)
        np.testing.assert_allclose(a[:-1], b[:-1], rtol=1e-14)
        assert np.isnan(a[-1]) and np.isnan(b[-1])
    for t in ("log(-x)", "sqrt(-x)", "(-x)^0.5"):
        e = parse_expression(t, ["x"])
        assert np.isnan(C.eval_program(e.ops, e.args, [1.0])) and np.isnan(PY.eval_program(e.ops, e.args, [1.0]))


def test_stack_depth_guard():
    deep = "x" + "+(x" * 300 + ")" * 300
    with pytest.raises(ExpressionSyntaxError):
        parse_expression(deep, ["x"])
    ok = "x" + "+(x" * 100 + ")" * 100
    assert parse_expression(ok, ["x"])([1.0]) == 101.0


@needs_c
def test_reduced_rates_backend_independent(monkeypatch, rng):
    from geored.reduction import ReductionEngine
    from geored.scenarios import load_scenario

    s = load_scenario("heisenberg_kk").symmetry  # m = 2, r = 1: rectangular mixed blocks
    xb, vb, eta = rng.uniform(-1, 1, 2), rng.normal(size=2), rng.normal(size=1)
    out = {}
    for name, mod in BACKENDS.items():
        for fn in ("quad_contract", "connection_table"):
            monkeypatch.setattr(kernels, fn, getattr(mod, fn))
        out[name] = np.concatenate(ReductionEngine(s, cache=False).rates(xb, vb, eta))
    np.testing.assert_allclose(out["cython"], out["python"], atol=1e-12)
