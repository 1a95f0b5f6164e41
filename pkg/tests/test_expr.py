import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geored import kernels
from geored.errors import EvaluationError, ExpressionSyntaxError, UnknownIdentifierError
from geored.expr import BinOp, ExpressionArray, Neg, Num, Var, compile_node, parse_expression

V = ["x", "y", "z"]

# text, independent reference, sampling box (x, y, z positive where logs or roots need it)
TEMPLATES = [
    ("x + y * z", lambda x, y, z: x + y * z),
    ("(x + y) * z", lambda x, y, z: (x + y) * z),
    ("x - y - z", lambda x, y, z: (x - y) - z),
    ("x / y / z", lambda x, y, z: (x / y) / z),
    ("x ^ 2 ^ 0.5", lambda x, y, z: x ** (2 ** 0.5)),
    ("-x ^ 2", lambda x, y, z: (-x) ** 2),
    ("-(x ^ 2)", lambda x, y, z: -(x ** 2)),
    ("2 * -y", lambda x, y, z: 2 * (-y)),
    ("sin(x) * cos(y) + tan(z / 4)", lambda x, y, z: math.sin(x) * math.cos(y) + math.tan(z / 4)),
    ("exp(-x*x) + log(y)", lambda x, y, z: math.exp(-x * x) + math.log(y)),
    ("sqrt(x*x + y*y + z*z)", lambda x, y, z: math.sqrt(x * x + y * y + z * z)),
    ("atan2(y, x) + atan2(-z, 1)", lambda x, y, z: math.atan2(y, x) + math.atan2(-z, 1)),
    ("pi * x^2 / e", lambda x, y, z: math.pi * x ** 2 / math.e),
    ("1 + y^2", lambda x, y, z: 1 + y ** 2),
    ("(1 + y^2)^-1", lambda x, y, z: (1 + y ** 2) ** -1),
    ("x*y - z/(1 + x^2)", lambda x, y, z: x * y - z / (1 + x ** 2)),
    ("2.5e-1 * x + 1E1", lambda x, y, z: 0.25 * x + 10.0),
    ("--x + +y", lambda x, y, z: x + y),
    ("y ^ x", lambda x, y, z: y ** x),
    ("cos(sin(cos(x + y)))*z - 3", lambda x, y, z: math.cos(math.sin(math.cos(x + y))) * z - 3),
]


def _points():
    rng = np.random.default_rng(7)
    pts = np.column_stack([rng.uniform(0.2, 2.0, 10), rng.uniform(0.2, 2.0, 10), rng.uniform(-2.0, 2.0, 10)])
    return [tuple(map(float, p)) for p in pts]


GOLDEN = [(t, f, p) for t, f in TEMPLATES for p in _points()]


def test_golden_set_size():
    assert len(GOLDEN) == 200


@pytest.mark.parametrize("text,ref,point", GOLDEN)
def test_golden(text, ref, point):
    e = parse_expression(text, V)
    want = ref(*point)
    assert e(point) == pytest.approx(want, rel=1e-12, abs=1e-12)
    assert e.evaluate_tree(point) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_precedence_and_associativity():
    assert parse_expression("2^3^2")([]) == 512.0
    assert parse_expression("-2^2")([]) == 4.0
    assert parse_expression("8/4/2")([]) == 1.0
    assert parse_expression("2*3+4*5")([]) == 26.0
    e = parse_expression("x - y - z", V)
    assert e.ast == BinOp("-", BinOp("-", Var("x"), Var("y")), Var("z"))
    assert parse_expression("-x^2", V).ast == BinOp("^", Neg(Var("x")), Num(2.0))


def test_dict_and_vector_inputs():
    e = parse_expression("x*y + z", V)
    assert e({"x": 2, "y": 3, "z": 1}) == e([2, 3, 1]) == 7.0


@pytest.mark.parametrize("text", [t for t, _ in TEMPLATES])
def test_round_trip(text):
    e = parse_expression(text, V)
    again = parse_expression(e.to_text(), V)
    assert again.ast == e.ast
    assert again.to_text() == e.to_text()


@pytest.mark.parametrize(
    "text,exc,offset",
    [
        ("x + ", ExpressionSyntaxError, 4),
        ("(x + y", ExpressionSyntaxError, 6),
        ("x $ y", ExpressionSyntaxError, 2),
        ("x + w", UnknownIdentifierError, 4),
        ("foo(x)", UnknownIdentifierError, 0),
        ("sin(x, y)", ExpressionSyntaxError, None),
        ("x y", ExpressionSyntaxError, 2),
    ],
)
def test_syntax_errors(text, exc, offset):
    with pytest.raises(exc) as info:
        parse_expression(text, V)
    if offset is not None:
        assert info.value.offset == offset


def test_non_ascii_rejected_at_its_offset():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("x + θ", V)
    assert info.value.offset == 4
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("é", V)
    assert info.value.offset == 0


@pytest.mark.parametrize(
    "text,point,offset",
    [
        ("1 + log(x)", (0.0, 1.0, 1.0), 4),
        ("y + sqrt(x - 2)", (1.0, 1.0, 1.0), 4),
        ("z * (x / y)", (1.0, 0.0, 1.0), 7),
        ("exp(x)^y", (1000.0, 2.0, 0.0), 0),
        ("x ^ y", (-1.0, 0.5, 0.0), 2),
    ],
)
# binary-operator faults point at the operator, call faults at the function name
def test_evaluation_errors_are_located(text, point, offset):
    e = parse_expression(text, V)
    with pytest.raises(EvaluationError) as info:
        e(point)
    assert info.value.offset == offset
    with pytest.raises(EvaluationError):
        e.evaluate_tree(point)


def test_expression_array():
    arr = ExpressionArray(["x", "y*2", "1", "x*y"], ["x", "y"], shape=(2, 2))
    np.testing.assert_array_equal(arr([3.0, 4.0]), [[3.0, 8.0], [1.0, 12.0]])
    with pytest.raises(ValueError):
        ExpressionArray(["x"], ["x"], shape=(2,))
    bad = ExpressionArray(["x", "log(x - 5)"], ["x"])
    with pytest.raises(EvaluationError) as info:
        bad([1.0])
    assert info.value.offset == 0


@pytest.mark.parametrize("name,mod", sorted(kernels.available_backends().items()))
def test_vm_backends_agree(name, mod):
    for text, ref, point in GOLDEN[::7]:
        e = parse_expression(text, V)
        assert mod.eval_program(e.ops, e.args, np.array(point)) == pytest.approx(ref(*point), rel=1e-12, abs=1e-12)


_leaf = st.one_of(st.sampled_from(["x", "y", "pi"]), st.integers(0, 9).map(str))
_expr = st.recursive(
    _leaf,
    lambda sub: st.one_of(
        st.tuples(sub, st.sampled_from(["+", "-", "*"]), sub).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        sub.map(lambda s: f"-{s}"),
        sub.map(lambda s: f"sin({s})"),
        st.tuples(sub, sub).map(lambda t: f"atan2({t[0]}, {t[1]})"),
    ),
    max_leaves=12,
)


@settings(max_examples=150, deadline=None)
@given(_expr, st.floats(-3, 3), st.floats(-3, 3))
def test_vm_matches_tree_walker(text, x, y):
    e = parse_expression(text, ["x", "y"])
    assert e([x, y]) == pytest.approx(e.evaluate_tree([x, y]), rel=1e-12, abs=1e-12)
    assert parse_expression(e.to_text(), ["x", "y"]).ast == e.ast
    ops, args = compile_node(e.ast, {"x": 0, "y": 1})
    assert np.array_equal(ops, e.ops) and np.array_equal(args, e.args)
