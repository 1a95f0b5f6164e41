"""Arithmetic expressions over named coordinates.

Grammar (Pratt parser, binding powers in parentheses)::

    expr    := prefix (infix)*
    infix   := '+' | '-' (10)   '*' | '/' (20)   '^' (30, right-assoc)
    prefix  := number | name | name '(' args ')' | '(' expr ')' | '-' prefix | '+' prefix

A leading minus applies to the following operand before ``^`` does, so
``-2^2`` is ``(-2)^2``. Parsed trees compile to a postfix program that runs
on the kernel stack machine.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from ._pykernels import (
    OP_ADD, OP_ATAN2, OP_CONST, OP_COS, OP_DIV, OP_EXP, OP_LOG, OP_MUL, OP_NEG,
    OP_POW, OP_SIN, OP_SQRT, OP_SUB, OP_TAN, OP_VAR,
)
from .errors import EvaluationError, ExpressionSyntaxError, UnknownIdentifierError

FUNCTIONS = {"sin": 1, "cos": 1, "tan": 1, "exp": 1, "log": 1, "sqrt": 1, "atan2": 2}
CONSTANTS = {"pi": math.pi, "e": math.e}
_FN_OPS = {"sin": OP_SIN, "cos": OP_COS, "tan": OP_TAN, "exp": OP_EXP, "log": OP_LOG,
           "sqrt": OP_SQRT, "atan2": OP_ATAN2}
_BIN_OPS = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV, "^": OP_POW}
_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_PREFIX_BP = 40


# --- AST -----------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    offset: int = 0

    def __eq__(self, other):
        return isinstance(other, Num) and self.value == other.value

    def __hash__(self):
        return hash(("num", self.value))


@dataclass(frozen=True)
class Const:
    name: str
    offset: int = 0

    def __eq__(self, other):
        return isinstance(other, Const) and self.name == other.name

    def __hash__(self):
        return hash(("const", self.name))


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = 0

    def __eq__(self, other):
        return isinstance(other, Var) and self.name == other.name

    def __hash__(self):
        return hash(("var", self.name))


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    offset: int = 0

    def __eq__(self, other):
        return isinstance(other, Neg) and self.operand == other.operand

    def __hash__(self):
        return hash(("neg", self.operand))


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    offset: int = 0

    def __eq__(self, other):
        return (isinstance(other, BinOp) and self.op == other.op
                and self.left == other.left and self.right == other.right)

    def __hash__(self):
        return hash(("bin", self.op, self.left, self.right))


@dataclass(frozen=True)
class Call:
    fn: str
    args: Tuple["Node", ...]
    offset: int = 0

    def __eq__(self, other):
        return isinstance(other, Call) and self.fn == other.fn and self.args == other.args

    def __hash__(self):
        return hash(("call", self.fn, self.args))


Node = Union[Num, Const, Var, Neg, BinOp, Call]


# --- lexer ---------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, end
    text: str
    offset: int  # byte offset into the UTF-8 source


def _byte_offset(text: str, char_index: int) -> int:
    return len(text[:char_index].encode("utf-8"))


def tokenize(text: str) -> List[Token]:
    out = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(Token(kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    out.append(Token("end", "", len(text.encode("utf-8"))))
    return out


# --- parser --------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, variables: Optional[Sequence[str]]):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.variables = None if variables is None else set(variables)

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.advance()
        if tok.text != text or tok.kind == "end":
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ExpressionSyntaxError(f"expected {text!r}, found {found}", tok.offset, self.text)
        return tok

    def parse(self) -> Node:
        node = self.expr(0)
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.offset, self.text)
        return node

    def expr(self, rbp: int) -> Node:
        left = self.prefix()
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in _BP:
                break
            bp = _BP[tok.text]
            if bp <= rbp:
                break
            self.advance()
            # '^' is right associative: parse its right side one notch looser
            right = self.expr(bp - 1 if tok.text == "^" else bp)
            left = BinOp(tok.text, left, right, tok.offset)
        return left

    def prefix(self) -> Node:
        tok = self.advance()
        if tok.kind == "num":
            return Num(float(tok.text), tok.offset)
        if tok.kind == "name":
            if self.peek().text == "(" and self.peek().kind == "op":
                return self.call(tok)
            if tok.text in FUNCTIONS:
                raise ExpressionSyntaxError(f"function {tok.text!r} needs arguments", tok.offset, self.text)
            if tok.text in CONSTANTS and (self.variables is None or tok.text not in self.variables):
                return Const(tok.text, tok.offset)
            if self.variables is not None and tok.text not in self.variables:
                raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.offset, self.text)
            return Var(tok.text, tok.offset)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr(0)
            self.expect(")")
            return node
        if tok.kind == "op" and tok.text in "+-":
            operand = self.prefix_operand()
            return Neg(operand, tok.offset) if tok.text == "-" else operand
        if tok.kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", tok.offset, self.text)
        raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.offset, self.text)

    def prefix_operand(self) -> Node:
        # the operand of a sign is a single prefix item, so -2^2 == (-2)^2
        return self.prefix()

    def call(self, name_tok: Token) -> Node:
        name = name_tok.text
        if name not in FUNCTIONS:
            raise UnknownIdentifierError(f"unknown function {name!r}", name_tok.offset, self.text)
        self.expect("(")
        args = [self.expr(0)]
        while self.peek().text == "," and self.peek().kind == "op":
            self.advance()
            args.append(self.expr(0))
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ExpressionSyntaxError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", name_tok.offset, self.text)
        return Call(name, tuple(args), name_tok.offset)


def parse_expression(text: str, variables: Optional[Sequence[str]] = None) -> "Expression":
    """Parse ``text``; with ``variables`` given, other identifiers are errors."""
    if not isinstance(text, str):
        raise ExpressionSyntaxError("expression must be a string", 0, str(text))
    ast = _Parser(text, variables).parse()
    return Expression(text, ast, list(variables) if variables is not None else sorted(free_variables(ast)))


# --- printing ------------------------------------------------------------------

def _fmt_num(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def to_text(node: Node) -> str:
    """Print a tree so that parsing the text gives the same tree back."""
    return _print(node, 0)


def _print(node: Node, ctx: int) -> str:
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}(" + ", ".join(_print(a, 0) for a in node.args) + ")"
    if isinstance(node, Neg):
        return "-" + _print(node.operand, _PREFIX_BP)
    if isinstance(node, BinOp):
        bp = _BP[node.op]
        if node.op == "^":
            s = f"{_print(node.left, bp)}^{_print(node.right, bp - 1)}"
        else:
            s = f"{_print(node.left, bp - 1)} {node.op} {_print(node.right, bp)}"
        return f"({s})" if bp <= ctx else s
    raise TypeError(node)


def free_variables(node: Node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        out = set()
        for a in node.args:
            out |= free_variables(a)
        return out
    return set()


# --- compilation and evaluation --------------------------------------------------

def compile_node(node: Node, index: Dict[str, int]):
    ops: List[int] = []
    args: List[float] = []
    depth = [0, 0]

    def emit(op, arg=0.0, delta=0):
        ops.append(op)
        args.append(arg)
        depth[0] += delta
        depth[1] = max(depth[1], depth[0])

    def walk(nd):
        if isinstance(nd, Num):
            emit(OP_CONST, nd.value, 1)
        elif isinstance(nd, Const):
            emit(OP_CONST, CONSTANTS[nd.name], 1)
        elif isinstance(nd, Var):
            emit(OP_VAR, float(index[nd.name]), 1)
        elif isinstance(nd, Neg):
            walk(nd.operand)
            emit(OP_NEG)
        elif isinstance(nd, BinOp):
            walk(nd.left)
            walk(nd.right)
            emit(_BIN_OPS[nd.op], 0.0, -1)
        elif isinstance(nd, Call):
            for a in nd.args:
                walk(a)
            emit(_FN_OPS[nd.fn], 0.0, 1 - len(nd.args))
        else:
            raise TypeError(nd)

    walk(node)
    if depth[1] > kernels.MAX_STACK:
        raise ExpressionSyntaxError(f"expression too deeply nested (stack {depth[1]})", 0)
    return np.array(ops, dtype=np.int64), np.array(args, dtype=float)


def _walk_eval(node: Node, env: Dict[str, float], text: str) -> float:
    """Reference evaluator; raises at the innermost faulting node."""

    def fail(msg, nd):
        raise EvaluationError(msg, nd.offset, text)

    def ev(nd):
        if isinstance(nd, Num):
            return nd.value
        if isinstance(nd, Const):
            return CONSTANTS[nd.name]
        if isinstance(nd, Var):
            return float(env[nd.name])
        if isinstance(nd, Neg):
            return -ev(nd.operand)
        if isinstance(nd, BinOp):
            a = ev(nd.left)
            b = ev(nd.right)
            if nd.op == "+":
                r = a + b
            elif nd.op == "-":
                r = a - b
            elif nd.op == "*":
                r = a * b
            elif nd.op == "/":
                if b == 0.0:
                    fail("division by zero", nd)
                r = a / b
            else:
                try:
                    r = math.pow(a, b)
                except (ValueError, OverflowError):
                    fail(f"power {a!r}^{b!r} undefined", nd)
            if not math.isfinite(r):
                fail(f"non-finite result of {nd.op!r}", nd)
            return r
        if isinstance(nd, Call):
            vals = [ev(a) for a in nd.args]
            if nd.fn == "log" and vals[0] <= 0.0:
                fail(f"log of non-positive value {vals[0]!r}", nd)
            if nd.fn == "sqrt" and vals[0] < 0.0:
                fail(f"sqrt of negative value {vals[0]!r}", nd)
            try:
                r = getattr(math, nd.fn)(*vals)
            except (ValueError, OverflowError):
                fail(f"{nd.fn} undefined at {vals}", nd)
            if not math.isfinite(r):
                fail(f"non-finite result of {nd.fn}", nd)
            return r
        raise TypeError(nd)

    return ev(node)


class Expression:
    """A parsed expression bound to an ordered list of variable names."""

    def __init__(self, text: str, ast: Node, variables: Sequence[str]):
        self.text = text
        self.ast = ast
        self.variables = list(variables)
        self._index = {name: i for i, name in enumerate(self.variables)}
        missing = free_variables(ast) - set(self._index)
        if missing:
            name = sorted(missing)[0]
            raise UnknownIdentifierError(f"unknown identifier {name!r}", _find_var(ast, name), text)
        self.ops, self.args = compile_node(ast, self._index)

    def __repr__(self):
        return f"Expression({self.text!r})"

    def to_text(self) -> str:
        return to_text(self.ast)

    def _vector(self, point) -> np.ndarray:
        if isinstance(point, dict):
            return np.array([float(point[name]) for name in self.variables])
        return np.asarray(point, dtype=float).ravel()

    def __call__(self, point) -> float:
        x = self._vector(point)
        val = kernels.eval_program(self.ops, self.args, x)
        if not math.isfinite(val):
            _walk_eval(self.ast, dict(zip(self.variables, x.tolist())), self.text)
            raise EvaluationError("non-finite result", 0, self.text)
        return val

    def evaluate_tree(self, point) -> float:
        x = self._vector(point)
        return _walk_eval(self.ast, dict(zip(self.variables, x.tolist())), self.text)


def _find_var(node: Node, name: str) -> int:
    if isinstance(node, Var) and node.name == name:
        return node.offset
    for child in _children(node):
        off = _find_var(child, name)
        if off >= 0:
            return off
    return -1


def _children(node: Node):
    if isinstance(node, Neg):
        return (node.operand,)
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, Call):
        return node.args
    return ()


class ExpressionArray:
    """Several expressions over the same variables, evaluated in one kernel call."""

    def __init__(self, texts: Sequence[str], variables: Sequence[str], shape=None):
        self.exprs = [parse_expression(str(t), variables) for t in texts]
        self.variables = list(variables)
        self.shape = tuple(shape) if shape is not None else (len(self.exprs),)
        if int(np.prod(self.shape)) != len(self.exprs):
            raise ValueError("shape does not match the number of expressions")
        offsets = [0]
        for e in self.exprs:
            offsets.append(offsets[-1] + e.ops.size)
        self.offsets = np.array(offsets, dtype=np.int64)
        if self.exprs:
            self.ops = np.concatenate([e.ops for e in self.exprs])
            self.args = np.concatenate([e.args for e in self.exprs])
        else:
            self.ops = np.zeros(0, dtype=np.int64)
            self.args = np.zeros(0)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        out = kernels.eval_programs(self.ops, self.args, self.offsets, x)
        if not np.all(np.isfinite(out)):
            bad = int(np.nonzero(~np.isfinite(out))[0][0])
            self.exprs[bad](x)  # raises a located error
        return out.reshape(self.shape)
