"""Expression DSL for sections F(xi, conj(xi)).

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ['^' ['-'] INT]
    atom   := 'xi' | 'i' | NUMBER | 'conj' '(' expr ')' | 'exp' '(' expr ')'
            | '(' expr ')'

``^`` binds tighter than unary minus, so ``-xi^2`` is ``-(xi^2)``.
Number literals are decimals with an optional ``i`` suffix; ``2+3i`` is an
``Add`` of two constants.  ``conj`` is the only non-holomorphic node.

The AST is built from frozen dataclasses and is safe to share between
threads.  Evaluation is vectorised: pass a numpy array for ``xi``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DivisionByZero, ExprSyntaxError, UnknownIdentifier
from .jets import Jet1


class Node:
    __slots__ = ()

    # operator sugar for building ASTs in code
    def __add__(self, other):
        return Add(self, _lift(other))

    def __radd__(self, other):
        return Add(_lift(other), self)

    def __sub__(self, other):
        return Sub(self, _lift(other))

    def __rsub__(self, other):
        return Sub(_lift(other), self)

    def __mul__(self, other):
        return Mul(self, _lift(other))

    def __rmul__(self, other):
        return Mul(_lift(other), self)

    def __truediv__(self, other):
        return Div(self, _lift(other))

    def __rtruediv__(self, other):
        return Div(_lift(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n):
        return IntPow(self, int(n))


@dataclass(frozen=True, eq=True)
class Var(Node):
    pass


@dataclass(frozen=True)
class Const(Node):
    value: complex


@dataclass(frozen=True)
class Conj(Node):
    child: Node


@dataclass(frozen=True)
class Neg(Node):
    child: Node


@dataclass(frozen=True)
class Exp(Node):
    child: Node


@dataclass(frozen=True)
class IntPow(Node):
    child: Node
    n: int


@dataclass(frozen=True)
class Add(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Sub(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Mul(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Div(Node):
    left: Node
    right: Node
    node_id: Union[int, str, None] = field(default=None, compare=False)


XI = Var()


def _lift(x) -> Node:
    if isinstance(x, Node):
        return x
    return Const(complex(x))


def conj(e) -> Node:
    return Conj(_lift(e))


def exp(e) -> Node:
    return Exp(_lift(e))


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

_KNOWN = {"xi", "i", "conj", "exp"}


def _tokenize(text):
    """Tokens ``(kind, text, byte_offset)``, ending with an EOF token."""

    def at(pos):
        return len(text[:pos].encode("utf-8"))

    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", at(pos),
                                  {"NUMBER", "NAME", "operator"})
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            if kind == "name" and val not in _KNOWN:
                raise UnknownIdentifier(val, at(pos))
            if kind == "op":
                kind = val
            elif kind == "name":
                kind = val
            toks.append((kind, val, at(pos)))
        pos = m.end()
    toks.append(("EOF", "", at(len(text))))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self, kind, expected=None):
        k, v, pos = self.tok
        if k != kind:
            raise ExprSyntaxError(f"unexpected {v or 'end of input'!r}", pos,
                                  expected or {kind})
        self.i += 1
        return v, pos

    def parse(self):
        node = self.expr()
        k, v, pos = self.tok
        if k != "EOF":
            raise ExprSyntaxError(f"unexpected {v!r}", pos, {"+", "-", "*", "/", "^", "EOF"})
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] in ("+", "-"):
            op = self.tok[0]
            self.i += 1
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.tok[0] in ("*", "/"):
            op, _, pos = self.tok
            self.i += 1
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs, node_id=pos)
        return node

    def factor(self):
        if self.tok[0] == "-":
            self.i += 1
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok[0] != "^":
            return base
        self.i += 1
        sign = 1
        if self.tok[0] == "-":
            sign = -1
            self.i += 1
        k, v, pos = self.tok
        if k != "num" or not v.isdigit():
            raise ExprSyntaxError("exponent must be an integer literal", pos, {"INT"})
        self.i += 1
        return IntPow(base, sign * int(v))

    _ATOM_START = {"xi", "i", "NUMBER", "conj", "exp", "("}

    def atom(self):
        k, v, pos = self.tok
        if k == "xi":
            self.i += 1
            return Var()
        if k == "i":
            self.i += 1
            return Const(1j)
        if k == "num":
            self.i += 1
            if v.endswith("i"):
                return Const(complex(0.0, float(v[:-1])))
            return Const(complex(float(v)))
        if k in ("conj", "exp"):
            self.i += 1
            self.take("(")
            inner = self.expr()
            self.take(")", {")", "+", "-", "*", "/", "^"})
            return Conj(inner) if k == "conj" else Exp(inner)
        if k == "(":
            self.i += 1
            inner = self.expr()
            self.take(")", {")", "+", "-", "*", "/", "^"})
            return inner
        raise ExprSyntaxError(f"unexpected {v or 'end of input'!r}", pos, self._ATOM_START)


def parse_expr(text: str) -> Node:
    """Parse ``text`` into an AST.

    Raises
    ------
    ExprSyntaxError
        With the byte offset of the offending token and the expected set.
    UnknownIdentifier
        For any name other than ``xi``, ``i``, ``conj``, ``exp``.
    """
    return _Parser(text).parse()


def to_text(e: Node) -> str:
    """Render an AST back to parseable text (fully parenthesised)."""
    if isinstance(e, Var):
        return "xi"
    if isinstance(e, Const):
        z = complex(e.value)
        return f"({z.real!r}+{z.imag!r}i)" if z.imag >= 0 else f"({z.real!r}-{-z.imag!r}i)"
    if isinstance(e, Conj):
        return f"conj({to_text(e.child)})"
    if isinstance(e, Exp):
        return f"exp({to_text(e.child)})"
    if isinstance(e, Neg):
        return f"(-{to_text(e.child)})"
    if isinstance(e, IntPow):
        return f"({to_text(e.child)})^{e.n}" if e.n >= 0 else f"({to_text(e.child)})^-{-e.n}"
    ops = {Add: "+", Sub: "-", Mul: "*", Div: "/"}
    return f"({to_text(e.left)}{ops[type(e)]}{to_text(e.right)})"


def has_conj(e: Node) -> bool:
    if isinstance(e, Conj):
        return True
    if isinstance(e, (Var, Const)):
        return False
    if isinstance(e, (Neg, Exp, IntPow)):
        return has_conj(e.child)
    return has_conj(e.left) or has_conj(e.right)


def substitute(e: Node, repl: Node) -> Node:
    """Replace every ``Var`` in ``e`` by ``repl`` (function composition)."""
    if isinstance(e, Var):
        return repl
    if isinstance(e, Const):
        return e
    if isinstance(e, IntPow):
        return IntPow(substitute(e.child, repl), e.n)
    if isinstance(e, (Conj, Neg, Exp)):
        return type(e)(substitute(e.child, repl))
    if isinstance(e, Div):
        return Div(substitute(e.left, repl), substitute(e.right, repl), e.node_id)
    return type(e)(substitute(e.left, repl), substitute(e.right, repl))


# ---------------------------------------------------------------------------
# evaluation

def _eval(e: Node, seed: Jet1, path: str, memo: dict) -> Jet1:
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    out = _eval_node(e, seed, path, memo)
    memo[key] = (e, out)  # keep e alive so id() stays unique
    return out


def _eval_node(e: Node, seed: Jet1, path: str, memo: dict) -> Jet1:
    if isinstance(e, Var):
        return seed
    if isinstance(e, Const):
        return Jet1.constant(complex(e.value))
    if isinstance(e, Conj):
        return _eval(e.child, seed, path + ".0", memo).conj()
    if isinstance(e, Neg):
        return -_eval(e.child, seed, path + ".0", memo)
    if isinstance(e, Exp):
        return _eval(e.child, seed, path + ".0", memo).exp()
    if isinstance(e, IntPow):
        base = _eval(e.child, seed, path + ".0", memo)
        try:
            return base ** e.n
        except ZeroDivisionError:
            raise DivisionByZero(path) from None
    a = _eval(e.left, seed, path + ".0", memo)
    b = _eval(e.right, seed, path + ".1", memo)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    if isinstance(e, Div):
        try:
            return a / b
        except ZeroDivisionError:
            raise DivisionByZero(e.node_id if e.node_id is not None else path) from None
    raise TypeError(f"not an expression node: {e!r}")


def eval_jet(expr: Node, xi, seed: Jet1 | None = None) -> Jet1:
    """Evaluate ``expr`` and its Wirtinger derivatives at ``xi``.

    By default the variable is seeded as the identity (``d=1, dbar=0``).  A
    different ``seed`` jet composes ``expr`` with a reparametrisation
    ``nu -> xi(nu, conj(nu))``; ``xi`` is then ignored.
    """
    if seed is None:
        seed = Jet1.variable(xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _eval(expr, seed, "0", {})


def evaluate(expr: Node, xi):
    return eval_jet(expr, xi).value


def finite_diff_residual(expr: Node, xi: complex, h: float) -> float:
    """Max deviation of the jet derivatives from central differences.

    ``d = (f_u - i f_v)/2`` and ``dbar = (f_u + i f_v)/2`` with ``f_u``,
    ``f_v`` taken by central differences of step ``h`` in the real and
    imaginary directions.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    xi = complex(xi)
    jet = eval_jet(expr, xi)
    fu = (evaluate(expr, xi + h) - evaluate(expr, xi - h)) / (2 * h)
    fv = (evaluate(expr, xi + 1j * h) - evaluate(expr, xi - 1j * h)) / (2 * h)
    d = 0.5 * (fu - 1j * fv)
    dbar = 0.5 * (fu + 1j * fv)
    return float(max(abs(jet.d - d), abs(jet.dbar - dbar)))
