"""Observables on the circle: parsed expressions and builtin families.

An observable carries certified bounds next to its evaluation rule: a
Lipschitz bound and a sup bound.  Builtin families (cosine, constant) get
exact bounds; parsed expressions get sampled bounds on a 2^16 midpoint
grid, inflated by 5 percent.  Sampling runs on midpoints so expressions
with isolated grid-point singularities (1/x) still construct; evaluation
at a singular point raises DomainError.

Expression grammar:

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ['-'] atom ['^' integer]
    atom   := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
    func   := 'cos' | 'sin' | 'exp' | 'abs'

Pretty-printing and parsing are exact inverses on syntax trees.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .circle import as_float, wrap01
from .errors import DomainError, NotSmooth, ParseError

SAMPLE_GRID = 1 << 16
BOUND_INFLATION = 1.05
PERIODICITY_TOL = 1e-9


# ---------------------------------------------------------------------------
# syntax trees


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Num, Var, Pi, Call, Neg, Pow, BinOp]

_FUNCS = {"cos": np.cos, "sin": np.sin, "exp": np.exp, "abs": np.abs}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+[eE][+-]?\d+|\d+)"
    r"|(?P<name>[A-Za-z_]+)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over the grammar above."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val or 'end of input'!r}", pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = BinOp(val, node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = BinOp(val, node, self.factor())
            else:
                return node

    def factor(self) -> Node:
        kind, val, _ = self.peek()
        negged = kind == "op" and val == "-"
        if negged:
            self.advance()
        node = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            kind, val, pos = self.advance()
            if kind != "num" or not val.isdigit():
                raise ParseError(f"expected integer exponent, found {val!r}", pos)
            node = Pow(node, int(val))
        return Neg(node) if negged else node

    def atom(self) -> Node:
        kind, val, pos = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "x":
                return Var()
            if val == "pi":
                return Pi()
            if val in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            raise ParseError(f"unknown name {val!r}", pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"expected a value, found {val or 'end of input'!r}", pos)


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return 1 if node.op in "+-" else 2
    return 3


def to_text(node: Node) -> str:
    """Render a tree; parse(to_text(t)) == t."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Call):
        return f"{node.fn}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        if _prec(node.arg) < 3 or isinstance(node.arg, Neg):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = to_text(node.base)
        if _prec(node.base) < 3 or isinstance(node.base, (Neg, Pow)):
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, BinOp):
        left = to_text(node.left)
        if _prec(node.left) < _prec(node):
            left = f"({left})"
        right = to_text(node.right)
        if _prec(node.right) <= _prec(node):
            right = f"({right})"
        return f"{left}{node.op}{right}"
    raise TypeError(f"not a syntax node: {node!r}")


def _eval_tree(node: Node, x: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full_like(x, node.value)
    if isinstance(node, Var):
        return x.copy()
    if isinstance(node, Pi):
        return np.full_like(x, math.pi)
    if isinstance(node, Call):
        return _FUNCS[node.fn](_eval_tree(node.arg, x))
    if isinstance(node, Neg):
        return -_eval_tree(node.arg, x)
    if isinstance(node, Pow):
        return _eval_tree(node.base, x) ** node.exponent
    if isinstance(node, BinOp):
        a = _eval_tree(node.left, x)
        b = _eval_tree(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        with np.errstate(divide="ignore", invalid="ignore"):
            out = a / b
        if not np.all(np.isfinite(out)):
            raise DomainError("division by zero in observable")
        return out
    raise TypeError(f"not a syntax node: {node!r}")


def _contains_abs(node: Node) -> bool:
    if isinstance(node, Call):
        return node.fn == "abs" or _contains_abs(node.arg)
    if isinstance(node, Neg):
        return _contains_abs(node.arg)
    if isinstance(node, Pow):
        return _contains_abs(node.base)
    if isinstance(node, BinOp):
        return _contains_abs(node.left) or _contains_abs(node.right)
    return False


# ---------------------------------------------------------------------------
# observables


class Observable:
    """Evaluation rule plus certified sup/Lipschitz bounds."""

    def __init__(self, kind: str, *, tree: Node = None, theta: float = 0.0,
                 c: float = 0.0, text: str = "", lip_bound: float = 0.0,
                 sup_bound: float = 0.0, periodic_warning: bool = False):
        self.kind = kind
        self.tree = tree
        self.theta = theta
        self.c = c
        self.text = text
        self.lip_bound = lip_bound
        self.sup_bound = sup_bound
        self.periodic_warning = periodic_warning

    @classmethod
    def cosine(cls, theta: float = 0.0) -> "Observable":
        """f(x) = cos(2*pi*(x - theta)), exact bounds."""
        return cls("cosine", theta=float(theta),
                   text=f"cos(2*pi*(x-{float(theta)!r}))",
                   lip_bound=2.0 * math.pi, sup_bound=1.0)

    @classmethod
    def constant(cls, c: float) -> "Observable":
        return cls("const", c=float(c), text=repr(float(c)),
                   lip_bound=0.0, sup_bound=abs(float(c)))

    def values(self, xs) -> np.ndarray:
        """Evaluate at x mod 1, vectorized."""
        x = wrap01(np.asarray(xs, dtype=float))
        if self.kind == "cosine":
            return np.cos(2.0 * math.pi * (x - self.theta))
        if self.kind == "const":
            return np.full_like(x, self.c)
        return _eval_tree(self.tree, x)

    def value(self, x) -> float:
        return float(self.values(np.array([as_float(x)]))[0])

    def __repr__(self):
        return f"Observable({self.text!r})"


def parse_observable(text: str) -> Observable:
    """Parse an expression and attach sampled bounds.

    Bounds are sampled on a 2^16 midpoint grid and inflated by 5 percent;
    the Lipschitz figure uses central differences with wraparound.  If the
    raw expression differs at 0 and 1 by more than 1e-9 (or cannot be
    evaluated there), the observable is flagged as non-periodic; its
    wrapped version is still usable but has a seam.
    """
    tree = _Parser(text).parse()
    n = SAMPLE_GRID
    xs = (np.arange(n) + 0.5) / n
    vals = _eval_tree(tree, xs)
    sup = float(np.max(np.abs(vals))) * BOUND_INFLATION
    deriv = (np.roll(vals, -1) - np.roll(vals, 1)) * (n / 2.0)
    lip = float(np.max(np.abs(deriv))) * BOUND_INFLATION
    try:
        ends = _eval_tree(tree, np.array([0.0, 1.0]))
        warn = bool(abs(ends[0] - ends[1]) > PERIODICITY_TOL)
    except DomainError:
        warn = True
    return Observable("expr", tree=tree, text=to_text(tree),
                      lip_bound=lip, sup_bound=sup, periodic_warning=warn)


def evaluate_obs(obs, x) -> float:
    """Evaluate an observable at a single point (mod 1)."""
    return obs.value(x)


@dataclass
class SmoothnessReport:
    """Sampled sup-norms of derivatives 1..r.

    Only the order-1 entry is Lipschitz-grade data; higher orders are
    finite-difference estimates and are not certified.
    """

    values: list
    certified: list

    def note(self) -> str:
        return "orders >= 2 are estimates only, not certified"


def smoothness_report(obs, r: int) -> SmoothnessReport:
    """Estimate sup|f^(j)| for j = 1..r by iterated central differences."""
    if r < 1:
        raise ValueError("need r >= 1")
    if getattr(obs, "tree", None) is not None and _contains_abs(obs.tree):
        raise NotSmooth(
            "expression contains abs; only the Lipschitz bound "
            f"{obs.lip_bound!r} is available", obs.lip_bound)
    n = SAMPLE_GRID
    xs = (np.arange(n) + 0.5) / n
    vals = obs.values(xs)
    out, certified = [], []
    d = vals
    for order in range(1, r + 1):
        d = (np.roll(d, -1) - np.roll(d, 1)) * (n / 2.0)
        out.append(float(np.max(np.abs(d))))
        certified.append(order == 1)
    return SmoothnessReport(out, certified)


class FunctionObservable:
    """Observable built from a vectorized callable, with supplied bounds.

    Used for composite constructions (effective observables minus bump
    penalties and the like) where the bounds come from the parts.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], text: str,
                 lip_bound: float, sup_bound: float):
        self.fn = fn
        self.text = text
        self.lip_bound = lip_bound
        self.sup_bound = sup_bound
        self.periodic_warning = False

    def values(self, xs) -> np.ndarray:
        return self.fn(wrap01(np.asarray(xs, dtype=float)))

    def value(self, x) -> float:
        return float(self.values(np.array([as_float(x)]))[0])

    def __repr__(self):
        return f"FunctionObservable({self.text!r})"
