"""Nonlinearity expressions f(x1, x2): parsing and evaluation.

Grammar (standard precedence, ^ binds tighter than unary minus):

    expr    := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | 'x1' | 'x2' | 'pi' | 'e'
             | NAME '(' expr (',' expr)* ')'
             | '(' expr ')'

Builtins: exp, cos, sin, ln, abs, phi, psi, capphi (unary); min, max (binary).
phi, psi and capphi are the saturating piecewise-linear ramps with
breakpoints at 1/2 and 1; negative arguments are clamped to 0 (operators
only ever feed nonnegative functions, but quadrature round-off may produce
-eps).

Evaluation comes in three flavours sharing one tree walk where possible:
pointwise (floats), vectorised (numpy arrays, used by the solver and the
grid oracle) and interval (rigorous range enclosure).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .interval import E, PI, Interval


class ParseError(Exception):
    """Malformed expression text."""

    def __init__(self, offset: int, message: str, expected: str | None = None):
        self.offset = offset
        self.message = message
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"at position {offset}: {message}{hint}")


class EvalError(Exception):
    """Evaluation failure, attributed to a node's source offset."""

    def __init__(self, offset: int, message: str):
        self.offset = offset
        self.message = message
        super().__init__(f"at position {offset}: {message}")


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class NamedConst:
    name: str  # "pi" | "e"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str  # "x1" | "x2"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" | "-" | "*" | "/" | "^"
    left: "ExprAst"
    right: "ExprAst"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["ExprAst", ...]
    offset: int = field(default=0, compare=False)


ExprAst = Const | NamedConst | Var | Neg | BinOp | Call

BUILTIN_ARITY = {
    "exp": 1,
    "cos": 1,
    "sin": 1,
    "ln": 1,
    "abs": 1,
    "phi": 1,
    "psi": 1,
    "capphi": 1,
    "min": 2,
    "max": 2,
}

NAMED_CONSTS = {"pi": (math.pi, PI), "e": (math.e, E)}


# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            bad = len(src) - len(stripped)
            raise ParseError(bad, f"unexpected character {src[bad]!r}")
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ParseError(off, f"got {text!r}" if text else "unexpected end of input",
                             expected=repr(op))
        return self.advance()

    def parse(self) -> ExprAst:
        node = self.sum()
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError(off, f"unexpected trailing input {text!r}")
        return node

    def sum(self) -> ExprAst:
        node = self.product()
        while True:
            kind, text, off = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.product(), offset=off)
            else:
                return node

    def product(self) -> ExprAst:
        node = self.unary()
        while True:
            kind, text, off = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.unary(), offset=off)
            else:
                return node

    def unary(self) -> ExprAst:
        kind, text, off = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary(), offset=off)
        return self.power()

    def power(self) -> ExprAst:
        node = self.atom()
        kind, text, off = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            node = BinOp("^", node, self.unary(), offset=off)
        return node

    def atom(self) -> ExprAst:
        kind, text, off = self.advance()
        if kind == "num":
            return Const(float(text), offset=off)
        if kind == "name":
            if text in ("x1", "x2"):
                return Var(text, offset=off)
            if text in NAMED_CONSTS:
                return NamedConst(text, offset=off)
            if text in BUILTIN_ARITY:
                self.expect_op("(")
                args = [self.sum()]
                while True:
                    k, t, o = self.peek()
                    if k == "op" and t == ",":
                        self.advance()
                        args.append(self.sum())
                    else:
                        break
                self.expect_op(")")
                arity = BUILTIN_ARITY[text]
                if len(args) != arity:
                    raise ParseError(
                        off, f"{text} takes {arity} argument(s), got {len(args)}")
                return Call(text, tuple(args), offset=off)
            raise ParseError(off, f"unknown identifier {text!r}",
                             expected="x1, x2, pi, e or a builtin")
        if kind == "op" and text == "(":
            node = self.sum()
            self.expect_op(")")
            return node
        raise ParseError(off, f"got {text!r}" if text else "unexpected end of input",
                         expected="a number, variable or '('")


def parse_expr(src: str) -> ExprAst:
    """Parse expression text into an AST; raises ParseError with a position."""
    return _Parser(src).parse()


# ---------------------------------------------------------------------------
# unparsing (precedence-aware; unparse(parse(s)) reparses to an equal tree)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(node: ExprAst) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return _PREC["atom"]


def unparse(node: ExprAst) -> str:
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, NamedConst):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = unparse(node.operand)
        if _prec(node.operand) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Call):
        return f"{node.fn}({', '.join(unparse(a) for a in node.args)})"
    p = _PREC[node.op]
    left = unparse(node.left)
    right = unparse(node.right)
    if node.op == "^":
        # right-associative
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < p:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}"


# ---------------------------------------------------------------------------
# piecewise builtins (paper-style saturating ramps), pointwise/vectorised

def _phi_values(z):
    z = np.maximum(z, 0.0)
    return np.where(z <= 0.5, 0.0, np.where(z <= 1.0, 2.0 * z - 1.0, 1.0))


def _psi_values(z):
    return np.minimum(np.maximum(z, 0.0), 1.0)


def _capphi_values(z):
    z = np.maximum(z, 0.0)
    return np.where(z <= 0.5, 1.0, np.where(z <= 1.0, 2.0 - 2.0 * z, 0.0))


def _eval_values(node: ExprAst, x1, x2):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, NamedConst):
        return NAMED_CONSTS[node.name][0]
    if isinstance(node, Var):
        return x1 if node.name == "x1" else x2
    if isinstance(node, Neg):
        return -_eval_values(node.operand, x1, x2)
    if isinstance(node, BinOp):
        a = _eval_values(node.left, x1, x2)
        b = _eval_values(node.right, x1, x2)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if np.any(np.asarray(b) == 0.0):
                raise EvalError(node.offset, "division by zero")
            return a / b
        # '^'
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            out = np.power(np.asarray(a, dtype=float), b)
        if not np.all(np.isfinite(out)):
            raise EvalError(node.offset, "power produced a non-finite value")
        return out
    a = _eval_values(node.args[0], x1, x2)
    fn = node.fn
    if fn == "exp":
        with np.errstate(over="ignore"):
            out = np.exp(a)
        if not np.all(np.isfinite(out)):
            raise EvalError(node.offset, "exp overflow")
        return out
    if fn == "cos":
        return np.cos(a)
    if fn == "sin":
        return np.sin(a)
    if fn == "ln":
        if np.any(np.asarray(a) <= 0.0):
            raise EvalError(node.offset, "ln of a nonpositive value")
        return np.log(a)
    if fn == "abs":
        return np.abs(a)
    if fn == "phi":
        return _phi_values(a)
    if fn == "psi":
        return _psi_values(a)
    if fn == "capphi":
        return _capphi_values(a)
    b = _eval_values(node.args[1], x1, x2)
    if fn == "min":
        return np.minimum(a, b)
    return np.maximum(a, b)


def eval_point(e: ExprAst, x1: float, x2: float) -> float:
    """Evaluate at a point in plain float arithmetic."""
    return float(_eval_values(e, np.float64(x1), np.float64(x2)))


def eval_values(e: ExprAst, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Vectorised evaluation over numpy arrays (broadcasting applies)."""
    out = _eval_values(e, np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    return np.broadcast_to(np.asarray(out, dtype=float),
                           np.broadcast_shapes(np.shape(x1), np.shape(x2))).copy()


# ---------------------------------------------------------------------------
# interval evaluation

def _clamp01(iv: Interval) -> Interval:
    return Interval(min(max(iv.lo, 0.0), 1.0), min(max(iv.hi, 0.0), 1.0))


def _pieces(z: Interval):
    """Clamp to z >= 0 and intersect with the three breakpoint pieces."""
    z = Interval(max(z.lo, 0.0), max(z.hi, 0.0))
    out = []
    if z.lo <= 0.5:
        out.append(("low", Interval(z.lo, min(z.hi, 0.5))))
    if z.hi >= 0.5 and z.lo <= 1.0:
        out.append(("mid", Interval(max(z.lo, 0.5), min(z.hi, 1.0))))
    if z.hi > 1.0:
        out.append(("high", Interval(max(z.lo, 1.0), z.hi)))
    return out


def _hull_all(parts: list[Interval]) -> Interval:
    acc = parts[0]
    for p in parts[1:]:
        acc = acc.hull(p)
    return acc


def _phi_interval(z: Interval) -> Interval:
    parts = []
    for tag, piece in _pieces(z):
        if tag == "low":
            parts.append(Interval(0.0, 0.0))
        elif tag == "mid":
            # increasing ramp; 2t is exact and 2t - 1 is exact by Sterbenz
            # for t in [1/2, 1], so no outward step is needed
            parts.append(_clamp01(Interval(2.0 * piece.lo - 1.0,
                                           2.0 * piece.hi - 1.0)))
        else:
            parts.append(Interval(1.0, 1.0))
    return _hull_all(parts)


def _psi_interval(z: Interval) -> Interval:
    z = Interval(max(z.lo, 0.0), max(z.hi, 0.0))
    return Interval(min(z.lo, 1.0), min(z.hi, 1.0))


def _capphi_interval(z: Interval) -> Interval:
    parts = []
    for tag, piece in _pieces(z):
        if tag == "low":
            parts.append(Interval(1.0, 1.0))
        elif tag == "mid":
            # decreasing ramp; exact for t in [1/2, 1] as in _phi_interval
            parts.append(_clamp01(Interval(2.0 - 2.0 * piece.hi,
                                           2.0 - 2.0 * piece.lo)))
        else:
            parts.append(Interval(0.0, 0.0))
    return _hull_all(parts)


def eval_interval(e: ExprAst, x1: Interval, x2: Interval) -> Interval:
    """Rigorous enclosure of the pointwise range of e over the box x1 x x2."""
    if isinstance(e, Const):
        return Interval.point(e.value)
    if isinstance(e, NamedConst):
        return NAMED_CONSTS[e.name][1]
    if isinstance(e, Var):
        return x1 if e.name == "x1" else x2
    if isinstance(e, Neg):
        return -eval_interval(e.operand, x1, x2)
    if isinstance(e, BinOp):
        a = eval_interval(e.left, x1, x2)
        if e.op == "^":
            if not isinstance(e.right, Const) or e.right.value != int(e.right.value) \
                    or e.right.value < 0:
                raise EvalError(e.offset,
                                "interval mode requires a constant natural exponent")
            return a.pow_nat(int(e.right.value))
        b = eval_interval(e.right, x1, x2)
        try:
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            return a / b
        except DomainError as err:
            raise EvalError(e.offset, str(err)) from err
    a = eval_interval(e.args[0], x1, x2)
    fn = e.fn
    try:
        if fn == "exp":
            return a.exp()
        if fn == "cos":
            return a.cos()
        if fn == "sin":
            return a.sin()
        if fn == "ln":
            return a.log()
        if fn == "abs":
            return a.abs()
        if fn == "phi":
            return _phi_interval(a)
        if fn == "psi":
            return _psi_interval(a)
        if fn == "capphi":
            return _capphi_interval(a)
    except DomainError as err:
        raise EvalError(e.offset, str(err)) from err
    b = eval_interval(e.args[1], x1, x2)
    if fn == "min":
        return a.min_with(b)
    return a.max_with(b)
