"""Expression trees for objectives mixing semialgebraic operations with
univariate transcendental functions.

An :class:`Expr` is an immutable tree. Leaves are constants and variables;
interior nodes are the semialgebraic operations (+, -, *, /, integer powers,
sqrt, abs, min, max) and the univariate transcendental functions (atan, asin,
acos, exp, log, sin, cos). Trees can be evaluated, differentiated
symbolically, printed to and parsed from a prefix (s-expression) source
format, and classified as semialgebraic or not.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

# Node kinds. Transcendental kinds carry their own entry in _TRANSC_FUNCS.
CONST = "const"
VAR = "var"
ADD = "add"
SUB = "sub"
MUL = "mul"
DIV = "div"
POW = "pow"
SQRT = "sqrt"
ABS = "abs"
MIN = "min"
MAX = "max"

ATAN = "atan"
ASIN = "asin"
ACOS = "acos"
EXP = "exp"
LOG = "log"
SIN = "sin"
COS = "cos"

TRANSC_KINDS = frozenset({ATAN, ASIN, ACOS, EXP, LOG, SIN, COS})
POLY_KINDS = frozenset({CONST, VAR, ADD, SUB, MUL, POW})
SEMIALGEBRAIC_KINDS = POLY_KINDS | {DIV, SQRT, ABS, MIN, MAX}

_TRANSC_FUNCS: dict[str, Callable[[float], float]] = {
    ATAN: math.atan,
    ASIN: math.asin,
    ACOS: math.acos,
    EXP: math.exp,
    LOG: math.log,
    SIN: math.sin,
    COS: math.cos,
}

_TRANSC_NUMPY: dict[str, Callable] = {
    ATAN: np.arctan,
    ASIN: np.arcsin,
    ACOS: np.arccos,
    EXP: np.exp,
    LOG: np.log,
    SIN: np.sin,
    COS: np.cos,
}

# Tolerance for clamping arguments that sit on a domain boundary (sqrt of a
# tiny negative, asin of 1 + ulp).  Beyond it, evaluation raises DomainError.
DOMAIN_EPS = 1e-12


class ExprError(Exception):
    """Base class for expression-layer failures."""


class DomainError(ExprError):
    """Evaluation left the natural domain of some node.

    ``path`` is the list of child indices from the root to the offending
    node, so callers can report exactly which subtree failed.
    """

    def __init__(self, message: str, path: tuple[int, ...] = ()):
        super().__init__(message)
        self.path = path

    def __str__(self) -> str:
        base = super().__str__()
        if self.path:
            return f"{base} (node path {'/'.join(map(str, self.path))})"
        return base


class NonDifferentiableError(ExprError):
    """Symbolic differentiation hit an abs/min/max node."""


class ParseError(ExprError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class Expr:
    """Immutable expression node with structural equality and hashing.

    Structural identity matters downstream: the semialgebraic lifting
    deduplicates shared subtrees by hashing, so two independently built
    copies of the same expression map to the same lifting variable.
    """

    __slots__ = ("kind", "children", "value", "index", "exponent", "_hash")

    def __init__(self, kind, children=(), value=None, index=None, exponent=None):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "children", tuple(children))
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "exponent", exponent)
        object.__setattr__(
            self,
            "_hash",
            hash((kind, value, index, exponent, tuple(c._hash for c in self.children))),
        )

    def __setattr__(self, name, val):  # pragma: no cover - guard
        raise AttributeError("Expr is immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        if self._hash != other._hash or self.kind != other.kind:
            return False
        return (
            self.value == other.value
            and self.index == other.index
            and self.exponent == other.exponent
            and self.children == other.children
        )

    def __repr__(self) -> str:
        return f"Expr({to_source(self)})"

    # Operator sugar for building trees in code (corpus, tests).
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, p):
        return pow_(self, p)

    def __neg__(self):
        return neg(self)

    def subtrees(self) -> Iterator["Expr"]:
        """Yield every node of the tree, parents after children."""
        for c in self.children:
            yield from c.subtrees()
        yield self


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return const(float(x))


def const(c: float) -> Expr:
    return Expr(CONST, value=float(c))


def var(i: int) -> Expr:
    if i < 0:
        raise ValueError("variable index must be nonnegative")
    return Expr(VAR, index=i)


# Smart constructors: constant folding plus neutral-element elimination.
# Needed to keep symbolic derivatives from ballooning with 0*... terms.
def add(a: Expr, b: Expr) -> Expr:
    if a.kind == CONST and b.kind == CONST:
        return const(a.value + b.value)
    if a.kind == CONST and a.value == 0.0:
        return b
    if b.kind == CONST and b.value == 0.0:
        return a
    return Expr(ADD, (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if a.kind == CONST and b.kind == CONST:
        return const(a.value - b.value)
    if b.kind == CONST and b.value == 0.0:
        return a
    return Expr(SUB, (a, b))


def neg(a: Expr) -> Expr:
    if a.kind == CONST:
        return const(-a.value)
    return Expr(SUB, (const(0.0), a))


def mul(a: Expr, b: Expr) -> Expr:
    if a.kind == CONST and b.kind == CONST:
        return const(a.value * b.value)
    if a.kind == CONST:
        if a.value == 0.0:
            return const(0.0)
        if a.value == 1.0:
            return b
    if b.kind == CONST:
        if b.value == 0.0:
            return const(0.0)
        if b.value == 1.0:
            return a
    return Expr(MUL, (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if b.kind == CONST and b.value == 1.0:
        return a
    if a.kind == CONST and a.value == 0.0 and b.kind != CONST:
        return const(0.0)
    if a.kind == CONST and b.kind == CONST and b.value != 0.0:
        return const(a.value / b.value)
    return Expr(DIV, (a, b))


def pow_(a: Expr, p: int) -> Expr:
    p = int(p)
    if p < 1:
        raise ValueError("pow exponent must be a positive integer")
    if p == 1:
        return a
    if a.kind == CONST:
        return const(a.value**p)
    return Expr(POW, (a,), exponent=p)


def sqrt(a: Expr) -> Expr:
    return Expr(SQRT, (a,))


def abs_(a: Expr) -> Expr:
    return Expr(ABS, (a,))


def min_(a: Expr, b: Expr) -> Expr:
    return Expr(MIN, (a, b))


def max_(a: Expr, b: Expr) -> Expr:
    return Expr(MAX, (a, b))


def unary(kind: str, a: Expr) -> Expr:
    if kind not in TRANSC_KINDS:
        raise ValueError(f"unknown transcendental kind {kind!r}")
    return Expr(kind, (a,))


def atan(a: Expr) -> Expr:
    return Expr(ATAN, (a,))


def exp(a: Expr) -> Expr:
    return Expr(EXP, (a,))


def log(a: Expr) -> Expr:
    return Expr(LOG, (a,))


def sin(a: Expr) -> Expr:
    return Expr(SIN, (a,))


def cos(a: Expr) -> Expr:
    return Expr(COS, (a,))


def asin(a: Expr) -> Expr:
    return Expr(ASIN, (a,))


def acos(a: Expr) -> Expr:
    return Expr(ACOS, (a,))


def is_semialgebraic(e: Expr) -> bool:
    """True iff no transcendental node occurs in the tree."""
    if e.kind in TRANSC_KINDS:
        return False
    return all(is_semialgebraic(c) for c in e.children)


def is_polynomial(e: Expr) -> bool:
    """True iff the tree uses only constants, variables, +, -, *, pow."""
    if e.kind not in POLY_KINDS:
        return False
    return all(is_polynomial(c) for c in e.children)


def max_var_index(e: Expr) -> int:
    """Largest variable index in the tree, -1 if none."""
    best = e.index if e.kind == VAR else -1
    for c in e.children:
        best = max(best, max_var_index(c))
    return best


def substitute(e: Expr, bindings: dict[int, Expr]) -> Expr:
    """Replace variables by expressions (used to pin trailing variables)."""
    if e.kind == VAR:
        return bindings.get(e.index, e)
    if not e.children:
        return e
    return Expr(
        e.kind,
        tuple(substitute(c, bindings) for c in e.children),
        value=e.value,
        index=e.index,
        exponent=e.exponent,
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def evaluate(e: Expr, x) -> float:
    """Evaluate the tree at a point under round-to-nearest doubles.

    Raises DomainError (with the node path) on division by zero, sqrt/log of
    a negative argument, or asin/acos outside [-1, 1].
    """
    path: list[int] = []

    def rec(t: Expr) -> float:
        k = t.kind
        if k == CONST:
            return t.value
        if k == VAR:
            return float(x[t.index])
        ch = t.children
        if k == ADD:
            path.append(0)
            a = rec(ch[0])
            path[-1] = 1
            b = rec(ch[1])
            path.pop()
            return a + b
        if k == SUB:
            path.append(0)
            a = rec(ch[0])
            path[-1] = 1
            b = rec(ch[1])
            path.pop()
            return a - b
        if k == MUL:
            path.append(0)
            a = rec(ch[0])
            path[-1] = 1
            b = rec(ch[1])
            path.pop()
            return a * b
        if k == DIV:
            path.append(0)
            a = rec(ch[0])
            path[-1] = 1
            b = rec(ch[1])
            path.pop()
            if b == 0.0:
                raise DomainError("division by zero", tuple(path))
            return a / b
        if k == POW:
            path.append(0)
            a = rec(ch[0])
            path.pop()
            return a**t.exponent
        if k == SQRT:
            path.append(0)
            a = rec(ch[0])
            path.pop()
            if a < 0.0:
                if a < -DOMAIN_EPS:
                    raise DomainError(f"sqrt of negative value {a}", tuple(path))
                a = 0.0
            return math.sqrt(a)
        if k == ABS:
            path.append(0)
            a = rec(ch[0])
            path.pop()
            return abs(a)
        if k == MIN:
            path.append(0)
            a = rec(ch[0])
            path[-1] = 1
            b = rec(ch[1])
            path.pop()
            return min(a, b)
        if k == MAX:
            path.append(0)
            a = rec(ch[0])
            path[-1] = 1
            b = rec(ch[1])
            path.pop()
            return max(a, b)
        # transcendental
        path.append(0)
        a = rec(ch[0])
        path.pop()
        if k in (ASIN, ACOS):
            if abs(a) > 1.0:
                if abs(a) > 1.0 + DOMAIN_EPS:
                    raise DomainError(f"{k} argument {a} outside [-1, 1]", tuple(path))
                a = math.copysign(1.0, a)
        elif k == LOG and a <= 0.0:
            raise DomainError(f"log of nonpositive value {a}", tuple(path))
        return _TRANSC_FUNCS[k](a)

    return rec(e)


def evaluate_many(e: Expr, xs: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over rows of ``xs`` (shape (N, n)).

    Domain violations yield NaN instead of raising; grid oracles filter
    those out. Matches scalar `evaluate` bit-for-bit on valid points for
    +,-,*,/ chains (numpy double ops are the same IEEE operations).
    """
    xs = np.asarray(xs, dtype=float)
    n_points = xs.shape[0]

    def rec(t: Expr) -> np.ndarray:
        k = t.kind
        if k == CONST:
            return np.full(n_points, t.value)
        if k == VAR:
            return xs[:, t.index].copy()
        ch = [rec(c) for c in t.children]
        with np.errstate(divide="ignore", invalid="ignore"):
            if k == ADD:
                return ch[0] + ch[1]
            if k == SUB:
                return ch[0] - ch[1]
            if k == MUL:
                return ch[0] * ch[1]
            if k == DIV:
                out = ch[0] / ch[1]
                out[ch[1] == 0.0] = np.nan
                return out
            if k == POW:
                return ch[0] ** t.exponent
            if k == SQRT:
                a = ch[0]
                a = np.where((a < 0.0) & (a >= -DOMAIN_EPS), 0.0, a)
                return np.sqrt(a)
            if k == ABS:
                return np.abs(ch[0])
            if k == MIN:
                return np.minimum(ch[0], ch[1])
            if k == MAX:
                return np.maximum(ch[0], ch[1])
            a = ch[0]
            if k in (ASIN, ACOS):
                a = np.clip(a, -1.0, 1.0) + np.where(np.abs(a) <= 1.0 + DOMAIN_EPS, 0.0, np.nan)
            elif k == LOG:
                a = np.where(a > 0.0, a, np.nan)
            return _TRANSC_NUMPY[k](a)

    return rec(e)


# ---------------------------------------------------------------------------
# Symbolic differentiation
# ---------------------------------------------------------------------------

_ONE = const(1.0)
_TWO = const(2.0)


def differentiate(e: Expr, i: int) -> Expr:
    """Symbolic partial derivative with respect to variable ``i``.

    abs/min/max are rejected: the subdivision stage needs genuine Hessians
    and the target inequalities are smooth.
    """
    cache: dict[Expr, Expr] = {}

    def rec(t: Expr) -> Expr:
        got = cache.get(t)
        if got is not None:
            return got
        k = t.kind
        if k == CONST:
            r = const(0.0)
        elif k == VAR:
            r = _ONE if t.index == i else const(0.0)
        elif k == ADD:
            r = add(rec(t.children[0]), rec(t.children[1]))
        elif k == SUB:
            r = sub(rec(t.children[0]), rec(t.children[1]))
        elif k == MUL:
            a, b = t.children
            r = add(mul(rec(a), b), mul(a, rec(b)))
        elif k == DIV:
            a, b = t.children
            r = div(sub(mul(rec(a), b), mul(a, rec(b))), pow_(b, 2))
        elif k == POW:
            (a,) = t.children
            p = t.exponent
            r = mul(mul(const(float(p)), pow_(a, p - 1) if p > 1 else _ONE), rec(a))
        elif k == SQRT:
            (a,) = t.children
            r = div(rec(a), mul(_TWO, sqrt(a)))
        elif k in (ABS, MIN, MAX):
            raise NonDifferentiableError(f"cannot differentiate through {k}")
        elif k == ATAN:
            (a,) = t.children
            r = div(rec(a), add(_ONE, pow_(a, 2)))
        elif k == ASIN:
            (a,) = t.children
            r = div(rec(a), sqrt(sub(_ONE, pow_(a, 2))))
        elif k == ACOS:
            (a,) = t.children
            r = neg(div(rec(a), sqrt(sub(_ONE, pow_(a, 2)))))
        elif k == EXP:
            (a,) = t.children
            r = mul(rec(a), t)
        elif k == LOG:
            (a,) = t.children
            r = div(rec(a), a)
        elif k == SIN:
            (a,) = t.children
            r = mul(rec(a), cos(a))
        elif k == COS:
            (a,) = t.children
            r = neg(mul(rec(a), sin(a)))
        else:  # pragma: no cover
            raise ExprError(f"unknown node kind {k!r}")
        cache[t] = r
        return r

    return rec(e)


def gradient(e: Expr, n: int) -> list[Expr]:
    return [differentiate(e, i) for i in range(n)]


def hessian(e: Expr, n: int) -> list[list[Expr]]:
    """Symmetric matrix of second-derivative trees."""
    grads = gradient(e, n)
    rows = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            d2 = differentiate(grads[i], j)
            rows[i][j] = d2
            rows[j][i] = d2
    return rows


# ---------------------------------------------------------------------------
# Source format
# ---------------------------------------------------------------------------

_OP_NAMES = {
    ADD: "+",
    SUB: "-",
    MUL: "*",
    DIV: "/",
    POW: "pow",
    SQRT: "sqrt",
    ABS: "abs",
    MIN: "min",
    MAX: "max",
    ATAN: "atan",
    ASIN: "asin",
    ACOS: "acos",
    EXP: "exp",
    LOG: "log",
    SIN: "sin",
    COS: "cos",
}

_NAME_OPS = {v: k for k, v in _OP_NAMES.items()}

_BINARY = {ADD, SUB, MUL, DIV, MIN, MAX}
_UNARY = {SQRT, ABS} | TRANSC_KINDS


def to_source(e: Expr) -> str:
    """Prefix-form source of the tree; parse(to_source(e)) == e."""
    k = e.kind
    if k == CONST:
        return repr(e.value)
    if k == VAR:
        return f"x{e.index}"
    if k == POW:
        return f"(pow {to_source(e.children[0])} {e.exponent})"
    parts = " ".join(to_source(c) for c in e.children)
    return f"({_OP_NAMES[k]} {parts})"


@dataclass(frozen=True)
class Problem:
    """A parsed problem: prove objective >= 0 over the box."""

    objective: Expr
    box: "Box"  # noqa: F821 - quadcert.interval.Box
    n: int
    name: str = ""

    def __iter__(self):
        return iter((self.objective, self.box, self.n))


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<num>[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)
  | (?P<sym>:?[A-Za-z_][A-Za-z_0-9]*|>=|[-+*/^]|\(|\)|\[|\]|,)
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        pos = m.end()
        if m.lastgroup == "newline":
            line += 1
            col = 1
            tokens.append(_Token("\n", line - 1, col))
            continue
        if m.lastgroup in ("ws", "comment"):
            col += len(m.group())
            continue
        tokens.append(_Token(m.group(), line, col))
        col += len(m.group())
    return tokens


class _TokenStream:
    def __init__(self, tokens: list[_Token], skip_newlines: bool = False):
        self.tokens = tokens
        self.pos = 0
        self.skip_newlines = skip_newlines

    def peek(self) -> _Token | None:
        p = self.pos
        while p < len(self.tokens):
            t = self.tokens[p]
            if self.skip_newlines and t.text == "\n":
                p += 1
                continue
            return t
        return None

    def next(self) -> _Token | None:
        while self.pos < len(self.tokens):
            t = self.tokens[self.pos]
            self.pos += 1
            if self.skip_newlines and t.text == "\n":
                continue
            return t
        return None

    def expect(self, text: str) -> _Token:
        t = self.next()
        if t is None:
            last = self.tokens[-1] if self.tokens else _Token("", 1, 1)
            raise ParseError(f"expected {text!r}, found end of input", last.line, last.col)
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t


_NUM_RE = re.compile(r"[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")
_VAR_RE = re.compile(r"x(\d+)$")


def _parse_sexpr(ts: _TokenStream, n: int | None) -> Expr:
    t = ts.next()
    if t is None:
        raise ParseError("unexpected end of input in expression", 0, 0)
    if t.text == "(":
        op = ts.next()
        if op is None:
            raise ParseError("unexpected end of input after '('", t.line, t.col)
        name = op.text
        args: list[Expr] = []
        if name == "pow":
            base = _parse_sexpr(ts, n)
            et = ts.next()
            if et is None or not et.text.isdigit():
                where = et or op
                raise ParseError("pow needs a positive integer exponent", where.line, where.col)
            if int(et.text) < 1:
                raise ParseError("pow exponent must be >= 1", et.line, et.col)
            ts.expect(")")
            return Expr(POW, (base,), exponent=int(et.text))
        while True:
            nxt = ts.peek()
            if nxt is None:
                raise ParseError("unbalanced parenthesis", t.line, t.col)
            if nxt.text == ")":
                ts.next()
                break
            args.append(_parse_sexpr(ts, n))
        if name == ">=":
            if len(args) != 2 or args[1] != const(0.0):
                raise ParseError("only (>= <expr> 0) claims are supported", op.line, op.col)
            return args[0]
        kind = _NAME_OPS.get(name)
        if kind is None:
            raise ParseError(f"unknown operator {name!r}", op.line, op.col)
        if kind in _UNARY:
            if len(args) != 1:
                raise ParseError(f"{name} takes exactly one argument", op.line, op.col)
            return Expr(kind, (args[0],))
        if kind in (MIN, MAX, DIV):
            if len(args) != 2:
                raise ParseError(f"{name} takes exactly two arguments", op.line, op.col)
            return Expr(kind, tuple(args))
        # + - * accept two or more arguments, folded left; unary minus negates
        if kind == SUB and len(args) == 1:
            return Expr(SUB, (const(0.0), args[0]))
        if len(args) < 2:
            raise ParseError(f"{name} takes at least two arguments", op.line, op.col)
        out = args[0]
        for a in args[1:]:
            out = Expr(kind, (out, a))
        return out
    if t.text == "pi":
        return const(math.pi)
    if _NUM_RE.match(t.text):
        return const(float(t.text))
    vm = _VAR_RE.match(t.text)
    if vm:
        idx = int(vm.group(1))
        if n is not None and idx >= n:
            raise ParseError(f"variable x{idx} exceeds declared dimension {n}", t.line, t.col)
        return var(idx)
    raise ParseError(f"unknown identifier {t.text!r}", t.line, t.col)


def _parse_number_token(ts: _TokenStream) -> float:
    t = ts.next()
    if t is None:
        raise ParseError("expected a number, found end of input", 0, 0)
    if t.text == "-":
        u = ts.next()
        if u is None or not _NUM_RE.match(u.text):
            raise ParseError("expected a number after '-'", t.line, t.col)
        return -float(u.text)
    if not _NUM_RE.match(t.text):
        raise ParseError(f"expected a number, found {t.text!r}", t.line, t.col)
    return float(t.text)


def _parse_box_items(ts: _TokenStream) -> list[tuple[float, float]]:
    items: list[tuple[float, float]] = []
    while True:
        t = ts.peek()
        if t is None or t.text != "[":
            break
        ts.next()
        lo = _parse_number_token(ts)
        ts.expect(",")
        hi = _parse_number_token(ts)
        ts.expect("]")
        reps = 1
        t = ts.peek()
        if t is not None and t.text == "^":
            ts.next()
            rt = ts.next()
            if rt is None or not rt.text.isdigit():
                where = rt or t
                raise ParseError("expected an integer repetition after '^'", where.line, where.col)
            reps = int(rt.text)
        items.extend([(lo, hi)] * reps)
    if not items:
        t = ts.peek()
        line, col = (t.line, t.col) if t else (1, 1)
        raise ParseError("expected at least one [lo,hi] interval", line, col)
    return items


def parse_problem(text: str, name: str = "") -> Problem:
    """Parse problem source into (objective, box, dimension).

    Two layouts are accepted. The file layout::

        vars 2
        box [0,1]^2
        objective (+ (atan x0) x1)

    and the compact one-liner ``(>= (+ (atan x0) x1) 0) :box [0,1]^2``.
    Comments start with ``#``; ``pi`` is the only named constant.
    """
    from .interval import Box  # local import to avoid a module cycle

    tokens = _tokenize(text)
    stripped = text.lstrip()
    if stripped.startswith("("):
        ts = _TokenStream(tokens, skip_newlines=True)
        objective = _parse_sexpr(ts, None)
        t = ts.next()
        if t is None or t.text not in (":box", "box"):
            line, col = (t.line, t.col) if t else (1, 1)
            raise ParseError("expected ':box' after the inequality", line, col)
        bounds = _parse_box_items(ts)
        n = len(bounds)
        _check_dimension(objective, n)
        return Problem(objective, Box.from_bounds(bounds), n, name)

    ts = _TokenStream(tokens)
    n: int | None = None
    bounds: list[tuple[float, float]] | None = None
    objective: Expr | None = None
    while True:
        t = ts.next()
        if t is None:
            break
        if t.text == "\n":
            continue
        if t.text == "vars":
            nt = ts.next()
            if nt is None or not nt.text.isdigit():
                raise ParseError("expected an integer after 'vars'", t.line, t.col)
            n = int(nt.text)
        elif t.text == "box":
            sub_ts = _TokenStream(ts.tokens, skip_newlines=False)
            sub_ts.pos = ts.pos
            bounds = _parse_box_items(sub_ts)
            ts.pos = sub_ts.pos
        elif t.text == "objective":
            sub_ts = _TokenStream(ts.tokens, skip_newlines=True)
            sub_ts.pos = ts.pos
            objective = _parse_sexpr(sub_ts, n)
            ts.pos = sub_ts.pos
        else:
            raise ParseError(f"unexpected token {t.text!r}", t.line, t.col)
    if objective is None:
        raise ParseError("missing 'objective' line", 1, 1)
    if bounds is None:
        raise ParseError("missing 'box' line", 1, 1)
    if n is None:
        n = len(bounds)
    if len(bounds) != n:
        raise ParseError(f"box has {len(bounds)} intervals but vars declares {n}", 1, 1)
    _check_dimension(objective, n)
    return Problem(objective, Box.from_bounds(bounds), n, name)


def _check_dimension(e: Expr, n: int):
    top = max_var_index(e)
    if top >= n:
        raise ParseError(f"variable x{top} exceeds problem dimension {n}", 1, 1)


def problem_to_source(p: Problem) -> str:
    """Inverse of parse_problem (file layout)."""
    box_part = " ".join(f"[{repr(iv.lo)},{repr(iv.hi)}]" for iv in p.box)
    return f"vars {p.n}\nbox {box_part}\nobjective {to_source(p.objective)}\n"
