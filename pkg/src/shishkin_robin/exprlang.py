"""A small arithmetic expression language for problem data in config files.

Expressions range over numeric literals, the variables ``x`` and ``t``, the
binary operators ``+ - * / ^``, unary minus and the functions ``exp``, ``ln``,
``sin``, ``cos``, ``sqrt``, ``abs`` and ``pow``.  ``^`` is right-associative
and binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.

>>> evaluate(parse("1+3*t"), 0.3, 1.0)
4.0
"""

from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Num", "Var", "Neg", "BinOp", "Call", "Expr",
    "ExprError", "ExprSyntaxError", "UnknownIdentifierError", "EvalError",
    "parse", "unparse", "compile_expr", "evaluate", "run", "FUNCTIONS", "VARIABLES",
]


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, offset: int, expected: str, found: str):
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(f"syntax error at offset {offset}: expected {expected}, found {found}")


class UnknownIdentifierError(ExprError):
    def __init__(self, offset: int, name: str):
        self.offset = offset
        self.name = name
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class EvalError(ArithmeticError):
    """Domain error during evaluation (ln of non-positive, division by zero, ...)."""


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Expr = Union[Num, Var, Neg, BinOp, Call]

VARIABLES = ("x", "t")
FUNCTIONS = {"exp": 1, "ln": 1, "sin": 1, "cos": 1, "sqrt": 1, "abs": 1, "pow": 2}

# --- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    offset: int

    def describe(self) -> str:
        return "end of input" if self.kind == "end" else repr(self.text)


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(source)
    while True:
        while pos < n and source[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(pos, "a token", repr(source[pos]))
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


# --- Pratt parser ----------------------------------------------------------

# left binding powers of infix operators
_INFIX_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_PREFIX_MINUS_BP = 30
_OPERAND = "a number, variable, function call, '(' or '-'"


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.current
        if tok.kind != "op" or tok.text != text:
            raise ExprSyntaxError(tok.offset, repr(text), tok.describe())
        self.advance()

    def parse(self) -> Expr:
        e = self.expression(0)
        tok = self.current
        if tok.kind != "end":
            raise ExprSyntaxError(tok.offset, "an operator or end of input", tok.describe())
        return e

    def expression(self, rbp: int) -> Expr:
        left = self.nud(self.advance())
        while True:
            tok = self.current
            lbp = _INFIX_BP.get(tok.text, 0) if tok.kind == "op" else 0
            if lbp <= rbp:
                return left
            self.advance()
            if tok.text == "^":
                # right-associative; exponent may itself start with unary minus
                right = self.expression(lbp - 1)
            else:
                right = self.expression(lbp)
            left = BinOp(tok.text, left, right)

    def nud(self, tok: _Token) -> Expr:
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "name":
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                return self.call(tok)
            raise UnknownIdentifierError(tok.offset, tok.text)
        if tok.kind == "op" and tok.text == "-":
            return Neg(self.expression(_PREFIX_MINUS_BP))
        if tok.kind == "op" and tok.text == "(":
            e = self.expression(0)
            self.expect(")")
            return e
        raise ExprSyntaxError(tok.offset, _OPERAND, tok.describe())

    def call(self, name: _Token) -> Expr:
        self.expect("(")
        args = [self.expression(0)]
        while self.current.kind == "op" and self.current.text == ",":
            self.advance()
            args.append(self.expression(0))
        close = self.current
        self.expect(")")
        arity = FUNCTIONS[name.text]
        if len(args) != arity:
            raise ExprSyntaxError(
                close.offset, f"{arity} argument(s) to {name.text}", f"{len(args)}"
            )
        return Call(name.text, tuple(args))


def parse(source: str) -> Expr:
    """Parse ``source`` into an immutable expression tree.

    Raises `ExprSyntaxError` (with the offset of the offending token) or
    `UnknownIdentifierError`.
    """
    return _Parser(source).parse()


# --- unparse ---------------------------------------------------------------

_SUM, _PRODUCT, _UNARY, _POWER, _ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return {"+": _SUM, "-": _SUM, "*": _PRODUCT, "/": _PRODUCT, "^": _POWER}[e.op]
    if isinstance(e, Neg):
        return _UNARY
    return _ATOM


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def unparse(e: Expr) -> str:
    """Render ``e`` with the minimal parentheses needed to parse back to ``e``."""

    def wrap(sub: Expr, min_prec: int) -> str:
        s = unparse(sub)
        return f"({s})" if _prec(sub) < min_prec else s

    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({', '.join(unparse(a) for a in e.args)})"
    if isinstance(e, Neg):
        return "-" + wrap(e.operand, _UNARY)
    if e.op in "+-":
        return f"{wrap(e.left, _SUM)} {e.op} {wrap(e.right, _PRODUCT)}"
    if e.op in "*/":
        return f"{wrap(e.left, _PRODUCT)}{e.op}{wrap(e.right, _UNARY)}"
    return f"{wrap(e.left, _ATOM)}^{wrap(e.right, _UNARY)}"


# --- evaluation ------------------------------------------------------------

def _check(value, what: str):
    if isinstance(value, np.ndarray):
        if not np.all(np.isfinite(value)):
            raise EvalError(f"{what} produced a non-finite value")
    elif not math.isfinite(value):
        raise EvalError(f"{what} produced a non-finite value")
    return value


def _div(a, b):
    if np.any(np.asarray(b) == 0):
        raise EvalError("division by zero")
    return a / b


def _ln(v):
    if np.any(np.asarray(v) <= 0):
        raise EvalError("ln of a non-positive value")
    return np.log(v) if isinstance(v, np.ndarray) else math.log(v)


def _sqrt(v):
    if np.any(np.asarray(v) < 0):
        raise EvalError("sqrt of a negative value")
    return np.sqrt(v) if isinstance(v, np.ndarray) else math.sqrt(v)


def _pow(a, b):
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        with np.errstate(all="ignore"):
            return _check(np.power(np.asarray(a, dtype=float), b), "pow")
    try:
        return _check(math.pow(a, b), "pow")
    except (ValueError, OverflowError, ZeroDivisionError) as exc:
        raise EvalError(f"pow({a!r}, {b!r}): {exc}") from None


def _unary(scalar_fn, array_fn, name):
    def fn(v):
        if isinstance(v, np.ndarray):
            with np.errstate(all="ignore"):
                return _check(array_fn(v), name)
        try:
            return _check(scalar_fn(v), name)
        except (ValueError, OverflowError) as exc:
            raise EvalError(f"{name}({v!r}): {exc}") from None
    return fn


_BINARY = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": _div,
    "^": _pow,
}

_CALLS = {
    "exp": _unary(math.exp, np.exp, "exp"),
    "ln": _ln,
    "sin": _unary(math.sin, np.sin, "sin"),
    "cos": _unary(math.cos, np.cos, "cos"),
    "sqrt": _sqrt,
    "abs": abs,
    "pow": _pow,
}


def compile_expr(e: Expr) -> tuple:
    """Flatten ``e`` into a postfix program of ``(opcode, arg)`` pairs."""
    program = []
    # explicit stack: left-deep sums from long config strings exceed the recursion limit
    todo = [(e, False)]
    while todo:
        node, children_done = todo.pop()
        if isinstance(node, Num):
            program.append(("const", node.value))
        elif isinstance(node, Var):
            program.append(("var", node.name))
        elif children_done:
            if isinstance(node, Neg):
                program.append(("neg", None))
            elif isinstance(node, BinOp):
                program.append(("bin", node.op))
            else:
                program.append(("call", node.func))
        else:
            todo.append((node, True))
            if isinstance(node, Neg):
                kids = (node.operand,)
            elif isinstance(node, BinOp):
                kids = (node.left, node.right)
            else:
                kids = node.args
            todo.extend((k, False) for k in reversed(kids))
    return tuple(program)


def run(program: tuple, x, t):
    """Execute a compiled program on scalars or numpy arrays."""
    env = {"x": x, "t": t}
    stack = []
    push = stack.append
    pop = stack.pop
    for opcode, arg in program:
        if opcode == "const":
            push(arg)
        elif opcode == "var":
            push(env[arg])
        elif opcode == "neg":
            push(-pop())
        elif opcode == "bin":
            b = pop()
            a = pop()
            push(_check(_BINARY[arg](a, b), arg))
        else:
            fn = _CALLS[arg]
            if FUNCTIONS[arg] == 2:
                b = pop()
                push(fn(pop(), b))
            else:
                push(fn(pop()))
    return stack[0]


def evaluate(e: Expr, x, t):
    """Evaluate ``e`` at ``(x, t)``; scalars or broadcastable numpy arrays.

    Raises `EvalError` instead of returning a non-finite value.
    """
    if isinstance(x, np.ndarray) or isinstance(t, np.ndarray):
        x = np.asarray(x, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        with np.errstate(all="ignore"):
            out = run(compile_expr(e), x, t)
        return np.broadcast_to(np.asarray(out, dtype=np.float64), np.broadcast(x, t).shape)
    return float(run(compile_expr(e), float(x), float(t)))
