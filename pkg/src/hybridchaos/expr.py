"""Small math-expression language for the configurable function slots.

Grammar (whitespace insignificant):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Precedence: '^' (right-assoc) > unary '-' > '*' '/' > '+' '-'.
NUMBER is a decimal literal with optional fraction and exponent.
Identifiers are either the constants pi/e (parsed as literals), one of
the variables r, x, y, z, w, xn, yn, zn, wn, p, or a call to one of
sin, cos, tan, cot, exp, log, sinh, cosh, tanh, sqrt, abs.

log is the natural logarithm; cot(v) = cos(v)/sin(v). Evaluation never
traps: domain violations yield NaN and overflow yields +-inf, which
propagate to the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

__all__ = [
    "Number",
    "Variable",
    "Unary",
    "Binary",
    "Call",
    "Expr",
    "ExprSyntaxError",
    "UnboundVariableError",
    "VARIABLES",
    "FUNCTIONS",
    "parse",
    "evaluate",
    "free_variables",
    "unparse",
    "compile_fn",
]

VARIABLES = frozenset({"r", "x", "y", "z", "w", "xn", "yn", "zn", "wn", "p"})
CONSTANTS = {"pi": math.pi, "e": math.e}


class ExprSyntaxError(ValueError):
    """Parse failure; `offset` is the byte offset into the source text."""

    def __init__(self, message: str, src: str, pos: int):
        self.offset = len(src[:pos].encode("utf-8"))
        super().__init__(f"{message} at offset {self.offset}")


class UnboundVariableError(KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"variable {name!r} is not bound in the environment")


# --- AST -------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Number:
    value: float


@dataclass(frozen=True, slots=True)
class Variable:
    name: str


@dataclass(frozen=True, slots=True)
class Unary:
    """Negation."""

    operand: "Expr"


@dataclass(frozen=True, slots=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Number, Variable, Unary, Binary, Call]


# --- non-trapping math -----------------------------------------------
# math.* raises ValueError on domain errors and OverflowError on range
# errors; plain '/' raises ZeroDivisionError; float '**' goes complex for
# negative bases. These wrappers give IEEE-style NaN/inf results instead.

def _is_odd_int(v: float) -> bool:
    return math.isfinite(v) and v == math.floor(v) and math.fmod(abs(v), 2.0) == 1.0


def safe_div(a: float, b: float) -> float:
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def safe_pow(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except OverflowError:
        return -math.inf if (a < 0.0 and _is_odd_int(b)) else math.inf
    except ValueError:
        if a == 0.0 and b < 0.0:
            if math.copysign(1.0, a) < 0.0 and _is_odd_int(b):
                return -math.inf
            return math.inf
        return math.nan


def safe_cot(v: float) -> float:
    try:
        return math.cos(v) / math.sin(v)
    except ZeroDivisionError:
        return math.copysign(math.inf, math.cos(v)) * math.copysign(1.0, math.sin(v))
    except ValueError:
        return math.nan


def _safe_trig(fn: Callable[[float], float]) -> Callable[[float], float]:
    def wrapped(v: float) -> float:
        try:
            return fn(v)
        except ValueError:  # infinite argument
            return math.nan

    return wrapped


def _safe_log(v: float) -> float:
    if v > 0.0:
        return math.log(v)
    if v == 0.0:
        return -math.inf
    return math.nan


def _safe_exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _safe_sinh(v: float) -> float:
    try:
        return math.sinh(v)
    except OverflowError:
        return math.copysign(math.inf, v)


def _safe_cosh(v: float) -> float:
    try:
        return math.cosh(v)
    except OverflowError:
        return math.inf


def _safe_sqrt(v: float) -> float:
    try:
        return math.sqrt(v)
    except ValueError:
        return math.nan


_SAFE_FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": _safe_trig(math.sin),
    "cos": _safe_trig(math.cos),
    "tan": _safe_trig(math.tan),
    "cot": safe_cot,
    "exp": _safe_exp,
    "log": _safe_log,
    "sinh": _safe_sinh,
    "cosh": _safe_cosh,
    "tanh": math.tanh,
    "sqrt": _safe_sqrt,
    "abs": abs,
}

FUNCTIONS = frozenset(_SAFE_FUNCTIONS)

# Fast versions for generated code; cot and ^ must stay self-contained
# because their Python equivalents misbehave (ZeroDivisionError, complex
# results) rather than raising something a caller can treat as "retry".
FAST_NAMESPACE: dict[str, object] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "cot": safe_cot,
    "exp": math.exp,
    "log": math.log,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
    "sqrt": math.sqrt,
    "abs": abs,
    "_pow": safe_pow,
}


# --- lexer -----------------------------------------------------------

_OPERATORS = set("+-*/^()")


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind  # "num" | "ident" | "op" | "end"
        self.text = text
        self.pos = pos


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPERATORS:
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        if c.isdigit():
            start = i
            while i < n and src[i].isdigit():
                i += 1
            if i < n and src[i] == "." and i + 1 < n and src[i + 1].isdigit():
                i += 1
                while i < n and src[i].isdigit():
                    i += 1
            if i < n and src[i] in "eE":
                j = i + 1
                if j < n and src[j] in "+-":
                    j += 1
                if j < n and src[j].isdigit():
                    i = j
                    while i < n and src[i].isdigit():
                        i += 1
            tokens.append(_Token("num", src[start:i], start))
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (src[i].isalnum() or src[i] == "_"):
                i += 1
            tokens.append(_Token("ident", src[start:i], start))
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", src, i)
    tokens.append(_Token("end", "", n))
    return tokens


# --- parser ----------------------------------------------------------

class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: _Token) -> ExprSyntaxError:
        return ExprSyntaxError(message, self.src, tok.pos)

    def parse(self) -> Expr:
        tok = self.peek()
        if tok.kind == "end":
            raise self.error("empty expression", tok)
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise self.error(f"unexpected {tok.text!r}", tok)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            left = Binary(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            left = Binary(op, left, self.factor())
        return left

    def factor(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Unary(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            return Binary("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            return Number(float(tok.text))
        if tok.kind == "ident":
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if tok.text not in FUNCTIONS:
                    raise self.error(f"unknown function {tok.text!r}", tok)
                self.advance()
                arg = self.expr()
                closing = self.advance()
                if not (closing.kind == "op" and closing.text == ")"):
                    raise self.error("expected ')'", closing)
                return Call(tok.text, arg)
            if tok.text in CONSTANTS:
                return Number(CONSTANTS[tok.text])
            if tok.text in VARIABLES:
                return Variable(tok.text)
            raise self.error(f"unknown variable {tok.text!r}", tok)
        if tok.kind == "op" and tok.text == "(":
            e = self.expr()
            closing = self.advance()
            if not (closing.kind == "op" and closing.text == ")"):
                raise self.error("expected ')'", closing)
            return e
        if tok.kind == "end":
            raise self.error("unexpected end of input", tok)
        raise self.error(f"unexpected {tok.text!r}", tok)


def parse(src: str) -> Expr:
    """Parse source text into an AST. Raises ExprSyntaxError."""
    return _Parser(src).parse()


# --- evaluation ------------------------------------------------------

def evaluate(e: Expr, env: Mapping[str, float]) -> float:
    """Evaluate an AST under an environment; the reference evaluator.

    Never traps: NaN/inf results are returned, not raised. Unbound
    variables raise UnboundVariableError.
    """
    if type(e) is Number:
        return e.value
    if type(e) is Variable:
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if type(e) is Unary:
        return -evaluate(e.operand, env)
    if type(e) is Binary:
        a = evaluate(e.left, env)
        b = evaluate(e.right, env)
        op = e.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return safe_div(a, b)
        return safe_pow(a, b)
    return _SAFE_FUNCTIONS[e.func](evaluate(e.arg, env))


def free_variables(e: Expr) -> frozenset[str]:
    if type(e) is Variable:
        return frozenset((e.name,))
    if type(e) is Unary:
        return free_variables(e.operand)
    if type(e) is Binary:
        return free_variables(e.left) | free_variables(e.right)
    if type(e) is Call:
        return free_variables(e.arg)
    return frozenset()


# --- source emission -------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _unparse(e: Expr, min_prec: int) -> str:
    if type(e) is Number:
        v = e.value
        s = repr(v) if v >= 0 else f"({v!r})"
        return s
    if type(e) is Variable:
        return e.name
    if type(e) is Unary:
        s = "-" + _unparse(e.operand, _PREC_UNARY)
        return f"({s})" if min_prec > _PREC_UNARY else s
    if type(e) is Binary:
        if e.op == "^":
            s = _unparse(e.left, _PREC_ATOM) + "^" + _unparse(e.right, _PREC_POW)
            return f"({s})" if min_prec > _PREC_POW else s
        if e.op in "+-":
            s = f"{_unparse(e.left, _PREC_ADD)} {e.op} {_unparse(e.right, _PREC_MUL)}"
            return f"({s})" if min_prec > _PREC_ADD else s
        s = _unparse(e.left, _PREC_MUL) + e.op + _unparse(e.right, _PREC_UNARY)
        return f"({s})" if min_prec > _PREC_MUL else s
    return f"{e.func}({_unparse(e.arg, 0)})"


def unparse(e: Expr) -> str:
    """Render an AST back to source; parse(unparse(e)) == e."""
    return _unparse(e, 0)


def emit_python(e: Expr, subs: Mapping[str, str] | None = None) -> str:
    """Emit a fully parenthesized Python expression for an AST.

    `subs` substitutes replacement code for variable names (used to
    inline the argument of unary slots). Operation order matches
    `evaluate` exactly; only `cot` and `^` go through wrappers, so the
    emitted code may raise ValueError/ZeroDivisionError/OverflowError
    where `evaluate` would produce NaN/inf.
    """
    if type(e) is Number:
        return repr(e.value)
    if type(e) is Variable:
        return subs[e.name] if subs and e.name in subs else e.name
    if type(e) is Unary:
        return f"(-{emit_python(e.operand, subs)})"
    if type(e) is Binary:
        a = emit_python(e.left, subs)
        b = emit_python(e.right, subs)
        if e.op == "^":
            return f"_pow({a}, {b})"
        return f"({a} {e.op} {b})"
    return f"{e.func}({emit_python(e.arg, subs)})"


def compile_fn(e: Expr, params: Sequence[str]) -> Callable[..., float]:
    """Compile an AST to a positional-argument Python function.

    The fast path uses raw math functions; on a math exception it falls
    back to `evaluate`, so results are identical to the reference
    evaluator (e.g. tanh(1/0) is 1.0, not an error).
    """
    params = tuple(params)
    src = f"def _compiled({', '.join(params)}):\n    return {emit_python(e)}\n"
    ns = dict(FAST_NAMESPACE)
    exec(compile(src, "<expr>", "exec"), ns)
    fast = ns["_compiled"]

    def call(*args: float) -> float:
        try:
            return fast(*args)
        except (ValueError, ZeroDivisionError, OverflowError):
            return evaluate(e, dict(zip(params, args)))

    return call
