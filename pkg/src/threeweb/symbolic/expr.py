"""Expression trees, a recursive-descent parser, a printer and normalization.

Grammar (whitespace ignored)::

    expr       := term (('+' | '-') term)*
    term       := factor (('*' | '/') factor)*
    factor     := '-' factor | power
    power      := base ('^' ['-'] integer)?
    base       := rational | identifier | '(' expr ')'
    rational   := integer ('/' positive-integer)?
    identifier := letter (letter | digit | '_' | ',' | '{' | '}')*

Inside braces an identifier may also contain '-', so ``T_{1,-1}`` is one
name.  Unary minus binds looser than '^', so ``-x^2`` is ``-(x^2)``.

With ``wedge=True`` a '^' that is not followed by an integer is read as the
exterior product of the two neighbouring factors (used by chart files).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Tuple, Union

from .poly import Poly
from .ratfunc import RatFunc


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


# tree ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exp: int


@dataclass(frozen=True)
class Wedge:
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Neg, BinOp, Pow, Wedge]


def const(c) -> Expr:
    c = Fraction(c)
    return Neg(Const(-c)) if c < 0 else Const(c)


# tokenizer ----------------------------------------------------------------------------

def _tokenize(text: str):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", text[i:j], i))
            i = j
        elif ch.isalpha():
            j, depth = i + 1, 0
            while j < n:
                c = text[j]
                if c == "{":
                    depth += 1
                elif c == "}":
                    if depth == 0:
                        break
                    depth -= 1
                elif c == "-" and depth > 0:
                    pass
                elif not (c.isalnum() or c in "_,"):
                    break
                j += 1
            if depth:
                raise ParseError("unbalanced braces in identifier", i)
            toks.append(("id", text[i:j], i))
            i = j
        elif ch in "+-*/^()":
            toks.append((ch, ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, wedge: bool):
        self.toks = _tokenize(text)
        self.pos = 0
        self.wedge = wedge

    def peek(self, k: int = 0):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, what: str):
        t = self.peek()
        if t[0] != kind:
            raise ParseError(f"expected {what}", t[2])
        return self.take()

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected {t[1]!r}", t[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[0] in ("*", "/"):
            op, _, off = self.take()
            rhs = self.factor()
            if op == "/" and isinstance(rhs, Const) and rhs.value == 0:
                raise ParseError("division by a zero literal", off)
            e = BinOp(op, e, rhs)
        return e

    def factor(self) -> Expr:
        if self.peek()[0] == "-":
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        b = self.base()
        while self.peek()[0] == "^":
            _, _, off = self.take()
            t = self.peek()
            if t[0] == "int" or (t[0] == "-" and self.peek(1)[0] == "int"):
                sign = 1
                if t[0] == "-":
                    self.take()
                    sign = -1
                b = Pow(b, sign * int(self.take()[1]))
                if not self.wedge:
                    break
            elif self.wedge and t[0] in ("id", "("):
                b = Wedge(b, self.base())
            else:
                raise ParseError("expected integer exponent", t[2])
        return b

    def base(self) -> Expr:
        t = self.peek()
        if t[0] == "int":
            self.take()
            value = Fraction(int(t[1]))
            if self.peek()[0] == "/" and self.peek(1)[0] == "int":
                off = self.peek(1)[2]
                self.take()
                d = int(self.take()[1])
                if d == 0:
                    raise ParseError("division by a zero literal", off)
                value = value / d
            return Const(value)
        if t[0] == "id":
            self.take()
            return Var(t[1])
        if t[0] == "(":
            self.take()
            e = self.expr()
            self.expect(")", "')'")
            return e
        if t[0] == "end":
            raise ParseError("unexpected end of input", t[2])
        raise ParseError(f"unexpected {t[1]!r}", t[2])


def parse_expr(text: str, wedge: bool = False) -> Expr:
    """Parse ``text`` into an expression tree; raises :class:`ParseError`."""
    return _Parser(text, wedge).parse()


# printer ------------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, (Pow, Wedge)):
        return 4
    if isinstance(e, Const) and e.value.denominator != 1:
        return 4
    return 5


def to_text(e: Expr) -> str:
    """Print with the fewest parentheses that re-parse to the same tree."""
    if isinstance(e, Const):
        v = e.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        return f"-{inner}" if _prec(e.arg) >= 3 else f"-({inner})"
    if isinstance(e, Pow):
        b = to_text(e.base)
        if _prec(e.base) < 5:
            b = f"({b})"
        return f"{b}^{e.exp}"
    if isinstance(e, Wedge):
        parts = []
        for side in (e.left, e.right):
            s = to_text(side)
            parts.append(s if isinstance(side, (Var, Wedge)) else f"({s})")
        return "^".join(parts)
    p = _PREC[e.op]
    left, right = to_text(e.left), to_text(e.right)
    if _prec(e.left) < p:
        left = f"({left})"
    elif e.op == "/" and isinstance(e.left, Const) and e.left.value.denominator == 1:
        left = f"({left})"  # "3/2" would re-read as a rational literal
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}" if e.op in "+-" else f"{left}{e.op}{right}"


# normalization ------------------------------------------------------------------------

def fold(e: Expr, leaf: Callable, one=None):
    """Evaluate a (wedge-free) tree in any ring given a leaf interpretation."""
    if isinstance(e, (Const, Var)):
        return leaf(e)
    if isinstance(e, Neg):
        return -fold(e.arg, leaf)
    if isinstance(e, Pow):
        return fold(e.base, leaf) ** e.exp
    if isinstance(e, Wedge):
        raise ValueError("exterior product outside of a form context")
    a, b = fold(e.left, leaf), fold(e.right, leaf)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if not b:
        raise ZeroDivisionError("division by an expression that is identically zero")
    return a / b


def _rat_leaf(e):
    if isinstance(e, Const):
        return RatFunc.const(e.value)
    return RatFunc.var(e.name)


def normalize(e: Expr) -> RatFunc:
    """Canonical rational function of an expression tree."""
    return fold(e, _rat_leaf)


def to_ratfunc(text: str) -> RatFunc:
    return normalize(parse_expr(text))


def to_poly(text: str) -> Poly:
    r = to_ratfunc(text)
    if not r.is_polynomial():
        raise ValueError(f"not a polynomial: {text!r}")
    return r.num


def variables_of(e: Expr) -> Tuple[str, ...]:
    seen: Dict[str, None] = {}

    def walk(x):
        if isinstance(x, Var):
            seen.setdefault(x.name)
        elif isinstance(x, Neg):
            walk(x.arg)
        elif isinstance(x, Pow):
            walk(x.base)
        elif isinstance(x, (BinOp, Wedge)):
            walk(x.left)
            walk(x.right)

    walk(e)
    return tuple(seen)
