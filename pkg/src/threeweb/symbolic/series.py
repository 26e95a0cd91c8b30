"""Truncated multivariate power series with a total-degree cap."""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Sequence, Tuple

from .poly import Poly, as_rational


class SeriesError(ValueError):
    pass


class JetSeries:
    """Exact power series in ``variables`` truncated above total degree ``cap``.

    All binary operations require identical variable tuples and caps; use
    :meth:`truncate` to bring operands to a common cap explicitly.
    """

    __slots__ = ("variables", "cap", "terms")

    def __init__(self, variables: Sequence[str], cap: int, terms: Mapping[Tuple[int, ...], object] | None = None):
        if cap < 0:
            raise SeriesError("order cap must be non-negative")
        self.variables = tuple(variables)
        self.cap = cap
        n = len(self.variables)
        clean: Dict[Tuple[int, ...], object] = {}
        for m, c in (terms or {}).items():
            m = tuple(m)
            if len(m) != n:
                raise SeriesError(f"exponent {m} does not match variables {self.variables}")
            if sum(m) > cap:
                continue
            c = as_rational(c)
            if c:
                clean[m] = c
        self.terms = clean

    # construction -------------------------------------------------------------------
    @classmethod
    def const(cls, c, variables: Sequence[str], cap: int) -> "JetSeries":
        return cls(variables, cap, {(0,) * len(variables): c})

    @classmethod
    def var(cls, name: str, variables: Sequence[str], cap: int) -> "JetSeries":
        variables = tuple(variables)
        return cls(variables, cap, {tuple(int(v == name) for v in variables): 1})

    @classmethod
    def from_poly(cls, p: Poly, variables: Sequence[str], cap: int) -> "JetSeries":
        q = p.with_gens(tuple(variables))
        return cls(variables, cap, q.terms)

    def to_poly(self) -> Poly:
        return Poly(self.variables, self.terms)

    def truncate(self, cap: int) -> "JetSeries":
        if cap > self.cap:
            raise SeriesError(f"cannot raise cap from {self.cap} to {cap}")
        return JetSeries(self.variables, cap, self.terms)

    # helpers ------------------------------------------------------------------------
    def _check(self, other: "JetSeries"):
        if self.variables != other.variables:
            raise SeriesError(f"variable mismatch: {self.variables} vs {other.variables}")
        if self.cap != other.cap:
            raise SeriesError(f"cap mismatch: {self.cap} vs {other.cap}")

    def _lift(self, other) -> "JetSeries":
        if isinstance(other, JetSeries):
            self._check(other)
            return other
        if isinstance(other, Poly):
            return JetSeries.from_poly(other, self.variables, self.cap)
        return JetSeries.const(as_rational(other), self.variables, self.cap)

    def constant_term(self):
        return self.terms.get((0,) * len(self.variables), 0)

    def coefficient(self, monomial: Sequence[int]):
        return self.terms.get(tuple(monomial), 0)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def valuation(self):
        """Smallest total degree with a nonzero coefficient, or None if all vanish."""
        if not self.terms:
            return None
        return min(sum(m) for m in self.terms)

    # ring operations ----------------------------------------------------------------
    def __neg__(self):
        return JetSeries(self.variables, self.cap, {m: -c for m, c in self.terms.items()})

    def __add__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for m, c in o.terms.items():
            out[m] = out.get(m, 0) + c
        return JetSeries(self.variables, self.cap, out)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        cap = self.cap
        out: Dict[Tuple[int, ...], object] = {}
        b_items = [(m, c, sum(m)) for m, c in o.terms.items()]
        for ma, ca in self.terms.items():
            da = sum(ma)
            for mb, cb, db in b_items:
                if da + db > cap:
                    continue
                m = tuple(x + y for x, y in zip(ma, mb))
                out[m] = out.get(m, 0) + ca * cb
        return JetSeries(self.variables, cap, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise SeriesError("series powers must be integers")
        if n < 0:
            return self.reciprocal() ** (-n)
        result = JetSeries.const(1, self.variables, self.cap)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def reciprocal(self) -> "JetSeries":
        c0 = self.constant_term()
        if not c0:
            raise SeriesError("reciprocal of a series with zero constant term")
        inv0 = Fraction(1) / Fraction(c0)
        # 1/(c0 (1 + r)) = inv0 * sum (-r)^k; r has no constant term so k <= cap
        r = self * inv0 - 1
        acc = JetSeries.const(1, self.variables, self.cap)
        power = JetSeries.const(1, self.variables, self.cap)
        for _ in range(self.cap):
            power = power * (-r)
            if not power:
                break
            acc = acc + power
        return acc * inv0

    def __truediv__(self, other):
        if isinstance(other, JetSeries):
            self._check(other)
            return self * other.reciprocal()
        c = as_rational(other)
        if not c:
            raise ZeroDivisionError("series division by zero")
        return self * (Fraction(1) / Fraction(c))

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __eq__(self, other):
        if isinstance(other, JetSeries):
            return (self.variables == other.variables and self.cap == other.cap
                    and self.terms == other.terms)
        try:
            return self == self._lift(other)
        except (TypeError, SeriesError):
            return NotImplemented

    def __hash__(self):
        return hash((self.variables, self.cap, frozenset(self.terms.items())))

    # calculus -----------------------------------------------------------------------
    def diff(self, name: str) -> "JetSeries":
        """Partial derivative; the result is only known through cap - 1."""
        if name not in self.variables:
            raise SeriesError(f"unknown variable {name!r}")
        if self.cap == 0:
            raise SeriesError("cannot differentiate a series with cap 0")
        i = self.variables.index(name)
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                out[m[:i] + (m[i] - 1,) + m[i + 1:]] = c * m[i]
        return JetSeries(self.variables, self.cap - 1, out)

    def compose_univariate(self, inner: "JetSeries") -> "JetSeries":
        """Evaluate this one-variable series at ``inner`` (which must have no constant term)."""
        if len(self.variables) != 1:
            raise SeriesError("outer series must be univariate")
        if inner.constant_term():
            raise SeriesError("inner series must have zero constant term")
        cap = inner.cap
        if cap > self.cap:
            raise SeriesError(f"outer cap {self.cap} is below the requested cap {cap}")
        # Horner evaluation
        coeffs = [self.terms.get((k,), 0) for k in range(cap + 1)]
        acc = JetSeries.const(coeffs[cap], inner.variables, cap)
        for k in range(cap - 1, -1, -1):
            acc = acc * inner + coeffs[k]
        return acc

    def evaluate_at_origin(self):
        return self.constant_term()

    # printing -----------------------------------------------------------------------
    def __str__(self):
        body = Poly(self.variables, self.terms).to_str()
        return f"{body} + O({self.cap + 1})"

    def __repr__(self):
        return f"JetSeries({str(self)!r})"


def series_lift(f, center: Mapping[str, object], cap: int, variables: Sequence[str] | None = None) -> JetSeries:
    """Taylor expansion of a RatFunc (or Poly) at ``center`` through total degree ``cap``.

    The series variables are the shifts ``v - center[v]`` named after ``v``.
    """
    from .ratfunc import RatFunc

    if isinstance(f, Poly):
        f = RatFunc.from_poly(f)
    if variables is None:
        variables = tuple(center)
    variables = tuple(variables)
    for g in f.num.used_gens() + f.den.used_gens():
        if g not in variables:
            raise SeriesError(f"generator {g!r} has no expansion point")
    shift = {v: Poly.var(v, variables) + as_rational(center.get(v, 0)) for v in variables}
    num = f.num.subs(shift).with_gens(variables) if f.num else Poly.zero(variables)
    den = f.den.subs(shift).with_gens(variables)
    if not den.constant_value():
        raise SeriesError("pole: denominator vanishes at the expansion point")
    return JetSeries.from_poly(num, variables, cap) / JetSeries.from_poly(den, variables, cap)
