"""Rational functions with a canonical reduced form.

Multivariate gcd first tries the heuristic integer gcd: evaluate one variable
at a large integer, recurse, rebuild the candidate from its xi-adic digits
and accept it only if it divides both inputs exactly.  When that gives up,
the classical recursive scheme runs: split off the content with respect to a
main variable, run a primitive pseudo-remainder sequence on the primitive
parts, and recurse into the coefficient ring.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import Dict, Mapping, Optional, Tuple

from .poly import Poly, as_rational


def _main_var(a: Poly, b: Poly):
    """Prefer a variable present in only one operand (it cannot occur in the gcd),
    otherwise the shared variable of least degree."""
    ua, ub = set(a.used_gens()), set(b.used_gens())
    only = [g for g in a.gens if (g in ua) != (g in ub)]
    if only:
        return only[0]
    shared = [g for g in a.gens if g in ua]
    if not shared:
        return None
    return min(shared, key=lambda g: (max(a.degree(g), b.degree(g)), a.gens.index(g)))


def _monomial_gcd(a: Poly, b: Poly) -> Poly:
    exps = None
    for m in list(a.terms) + list(b.terms):
        exps = list(m) if exps is None else [min(x, y) for x, y in zip(exps, m)]
    return Poly(a.gens, {tuple(exps): 1})


def _prem(a: Poly, b: Poly, x: str) -> Poly:
    """Pseudo-remainder of a by b in x."""
    db = b.degree(x)
    lcb = b.coefficients_in(x)[db]
    xp = Poly.var(x, b.gens)
    r = a
    dr = r.degree(x)
    while r and dr >= db:
        lcr = r.coefficients_in(x)[dr]
        r = lcb * r - lcr * (xp ** (dr - db)) * b
        dr = r.degree(x)
    return r


def _content(p: Poly, x: str) -> Poly:
    g = None
    for c in sorted(p.coefficients_in(x).values(), key=len):
        g = c if g is None else poly_gcd(g, c)
        if g.is_constant():
            return Poly.one(p.gens)
    return g if g is not None else Poly.zero(p.gens)


# heuristic gcd over Z[gens] ---------------------------------------------------------------

IntPoly = Dict[Tuple[int, ...], int]


def _to_int_poly(p: Poly) -> IntPoly:
    """Integer coefficients with content 1 (a rational multiple of p)."""
    q = p.primitive()
    return {m: int(c) for m, c in q.terms.items()}


def _int_content(f: IntPoly) -> int:
    g = 0
    for c in f.values():
        g = gcd(g, c)
    return g


def _lead(f: IntPoly):
    return max(f, key=lambda m: (sum(m), m))


def _int_divides(f: IntPoly, h: IntPoly) -> bool:
    """Exact division test of f by h over Z, leaving early on a failing lead term."""
    p = dict(f)
    lm = _lead(h)
    lc = h[lm]
    terms = list(h.items())
    while p:
        m = _lead(p)
        c = p[m]
        if any(a < b for a, b in zip(m, lm)) or c % lc:
            return False
        qm = tuple(a - b for a, b in zip(m, lm))
        qc = c // lc
        for dm, dc in terms:
            mm = tuple(a + b for a, b in zip(qm, dm))
            v = p.get(mm, 0) - qc * dc
            if v:
                p[mm] = v
            else:
                p.pop(mm, None)
    return True


def _evaluate_at(f: IntPoly, i: int, xi: int) -> IntPoly:
    out: IntPoly = {}
    for m, c in f.items():
        k = m[:i] + (0,) + m[i + 1:]
        out[k] = out.get(k, 0) + c * xi ** m[i]
    return {m: c for m, c in out.items() if c}


def _interpolate(h: IntPoly, i: int, xi: int) -> IntPoly:
    """Read each coefficient as a balanced base-xi number whose digits are the x_i coefficients."""
    out: IntPoly = {}
    half = xi // 2
    for m, c in h.items():
        e = 0
        while c:
            r = c % xi
            if r > half:
                r -= xi
            if r:
                out[m[:i] + (e,) + m[i + 1:]] = r
            c = (c - r) // xi
            e += 1
    return out


def _heugcd(f: IntPoly, g: IntPoly, n: int) -> Optional[IntPoly]:
    """gcd of two nonzero integer polynomials in n variables, or None when the heuristic fails."""
    cf, cg = _int_content(f), _int_content(g)
    cont = gcd(cf, cg)
    f = {m: c // cf for m, c in f.items()}
    g = {m: c // cg for m, c in g.items()}
    used = [i for i in range(n) if any(m[i] for m in f) or any(m[i] for m in g)]
    if not used:
        return {(0,) * n: cont}
    i = used[0]
    if not any(m[i] for m in f) or not any(m[i] for m in g):
        # x_i occurs on one side only: fold the gcd over that side's coefficients in x_i
        if any(m[i] for m in g):
            f, g = g, f
        parts: Dict[int, IntPoly] = {}
        for m, c in f.items():
            parts.setdefault(m[i], {})[m[:i] + (0,) + m[i + 1:]] = c
        acc = g
        for part in sorted(parts.values(), key=len):
            acc = _heugcd(acc, part, n)
            if acc is None:
                return None
            if len(acc) == 1 and not any(any(m) for m in acc):
                break
        c = _int_content(acc)
        return {m: v // c * cont for m, v in acc.items()}
    norm = min(max(abs(c) for c in f.values()), max(abs(c) for c in g.values()))
    xi = 2 * norm + 29
    for _ in range(6):
        fe, ge = _evaluate_at(f, i, xi), _evaluate_at(g, i, xi)
        if fe and ge:
            he = _heugcd(fe, ge, n)
            if he is not None:
                h = _interpolate(he, i, xi)
                if h:
                    c = _int_content(h)
                    h = {m: v // c for m, v in h.items()}
                    if _int_divides(f, h) and _int_divides(g, h):
                        return {m: v * cont for m, v in h.items()}
        xi = xi * 73794 * isqrt(isqrt(xi)) // 27011
    return None


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Greatest common divisor over Q, normalized to be primitive with positive lead."""
    if not a:
        return b.primitive()
    if not b:
        return a.primitive()
    gens = a.gens + tuple(g for g in b.gens if g not in a.gens)
    a, b = a.with_gens(gens), b.with_gens(gens)
    if a.is_constant() or b.is_constant():
        return Poly.one(gens)
    if len(a) == 1 or len(b) == 1:
        return _monomial_gcd(a, b)
    if not set(a.used_gens()) & set(b.used_gens()):
        return Poly.one(gens)
    x = _main_var(a, b)
    if a.degree(x) > 0 and b.degree(x) > 0:
        h = _heugcd(_to_int_poly(a), _to_int_poly(b), len(gens))
        if h is not None:
            return Poly(gens, h).primitive()
    if a.degree(x) <= 0:
        return poly_gcd(a, _content(b, x))
    if b.degree(x) <= 0:
        return poly_gcd(_content(a, x), b)
    # quick exits for exact divisibility
    if len(b) <= len(a):
        q, r = a.divmod(b)
        if not r:
            return b.primitive()
    else:
        q, r = b.divmod(a)
        if not r:
            return a.primitive()
    ca, cb = _content(a, x), _content(b, x)
    c = poly_gcd(ca, cb)
    pa, pb = a.divexact(ca), b.divexact(cb)
    if pa.degree(x) < pb.degree(x):
        pa, pb = pb, pa
    while pb and pb.degree(x) > 0:
        r = _prem(pa, pb, x)
        pa = pb
        if not r:
            pb = r
            break
        pb = r.divexact(_content(r, x)).primitive()
    if pb and pb.degree(x) <= 0:
        g = Poly.one(gens)
    else:
        g = pa.divexact(_content(pa, x))
    return (g * c).primitive()


class RatFunc:
    """num/den with gcd(num, den) = 1 and den primitive over Z with positive lead."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _reduced: bool = False):
        if not isinstance(num, Poly):
            num = Poly.const(as_rational(num))
        if den is None:
            den = Poly.one(num.gens)
        elif not isinstance(den, Poly):
            den = Poly.const(as_rational(den), num.gens)
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        gens = num.gens + tuple(g for g in den.gens if g not in num.gens)
        num, den = num.with_gens(gens), den.with_gens(gens)
        if not num:
            den = Poly.one(gens)
        elif not _reduced:
            if den.is_constant():
                num = num / den.constant_value()
                den = Poly.one(gens)
            else:
                g = poly_gcd(num, den)
                if not g.is_constant():
                    num, den = num.divexact(g), den.divexact(g)
                c = den.content()
                if den.stable_leading_coefficient() < 0:
                    c = -c
                num, den = num / c, den / c
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, p: Poly) -> "RatFunc":
        return cls(p, Poly.one(p.gens), _reduced=True)

    @classmethod
    def const(cls, c) -> "RatFunc":
        return cls.from_poly(Poly.const(c))

    @classmethod
    def var(cls, name: str) -> "RatFunc":
        return cls.from_poly(Poly.var(name))

    @property
    def gens(self):
        return self.num.gens

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_poly(self) -> Poly:
        if not self.is_polynomial():
            raise ValueError("not a polynomial")
        return self.num

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.num.constant_value()

    @staticmethod
    def _lift(other):
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, Poly):
            return RatFunc.from_poly(other)
        return RatFunc.const(as_rational(other))

    def __neg__(self):
        return RatFunc(-self.num, self.den, _reduced=True)

    def __add__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        if self.den.is_constant():
            return RatFunc(self.num * o.den + o.num, o.den, _reduced=True)
        if o.den.is_constant():
            return RatFunc(self.num + o.num * self.den, self.den, _reduced=True)
        g = poly_gcd(self.den, o.den)
        da, db = self.den.divexact(g), o.den.divexact(g)
        return RatFunc(self.num * db + o.num * da, da * o.den)

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
        if self.den.is_constant() and o.den.is_constant():
            return RatFunc(self.num * o.num, Poly.one(), _reduced=True)
        # cross-cancel to keep the gcd work small
        g1 = poly_gcd(self.num, o.den) if self.num else Poly.one()
        g2 = poly_gcd(o.num, self.den) if o.num else Poly.one()
        n1, d2 = self.num.divexact(g1), o.den.divexact(g1)
        n2, d1 = o.num.divexact(g2), self.den.divexact(g2)
        num, den = n1 * n2, d1 * d2
        c = den.content()
        if den.stable_leading_coefficient() < 0:
            c = -c
        return RatFunc(num / c, den / c, _reduced=True)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if not self.num:
            raise ZeroDivisionError("inverse of zero rational function")
        num, den = self.den, self.num
        c = den.content()
        if den.stable_leading_coefficient() < 0:
            c = -c
        return RatFunc(num / c, den / c, _reduced=True)

    def __truediv__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise ValueError("rational function powers must be integers")
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc(self.num ** n, self.den ** n, _reduced=True)

    def __eq__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def diff(self, name: str) -> "RatFunc":
        if self.den.is_constant():
            return RatFunc(self.num.diff(name), self.den, _reduced=True)
        n = self.num.diff(name) * self.den - self.num * self.den.diff(name)
        return RatFunc(n, self.den * self.den)

    def subs(self, mapping: Mapping[str, object]) -> "RatFunc":
        def lift(v):
            if isinstance(v, RatFunc):
                return v
            if isinstance(v, Poly):
                return RatFunc.from_poly(v)
            return RatFunc.const(v)

        rat = {k: lift(v) for k, v in mapping.items()}
        if all(v.den.is_constant() for v in rat.values()):
            polys = {k: v.num for k, v in rat.items()}
            den = self.den.subs(polys)
            if not den:
                raise ZeroDivisionError("substitution makes the denominator vanish")
            return RatFunc(self.num.subs(polys), den)
        return _subs_rational(self.num, rat) / _subs_rational(self.den, rat)

    def evaluate(self, point: Mapping[str, object]):
        d = self.den.evaluate(point)
        if not d:
            raise ZeroDivisionError("denominator vanishes at the point")
        return as_rational(Fraction(self.num.evaluate(point)) / d)

    def __str__(self):
        if self.den.is_constant():
            return self.num.to_str()
        n, d = self.num.to_str(), self.den.to_str()
        if len(self.num) > 1:
            n = f"({n})"
        if len(self.den) > 1 or any(ch in d for ch in "*/"):
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"RatFunc({str(self)!r})"


def _subs_rational(p: Poly, mapping: Mapping[str, RatFunc]) -> RatFunc:
    total = RatFunc.const(0)
    for m, c in p.terms.items():
        term = RatFunc.const(c)
        for g, e in zip(p.gens, m):
            if e:
                base = mapping[g] if g in mapping else RatFunc.from_poly(Poly.var(g))
                term = term * base ** e
        total = total + term
    return total

