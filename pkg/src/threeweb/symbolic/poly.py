"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`Poly` carries an ordered tuple of generator names and a dict that
maps exponent tuples to nonzero coefficients.  Coefficients are ``int`` or
:class:`fractions.Fraction`; both compare and hash consistently, and ints are
kept where possible because they are much cheaper.

Binary operations between polynomials over different generator tuples embed
both operands into the union of the generators (left operand's order first).
The canonical term order is graded lexicographic over the generator tuple.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple

Monomial = Tuple[int, ...]


def as_rational(c):
    """Coerce an int/Fraction/str into an exact coefficient (int when integral)."""
    if isinstance(c, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        return as_rational(Fraction(c.numerator, c.denominator))
    if isinstance(c, str):
        return as_rational(Fraction(c))
    raise TypeError(f"not an exact rational: {c!r}")


def _grlex_key(m: Monomial):
    return (sum(m), m)


class Poly:
    __slots__ = ("gens", "terms", "_hash")

    def __init__(self, gens: Sequence[str], terms: Mapping[Monomial, object] | None = None,
                 _trusted: bool = False):
        self.gens = tuple(gens)
        if _trusted:
            self.terms = terms  # type: ignore[assignment]
        else:
            n = len(self.gens)
            if len(set(self.gens)) != n:
                raise ValueError(f"duplicate generators in {self.gens}")
            clean: Dict[Monomial, object] = {}
            for m, c in (terms or {}).items():
                m = tuple(m)
                if len(m) != n or any(e < 0 for e in m):
                    raise ValueError(f"bad exponent vector {m} for generators {self.gens}")
                c = as_rational(c)
                if c:
                    clean[m] = clean.get(m, 0) + c
            self.terms = {m: c for m, c in clean.items() if c}
        self._hash = None

    # construction -------------------------------------------------------------------
    @classmethod
    def const(cls, c, gens: Sequence[str] = ()) -> "Poly":
        c = as_rational(c)
        gens = tuple(gens)
        return cls(gens, {(0,) * len(gens): c} if c else {}, _trusted=True)

    @classmethod
    def var(cls, name: str, gens: Sequence[str] | None = None) -> "Poly":
        gens = tuple(gens) if gens is not None else (name,)
        if name not in gens:
            raise ValueError(f"{name!r} is not among {gens}")
        m = tuple(1 if g == name else 0 for g in gens)
        return cls(gens, {m: 1}, _trusted=True)

    @classmethod
    def zero(cls, gens: Sequence[str] = ()) -> "Poly":
        return cls(tuple(gens), {}, _trusted=True)

    @classmethod
    def one(cls, gens: Sequence[str] = ()) -> "Poly":
        return cls.const(1, gens)

    @staticmethod
    def variables(names: Sequence[str]) -> Tuple["Poly", ...]:
        names = tuple(names)
        return tuple(Poly.var(n, names) for n in names)

    # embedding ----------------------------------------------------------------------
    def with_gens(self, gens: Sequence[str]) -> "Poly":
        """Re-express over ``gens``; every generator actually used must be present."""
        gens = tuple(gens)
        if gens == self.gens:
            return self
        idx = {g: i for i, g in enumerate(gens)}
        if len(idx) != len(gens):
            raise ValueError(f"duplicate generators in {gens}")
        used = self.used_gens()
        missing = [g for g in used if g not in idx]
        if missing:
            raise ValueError(f"cannot drop generators {missing} still in use")
        pos = [(idx[g], k) for k, g in enumerate(self.gens) if g in idx]
        n = len(gens)
        out = {}
        for m, c in self.terms.items():
            e = [0] * n
            for i, k in pos:
                e[i] = m[k]
            out[tuple(e)] = c
        return Poly(gens, out, _trusted=True)

    def used_gens(self) -> Tuple[str, ...]:
        """Generators with a nonzero exponent in some term, in generator order."""
        n = len(self.gens)
        seen = [False] * n
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    seen[i] = True
        return tuple(g for g, s in zip(self.gens, seen) if s)

    def trim(self) -> "Poly":
        return self.with_gens(self.used_gens())

    def _unify(self, other: "Poly"):
        if self.gens == other.gens:
            return self.gens, self.terms, other.terms
        gens = self.gens + tuple(g for g in other.gens if g not in self.gens)
        return gens, self.with_gens(gens).terms, other.with_gens(gens).terms

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly.const(as_rational(other), self.gens)

    # predicates ---------------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_value(self):
        """The constant term (also the value when the polynomial is constant)."""
        return self.terms.get((0,) * len(self.gens), 0)

    # arithmetic ---------------------------------------------------------------------
    def __neg__(self) -> "Poly":
        return Poly(self.gens, {m: -c for m, c in self.terms.items()}, _trusted=True)

    def __pos__(self) -> "Poly":
        return self

    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        gens, ta, tb = self._unify(other)
        if len(ta) < len(tb):
            ta, tb = tb, ta
        out = dict(ta)
        for m, c in tb.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly(gens, out, _trusted=True)

    __radd__ = __add__

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            try:
                c = as_rational(other)
            except TypeError:
                return NotImplemented
            if not c:
                return Poly.zero(self.gens)
            return Poly(self.gens, {m: v * c for m, v in self.terms.items()}, _trusted=True)
        gens, ta, tb = self._unify(other)
        if not ta or not tb:
            return Poly.zero(gens)
        if len(ta) < len(tb):
            ta, tb = tb, ta
        out: Dict[Monomial, object] = {}
        get = out.get
        for mb, cb in tb.items():
            for ma, ca in ta.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                v = get(m)
                out[m] = ca * cb if v is None else v + ca * cb
        return Poly(gens, {m: c for m, c in out.items() if c}, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        """Division by a nonzero rational, or exact division by a polynomial."""
        if isinstance(other, Poly):
            if other.is_constant() and other:
                return self * Fraction(1) / other.constant_value()
            return self.divexact(other)
        c = as_rational(other)
        if not c:
            raise ZeroDivisionError("polynomial division by zero")
        inv = Fraction(1, 1) / c
        return self * inv

    def __pow__(self, n: int) -> "Poly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = Poly.one(self.gens)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # comparison ---------------------------------------------------------------------
    def _canonical_items(self):
        items = []
        for m, c in self.terms.items():
            items.append((tuple(sorted((g, e) for g, e in zip(self.gens, m) if e)), c))
        return frozenset(items)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        if self.gens == other.gens:
            return self.terms == other.terms
        return self._canonical_items() == other._canonical_items()

    def __ne__(self, other) -> bool:
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_constant():
                self._hash = hash(self.constant_value())
            else:
                self._hash = hash(self._canonical_items())
        return self._hash

    # structure ----------------------------------------------------------------------
    def sorted_terms(self) -> list:
        """Terms in canonical order: graded lexicographic, largest first."""
        return sorted(self.terms.items(), key=lambda mc: _grlex_key(mc[0]), reverse=True)

    def leading_term(self):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        m = max(self.terms, key=_grlex_key)
        return m, self.terms[m]

    def leading_coefficient(self):
        return self.leading_term()[1]

    def stable_leading_coefficient(self):
        """Leading coefficient under grlex over the sorted generator names.

        Unlike :meth:`leading_coefficient` this does not depend on the order
        in which generators happen to be listed.
        """
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        perm = sorted(range(len(self.gens)), key=lambda i: self.gens[i])

        def key(m):
            e = tuple(m[i] for i in perm)
            return (sum(e), e)

        return self.terms[max(self.terms, key=key)]

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def min_total_degree(self) -> int:
        if not self.terms:
            return -1
        return min(sum(m) for m in self.terms)

    def degree(self, name: str) -> int:
        if name not in self.gens:
            return 0 if self.terms else -1
        if not self.terms:
            return -1
        i = self.gens.index(name)
        return max(m[i] for m in self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator:
        return iter(self.sorted_terms())

    def coefficients_in(self, name: str) -> Dict[int, "Poly"]:
        """View as a univariate polynomial in ``name``: exponent -> coefficient Poly."""
        if name not in self.gens:
            return {0: self} if self.terms else {}
        i = self.gens.index(name)
        buckets: Dict[int, Dict[Monomial, object]] = {}
        for m, c in self.terms.items():
            k = m[i]
            buckets.setdefault(k, {})[m[:i] + (0,) + m[i + 1:]] = c
        return {k: Poly(self.gens, t, _trusted=True) for k, t in buckets.items()}

    def coefficient_of(self, monomial: Mapping[str, int]):
        m = tuple(monomial.get(g, 0) for g in self.gens)
        if any(k not in self.gens for k, e in monomial.items() if e):
            return 0
        return self.terms.get(m, 0)

    # calculus and substitution ------------------------------------------------------
    def diff(self, name: str) -> "Poly":
        if name not in self.gens:
            return Poly.zero(self.gens)
        i = self.gens.index(name)
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                out[m[:i] + (e - 1,) + m[i + 1:]] = c * e
        return Poly(self.gens, out, _trusted=True)

    def subs(self, mapping: Mapping[str, object]) -> "Poly":
        """Simultaneously substitute polynomials (or rationals) for generators."""
        mapping = {k: v for k, v in mapping.items() if k in self.gens}
        if not mapping:
            return self
        keep = tuple(g for g in self.gens if g not in mapping)
        images = {k: (v if isinstance(v, Poly) else Poly.const(v, ())) for k, v in mapping.items()}
        target = keep
        for v in images.values():
            target = target + tuple(g for g in v.gens if g not in target)
        images = {k: v.with_gens(target) for k, v in images.items()}
        sub_idx = [(i, images[g]) for i, g in enumerate(self.gens) if g in images]
        keep_pos = [(i, target.index(g)) for i, g in enumerate(self.gens) if g not in images]
        n = len(target)
        # group terms by the exponents of substituted generators
        groups: Dict[Tuple[int, ...], Dict[Monomial, object]] = {}
        for m, c in self.terms.items():
            key = tuple(m[i] for i, _ in sub_idx)
            e = [0] * n
            for i, j in keep_pos:
                e[j] = m[i]
            groups.setdefault(key, {})[tuple(e)] = c
        powers: Dict[Tuple[int, int], Poly] = {}

        def power(k: int, e: int) -> Poly:
            key = (k, e)
            if key not in powers:
                powers[key] = Poly.one(target) if e == 0 else power(k, e - 1) * sub_idx[k][1]
            return powers[key]

        result = Poly.zero(target)
        for key, rest in groups.items():
            term = Poly(target, rest, _trusted=True)
            for k, e in enumerate(key):
                if e:
                    term = term * power(k, e)
            result = result + term
        return result

    def evaluate(self, point: Mapping[str, object]):
        """Exact value at a point assigning every used generator."""
        vals = []
        for g in self.gens:
            if g in point:
                vals.append(as_rational(point[g]))
            else:
                vals.append(None)
        total = 0
        for m, c in self.terms.items():
            t = c
            for v, e in zip(vals, m):
                if e:
                    if v is None:
                        raise KeyError("missing value for a generator in use")
                    t = t * v ** e
            total = total + t
        return as_rational(Fraction(total))

    def content(self):
        """Positive rational content: gcd of numerators over lcm of denominators."""
        from math import gcd
        num, den = 0, 1
        for c in self.terms.values():
            f = Fraction(c)
            num = gcd(num, f.numerator)
            den = den * f.denominator // gcd(den, f.denominator)
        return Fraction(num, den) if num else Fraction(0)

    def primitive(self) -> "Poly":
        """Integer coefficients with gcd 1 and positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        p = self / c
        if p.stable_leading_coefficient() < 0:
            p = -p
        return p

    def monic(self) -> "Poly":
        if not self.terms:
            return self
        return self / self.leading_coefficient()

    def divmod(self, divisor: "Poly"):
        """Multivariate division by one divisor in grlex order: (quotient, remainder)."""
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        gens, ta, tb = self._unify(divisor)
        lm, lc = max(tb.items(), key=lambda mc: _grlex_key(mc[0]))
        q: Dict[Monomial, object] = {}
        r: Dict[Monomial, object] = {}
        p = dict(ta)
        dterms = list(tb.items())
        while p:
            m = max(p, key=_grlex_key)
            c = p[m]
            if all(a >= b for a, b in zip(m, lm)):
                qm = tuple(a - b for a, b in zip(m, lm))
                qc = as_rational(Fraction(c) / lc)
                q[qm] = q.get(qm, 0) + qc
                for dm, dc in dterms:
                    mm = tuple(a + b for a, b in zip(qm, dm))
                    v = p.get(mm, 0) - qc * dc
                    if v:
                        p[mm] = v
                    else:
                        p.pop(mm, None)
            else:
                r[m] = c
                del p[m]
        return Poly(gens, q), Poly(gens, r)

    def divexact(self, divisor: "Poly") -> "Poly":
        q, r = self.divmod(divisor)
        if r:
            raise ArithmeticError("polynomial division is not exact")
        return q

    # printing -----------------------------------------------------------------------
    def to_str(self) -> str:
        """Canonical serialization: ``coef*x^a*y^b`` terms in grlex order."""
        if not self.terms:
            return "0"
        parts = []
        for k, (m, c) in enumerate(self.sorted_terms()):
            c = Fraction(c)
            neg = c < 0
            a = -c if neg else c
            factors = [g if e == 1 else f"{g}^{e}" for g, e in zip(self.gens, m) if e]
            coef = str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
            if factors and a == 1:
                body = "*".join(factors)
            else:
                body = "*".join([coef] + factors)
            if k == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f" - {body}" if neg else f" + {body}")
        return "".join(parts)

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"Poly({self.to_str()!r}, gens={self.gens})"


def poly_sum(polys: Iterable[Poly], gens: Sequence[str] = ()) -> Poly:
    acc: Dict[Monomial, object] = {}
    target = tuple(gens)
    polys = list(polys)
    for p in polys:
        for g in p.gens:
            if g not in target:
                target = target + (g,)
    for p in polys:
        for m, c in p.with_gens(target).terms.items():
            v = acc.get(m, 0) + c
            if v:
                acc[m] = v
            else:
                acc.pop(m, None)
    return Poly(target, acc, _trusted=True)
