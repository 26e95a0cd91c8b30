"""Linearizability tests for webs given by slopes.

A web admits a linearization exactly when there is an ODE
y'' = h3 p^3 + h2 p^2 + h1 p + h0 (p = y') having every leaf among its
solutions and whose L1 invariant vanishes.  Each foliation with slope p(x,y)
then satisfies p_x + p p_y = h3 p^3 + h2 p^2 + h1 p + h0.

Vertical leaves have no slope.  Such a family is given by its dual slope
q = dx/dy and checked in the swapped chart, where the same ODE reads
x'' = -(h3 + h2 q + h1 q^2 + h0 q^3).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from .symbolic import RatFunc, to_ratfunc

X, Y, P = "x", "y", "p"


class LinearizeError(ValueError):
    pass


def _rf(v) -> RatFunc:
    if isinstance(v, RatFunc):
        return v
    if isinstance(v, str):
        return to_ratfunc(v)
    return RatFunc.const(v)


@dataclass(frozen=True)
class Family:
    """One foliation: dy - slope dx, or dx - slope dy when ``dual``."""
    slope: RatFunc
    dual: bool = False

    @classmethod
    def parse(cls, text: str) -> "Family":
        text = text.strip()
        if text.startswith("dual:"):
            return cls(to_ratfunc(text[5:]), True)
        return cls(to_ratfunc(text))


def _families(slopes) -> List[Family]:
    return [s if isinstance(s, Family) else Family(_rf(s)) for s in slopes]


@dataclass(frozen=True)
class CubicODE:
    h3: RatFunc
    h2: RatFunc
    h1: RatFunc
    h0: RatFunc

    @classmethod
    def of(cls, *hs) -> "CubicODE":
        if len(hs) == 1:
            hs = tuple(hs[0])
        return cls(*(_rf(h) for h in hs))

    @property
    def coefficients(self) -> Tuple[RatFunc, ...]:
        return (self.h3, self.h2, self.h1, self.h0)

    def f(self) -> RatFunc:
        p = RatFunc.var(P)
        return ((self.h3 * p + self.h2) * p + self.h1) * p + self.h0

    def at(self, p: RatFunc) -> RatFunc:
        return ((self.h3 * p + self.h2) * p + self.h1) * p + self.h0

    def __sub__(self, other: "CubicODE") -> "CubicODE":
        return CubicODE(*(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def __str__(self):
        return "; ".join(str(h) for h in self.coefficients)


def total_derivative(g, f) -> RatFunc:
    """g_x + p g_y + f g_p: the derivative along solutions of y'' = f."""
    g, f = _rf(g), _rf(f)
    return g.diff(X) + RatFunc.var(P) * g.diff(Y) + f * g.diff(P)


def mvanish_residual(f) -> RatFunc:
    f = _rf(f)
    D = lambda g: total_derivative(g, f)  # noqa: E731
    f_p, f_y = f.diff(P), f.diff(Y)
    f_pp, f_py, f_yy = f_p.diff(P), f_p.diff(Y), f_y.diff(Y)
    Df_pp = D(f_pp)
    return (D(Df_pp) - 4 * D(f_py) + f_p * (4 * f_py - Df_pp)
            - 3 * f_y * f_pp + 6 * f_yy)


def slope_derivative(p) -> RatFunc:
    """d/dx of a slope field along its own leaves: p_x + p p_y."""
    p = _rf(p)
    return p.diff(X) + p * p.diff(Y)


def family_residual(fam: Family, ode: CubicODE) -> RatFunc:
    if fam.dual:
        q = fam.slope
        lhs = q.diff(Y) + q * q.diff(X)
        return lhs + ((ode.h0 * q + ode.h1) * q + ode.h2) * q + ode.h3
    return slope_derivative(fam.slope) - ode.at(fam.slope)


def solve_linear(rows: List[List[RatFunc]], rhs: List[RatFunc]) -> List[RatFunc]:
    """Gaussian elimination over the field of rational functions."""
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col]), None)
        if piv is None:
            raise LinearizeError("singular system")
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col].inverse()
        a[col] = [v * inv for v in a[col]]
        for i in range(n):
            if i != col and a[i][col]:
                m = a[i][col]
                a[i] = [v - m * w for v, w in zip(a[i], a[col])]
    return [a[i][n] for i in range(n)]


def _vander_row(p: RatFunc, k: int = 4):
    return [p ** e for e in range(k - 1, -1, -1)]


def _check_distinct(ps):
    for i in range(len(ps)):
        for j in range(i + 1, len(ps)):
            if ps[i] == ps[j]:
                raise LinearizeError(f"slopes not pairwise distinct: {i + 1} and {j + 1}")


@dataclass
class Fit:
    ode: CubicODE
    residuals: List[RatFunc]  # one per input slope

    @property
    def consistent(self) -> bool:
        return not any(self.residuals)


def vandermonde_fit(slopes) -> Fit:
    fams = _families(slopes)
    if len(fams) < 4:
        raise LinearizeError("a fit needs at least four slopes")
    if any(f.dual for f in fams[:4]):
        raise LinearizeError("the first four families must be given by slopes")
    ps = [f.slope for f in fams]
    _check_distinct(ps)
    hs = solve_linear([_vander_row(p) for p in ps[:4]], [slope_derivative(p) for p in ps[:4]])
    ode = CubicODE(*hs)
    return Fit(ode, [family_residual(f, ode) for f in fams])


def candidate_family_3web(slopes):
    """Cubics fitting three slopes: (particular, direction) of the affine line.

    Every cubic through the three constraints is particular + t * direction,
    where direction is the coefficient vector of (p - p1)(p - p2)(p - p3).
    """
    fams = _families(slopes)
    if len(fams) != 3 or any(f.dual for f in fams):
        raise LinearizeError("expected three slope families")
    ps = [f.slope for f in fams]
    _check_distinct(ps)
    h2, h1, h0 = solve_linear([_vander_row(p, 3) for p in ps], [slope_derivative(p) for p in ps])
    zero = RatFunc.const(0)
    p1, p2, p3 = ps
    direction = CubicODE(RatFunc.const(1), -(p1 + p2 + p3), p1 * p2 + p1 * p3 + p2 * p3, -(p1 * p2 * p3))
    return CubicODE(zero, h2, h1, h0), direction


def vandermonde_determinant(ps: Sequence[RatFunc]) -> RatFunc:
    d = RatFunc.const(1)
    for i in range(len(ps)):
        for j in range(i + 1, len(ps)):
            d = d * (ps[j] - ps[i])
    return d


def unique_fit(slopes, a: CubicODE, b: CubicODE) -> bool:
    """True when a and b cannot both fit four distinct slopes unless equal.

    Both fitting means the cubic a - b vanishes at four distinct values of p,
    which forces a == b because the Vandermonde determinant is nonzero.
    """
    ps = [f.slope for f in _families(slopes)][:4]
    diff = a - b
    both = all(not diff.at(p) for p in ps)
    if not both:
        return True
    return bool(vandermonde_determinant(ps)) and diff.is_zero()


@dataclass
class LinearizationReport:
    residuals: List[RatFunc]
    mvanish: RatFunc
    L2_zero: bool = True  # a CubicODE is cubic in p by construction
    notes: List[str] = field(default_factory=list)

    @property
    def L1_zero(self) -> bool:
        return not self.mvanish

    @property
    def verdict(self) -> bool:
        return not any(self.residuals) and self.L1_zero


def check_linearization(slopes, ode: CubicODE) -> LinearizationReport:
    fams = _families(slopes)
    res = [family_residual(f, ode) for f in fams]
    return LinearizationReport(res, mvanish_residual(ode.f()))
