"""Series solutions of h_x + h h_y = 0 and the curvature of the associated linear 3-web.

The web is given by the forms dy, -h dx and -(dy - h dx): two line pencils
and the integral lines of slope h.  Its curvature reduces to h_yy / h.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Optional

from . import webcurv
from .symbolic import JetSeries, Poly, SeriesError, to_poly

XY = ("x", "y")


class BurgersError(ValueError):
    pass


def initial_series(initial, N: int) -> JetSeries:
    """Univariate series in y from an expression string, a Poly or a series."""
    if isinstance(initial, JetSeries):
        if initial.variables != ("y",):
            raise BurgersError("initial data must be a series in y")
        return initial.truncate(N) if initial.cap > N else initial
    p = to_poly(initial) if isinstance(initial, str) else initial
    extra = set(p.used_gens()) - {"y"}
    if extra:
        raise BurgersError(f"initial data may only involve y, found {sorted(extra)}")
    return JetSeries.from_poly(p, ("y",), N)


@dataclass
class BurgersSolution:
    h: JetSeries
    initial: JetSeries
    s: Optional[int] = None

    @property
    def cap(self) -> int:
        return self.h.cap

    def residual(self) -> JetSeries:
        """h_x + h h_y, known through cap - 1."""
        hx, hy = self.h.diff("x"), self.h.diff("y")
        return hx + self.h.truncate(hx.cap) * hy

    def trace_ok(self) -> bool:
        on_axis = {(m[1],): c for m, c in self.h.terms.items() if m[0] == 0}
        return JetSeries(("y",), self.cap, on_axis) == self.initial.truncate(self.cap)


def solve_burgers(initial, N: int, s: Optional[int] = None) -> BurgersSolution:
    """Solve h = initial(y - h x) by graded fixed-point iteration."""
    if N < 1:
        raise BurgersError("order cap must be at least 1")
    g = initial_series(initial, N)
    if not g.constant_term():
        raise BurgersError("initial data must be nonzero at the origin")
    x = JetSeries.var("x", XY, N)
    y = JetSeries.var("y", XY, N)
    h = JetSeries.const(g.constant_term(), XY, N)
    # each pass fixes one more total degree; stop as soon as nothing changes
    for _ in range(N + 1):
        nxt = g.compose_univariate(y - h * x)
        if nxt == h:
            break
        h = nxt
    else:
        raise BurgersError("fixed-point iteration did not stabilize")
    return BurgersSolution(h, g, s)


def curvature_of_example(sol: BurgersSolution) -> JetSeries:
    if sol.cap < 2:
        raise SeriesError("curvature needs an order cap of at least 2")
    h = sol.h
    hyy = h.diff("y").diff("y")
    return hyy * h.truncate(hyy.cap).reciprocal()


def curvature_unreduced(sol: BurgersSolution) -> JetSeries:
    """(h_x h_y - h h_xy) / h^3, the form before using the PDE."""
    h = sol.h
    hx, hy = h.diff("x"), h.diff("y")
    hxy = hx.diff("y")
    c = hxy.cap
    h = h.truncate(c)
    return (hx.truncate(c) * hy.truncate(c) - h * hxy) / h ** 3


def vanishing_order(K: JetSeries):
    """Smallest total degree with a nonzero coefficient, or the string '≥ cap'."""
    v = K.valuation()
    return f"≥ {K.cap}" if v is None else v


def y_derivatives_at_origin(sol: BurgersSolution, kmax: int):
    """d^k h / dy^k at the origin for k = 0..kmax."""
    return [sol.h.coefficient((0, k)) * factorial(k) for k in range(kmax + 1)]


def curvature_ideal_check(sol: BurgersSolution, s: int):
    """(jets of K through degree s vanish, d^k_y h(0,0) = 0 for 2 <= k <= s + 2)."""
    K = curvature_of_example(sol)
    if K.cap < s:
        raise SeriesError("order cap too small for this s")
    jets_vanish = all(sum(m) > s for m in K.terms)
    derivs = y_derivatives_at_origin(sol, s + 2)
    return jets_vanish, all(not d for d in derivs[2:])


@dataclass
class CrossCheck:
    burgers_K: JetSeries
    web_K: JetSeries
    unit: Optional[JetSeries]
    order_burgers: object
    order_web: object

    @property
    def agree(self) -> bool:
        if self.order_burgers != self.order_web:
            return False
        if not self.burgers_K:
            return not self.web_K
        return self.unit is not None


def _unit_ratio(a: JetSeries, b: JetSeries) -> Optional[JetSeries]:
    """u with a = u b and u(0) != 0, through the cap left after cancelling b's order."""
    va, vb = a.valuation(), b.valuation()
    if va is None or vb is None or va != vb:
        return None
    # a = u b: solve degree by degree against the lowest homogeneous part of b
    cap = a.cap - vb
    n = len(a.variables)
    u = JetSeries(a.variables, cap, {})
    for d in range(cap + 1):
        # residual of degree vb + d must be matched by u_d * b_vb
        r = {m: c for m, c in (a - _pad(u, a.cap) * b).terms.items() if sum(m) == vb + d}
        if not r:
            continue
        b0 = {m: c for m, c in b.terms.items() if sum(m) == vb}
        q = _divide_homogeneous(r, b0, n)
        if q is None:
            return None
        u = JetSeries(a.variables, cap, {**u.terms, **q})
    if not u.constant_term():
        return None
    return u


def _pad(u: JetSeries, cap: int) -> JetSeries:
    return JetSeries(u.variables, cap, u.terms)


def _divide_homogeneous(r, b0, n):
    """Exact quotient of two homogeneous polynomials given as dicts, or None."""
    gens = tuple(f"v{i}" for i in range(n))
    num, den = Poly(gens, r), Poly(gens, b0)
    q, rem = num.divmod(den)
    if rem:
        return None
    return dict(q.terms)


def cross_check_with_webcurv(sol: BurgersSolution) -> CrossCheck:
    h = sol.h
    zero, one = JetSeries.const(0, XY, h.cap), JetSeries.const(1, XY, h.cap)
    res = webcurv.web_from_series_forms([(zero, one), (-h, zero), (h, -one)], h.cap)
    kw = res.K
    kb = curvature_of_example(sol)
    c = min(kw.cap, kb.cap)
    kw, kb = kw.truncate(c), kb.truncate(c)
    unit = _unit_ratio(kw, kb) if kb else None
    return CrossCheck(kb, kw, unit, vanishing_order(kb), vanishing_order(kw))
