"""Connection form and curvature of a planar 3-web.

A web is given by three 1-forms a_i dx + b_i dy (or by slopes p_i, meaning
dy - p_i dx).  After rescaling so that the forms sum to zero, the connection
rho = r dx + s dy is the unique 1-form with d w_i + rho ^ w_i = 0, and the
curvature K is defined by d rho = K w_1 ^ w_2.  Only the vanishing of K (and
its order of vanishing at a point) is independent of the chosen scaling.

With c_i = d(b_i)/dx - d(a_i)/dy and D = a_1 b_2 - a_2 b_1 the closed form is

    r = (c_1 a_2 - a_1 c_2) / D,   s = (b_2 c_1 - b_1 c_2) / D,
    K = (ds/dx - dr/dy) / D.

The same formulas run on RatFunc coefficients (symbolic path) and on
JetSeries coefficients (series path, used for webs that are only known as
truncated expansions).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Mapping, Optional, Sequence, Tuple

from .exterior import Chart, DiffForm, ext_d, wedge
from .symbolic import JetSeries, RatFunc, SeriesError, series_lift, to_ratfunc

COORDS = ("x", "y")


class WebError(ValueError):
    pass


def _rf(v) -> RatFunc:
    if isinstance(v, RatFunc):
        return v
    if isinstance(v, str):
        return to_ratfunc(v)
    return RatFunc.const(v)


def _align(*xs):
    """Bring series operands to their common (smallest) cap."""
    caps = [x.cap for x in xs if isinstance(x, JetSeries)]
    if not caps:
        return xs
    cap = min(caps)
    return tuple(x.truncate(cap) if isinstance(x, JetSeries) else x for x in xs)


def _mul(a, b):
    a, b = _align(a, b)
    return a * b


def _sub(a, b):
    a, b = _align(a, b)
    return a - b


def _div(a, b):
    a, b = _align(a, b)
    return a / b


def _is_zero_at(c, point) -> bool:
    if isinstance(c, JetSeries):
        return not c.constant_term()
    if not c:
        return True
    if point is None:
        return False
    return not c.num.evaluate(point)


@dataclass(frozen=True)
class Web3:
    forms: Tuple[Tuple[object, object], ...]
    point: Optional[Tuple[Fraction, Fraction]] = None
    slopes: Optional[Tuple[RatFunc, ...]] = None

    @classmethod
    def from_slopes(cls, slopes: Sequence, point=None) -> "Web3":
        ps = tuple(_rf(p) for p in slopes)
        if len(ps) != 3:
            raise WebError("a 3-web needs exactly three slopes")
        w = cls(tuple((-p, RatFunc.const(1)) for p in ps), _point(point), ps)
        w.check()
        return w

    @classmethod
    def from_forms(cls, forms: Sequence[Tuple[object, object]], point=None) -> "Web3":
        fs = tuple((a if isinstance(a, JetSeries) else _rf(a),
                    b if isinstance(b, JetSeries) else _rf(b)) for a, b in forms)
        if len(fs) != 3:
            raise WebError("a 3-web needs exactly three 1-forms")
        w = cls(fs, _point(point))
        w.check()
        return w

    @property
    def is_series(self) -> bool:
        return any(isinstance(c, JetSeries) for f in self.forms for c in f)

    def check(self):
        pt = None if self.point is None else dict(zip(COORDS, self.point))
        for i in range(3):
            for j in range(i + 1, 3):
                (ai, bi), (aj, bj) = self.forms[i], self.forms[j]
                det = _sub(_mul(ai, bj), _mul(aj, bi))
                if isinstance(det, RatFunc) and not det or _is_zero_at(det, pt):
                    what = "slopes not pairwise distinct" if self.slopes else "forms not pairwise transversal"
                    where = "" if isinstance(det, RatFunc) and not det else " at the base point"
                    raise WebError(f"{what}{where}: leaves {i + 1} and {j + 1}")

    def rescaled(self, units: Sequence) -> "Web3":
        fs = []
        for (a, b), u in zip(self.forms, units):
            fs.append((_mul(a, u), _mul(b, u)))
        return Web3.from_forms(fs, self.point)

    def permuted(self, order: Sequence[int]) -> "Web3":
        if self.slopes:
            return Web3.from_slopes([self.slopes[i] for i in order], self.point)
        return Web3.from_forms([self.forms[i] for i in order], self.point)


def _point(point):
    if point is None:
        return None
    if isinstance(point, Mapping):
        point = (point["x"], point["y"])
    return tuple(Fraction(c) for c in point)


def normalize_web(w: Web3):
    """Rescaled copies of the three forms, summing to zero identically."""
    if w.slopes:
        p1, p2, p3 = w.slopes
        lam = (p2 - p3, p3 - p1, p1 - p2)
    else:
        (a1, b1), (a2, b2), (a3, b3) = w.forms
        # kernel of the 2x3 coefficient matrix; scaled so its first entry is 1
        lam = [_sub(_mul(a2, b3), _mul(a3, b2)),
               _sub(_mul(a3, b1), _mul(a1, b3)),
               _sub(_mul(a1, b2), _mul(a2, b1))]
        lam = tuple(_div(v, lam[0]) for v in lam)
    out = tuple((_mul(l, a), _mul(l, b)) for l, (a, b) in zip(lam, w.forms))
    sa = _align(*(f[0] for f in out))
    sb = _align(*(f[1] for f in out))
    if sa[0] + sa[1] + sa[2] or sb[0] + sb[1] + sb[2]:
        raise WebError("normalization failed to produce a zero sum")
    return out


def _d(c, var):
    return c.diff(var)


def connection_form(forms) -> Tuple[object, object]:
    """(r, s) with rho = r dx + s dy, solved from the first two structure equations."""
    (a1, b1), (a2, b2), (a3, b3) = forms
    c = [_sub(_d(b, "x"), _d(a, "y")) for a, b in forms]
    det = _sub(_mul(a1, b2), _mul(a2, b1))
    r = _div(_sub(_mul(c[0], a2), _mul(a1, c[1])), det)
    s = _div(_sub(_mul(b2, c[0]), _mul(b1, c[1])), det)
    # third equation: r b3 - s a3 + c3 = 0
    third = _sub(_mul(r, b3), _sub(_mul(s, a3), c[2]))
    if third:
        raise WebError("connection inconsistent on the third form")
    return r, s


@dataclass
class CurvatureResult:
    normalized_forms: tuple
    rho: Tuple[object, object]
    K: object
    area: object  # coefficient of dx^dy in w1^w2

    def forms_as_diffforms(self):
        chart = Chart.coordinate(COORDS)
        ws = [DiffForm(chart, 1, {(0,): a, (1,): b}) for a, b in self.normalized_forms]
        rho = DiffForm(chart, 1, {(0,): self.rho[0], (1,): self.rho[1]})
        return chart, ws, rho

    def verify(self) -> dict:
        """Recheck the defining identities with the exterior calculus (symbolic path only)."""
        chart, ws, rho = self.forms_as_diffforms()
        w12 = wedge(ws[0], ws[1])
        return {
            "sum_zero": (ws[0] + ws[1] + ws[2]).is_zero(),
            "structure": all((ext_d(w) + wedge(rho, w)).is_zero() for w in ws),
            "curvature": (ext_d(rho) - w12 * self.K).is_zero(),
        }


def web_curvature(w: Web3) -> CurvatureResult:
    forms = normalize_web(w)
    r, s = connection_form(forms)
    (a1, b1), (a2, b2) = forms[0], forms[1]
    det = _sub(_mul(a1, b2), _mul(a2, b1))
    K = _div(_sub(_d(s, "x"), _d(r, "y")), det)
    return CurvatureResult(forms, (r, s), K, det)


def curvature_jet(w: Web3, point, N: int) -> JetSeries:
    """Taylor jet of K at ``point`` through total degree N (series in the shifts)."""
    K = web_curvature(w).K
    pt = dict(zip(COORDS, _point(point)))
    try:
        return series_lift(K, pt, N, COORDS)
    except SeriesError as e:
        raise WebError(f"K has a pole at {point}") from e


def jet_monomials(n: int) -> List[Tuple[int, int]]:
    """Exponents (i, j) of x^i y^j with i + j <= n in graded-lex order."""
    out = []
    for d in range(n + 1):
        for i in range(d, -1, -1):
            out.append((i, d - i))
    return out


def j3K(w: Web3, point) -> List[Fraction]:
    jet = curvature_jet(w, point, 3)
    return [Fraction(jet.coefficient(m)) for m in jet_monomials(3)]


def foliation_is_linear(p) -> RatFunc:
    """p_x + p p_y; zero exactly when the integral curves of y' = p are lines."""
    p = _rf(p)
    return p.diff("x") + p * p.diff("y")


def web_from_series_forms(forms, cap: int):
    """Curvature of a web whose form coefficients are truncated series at the origin."""
    lifted = []
    for a, b in forms:
        lifted.append(tuple(c if isinstance(c, JetSeries) else JetSeries.const(c, COORDS, cap) for c in (a, b)))
    return web_curvature(Web3.from_forms(lifted))
