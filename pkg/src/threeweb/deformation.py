"""Deformations of the flat path geometry on the projective plane.

The sl3 Maurer-Cartan coframe is read from a bundled chart file.  On top of
it we assemble the deformation matrix ``delta`` whose entries are built from
the deformation function ``t`` and its derivatives, and check

* the structure equation  d(delta) + delta^phi + phi^delta + delta^delta = 0,
* that the cubic ``sigma`` has differential in the span of omega and theta,
* the quartic obtained from the linearity condition, and
* that the two closed-form solutions of the linearity system are exact.

Scalars whose full differential is never written down (T_{-1}, T_{0,0}, ...)
are kept as free symbols.  A d^2 residual that can be absorbed by choosing
their differentials is reported as "requires prolongation" rather than as a
failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Tuple

from .exterior import Chart, DiffForm, ext_d, parse_chart, wedge
from .symbolic import Poly, RatFunc, to_poly, to_ratfunc

GENERATORS = ("omega", "theta", "eta", "phi11", "phi22", "phi01", "phi12", "phi02")

# matrix position -> generator name; (0,0) is eliminated by the trace
_ENTRY = {
    (2, 0): "theta", (1, 0): "omega", (2, 1): "eta",
    (1, 1): "phi11", (2, 2): "phi22",
    (0, 1): "phi01", (1, 2): "phi12", (0, 2): "phi02",
}

DISPLAYED = ("t", "T_0", "T_1", "A_2", "A_3", "A_4", "A_5")
UNDISPLAYED = ("T_{-1}", "T_{0,-1}", "T_{0,0}", "T_{1,-1}", "T_{1,0}",
               "A_{2,0}", "A_{3,0}", "A_{4,0}", "A_{5,0}")

HYPOTHESES = (
    "T_1 != 0 on the zero locus of t",
    "9*A_2^2 + 2*T_1*A_3 != 0 on the zero locus of t",
)


def _read(name: str) -> str:
    return resources.files("threeweb.data").joinpath(name).read_text()


def phi_matrix(chart: Chart) -> List[List[DiffForm]]:
    m = [[chart.zero(1) for _ in range(3)] for _ in range(3)]
    for (i, j), g in _ENTRY.items():
        m[i][j] = chart.gen(g)
    m[0][0] = -(m[1][1] + m[2][2])
    return m


def maurer_cartan_rules(chart: Chart) -> Dict[str, DiffForm]:
    """d of each generator from d(phi) = -phi^phi, expanded entrywise."""
    phi = phi_matrix(chart)
    out = {}
    for (i, j), g in _ENTRY.items():
        acc = chart.zero(2)
        for k in range(3):
            acc = acc - wedge(phi[i][k], phi[k][j])
        out[g] = acc
    return out


def build_sl3_coframe() -> Chart:
    """The flat sl3 coframe with its structure equations."""
    return parse_chart(_read("sl3.chart"))


def build_deformation_chart() -> Chart:
    """sl3 coframe plus the displayed derivation rules of the deformation scalars."""
    return parse_chart(_read("deformation.chart"))


def delta_matrix(chart: Chart) -> List[List[DiffForm]]:
    P = to_poly
    om, th, et = chart.gen("omega"), chart.gen("theta"), chart.gen("eta")
    p12 = chart.gen("phi12")
    d00 = om * P("1/3*T_1") + th * P("A_2")
    return [
        [d00,
         p12 * P("-t") + om * P("-(T_0 + 3*t*A_2)") + th * P("2*A_4") + et * P("-3*A_2"),
         om * P("t*A_3 + A_4") + th * P("A_5") + et * P("A_3")],
        [chart.zero(1), d00 * -2, om * P("-3*A_2") + th * P("2*A_3")],
        [chart.zero(1), om * P("t"), d00],
    ]


def _mat_wedge(a, b, chart):
    return [[_sum(chart, [wedge(a[i][k], b[k][j]) for k in range(3)]) for j in range(3)]
            for i in range(3)]


def _sum(chart, forms, degree=2):
    acc = chart.zero(degree)
    for f in forms:
        acc = acc + f
    return acc


def verify_fundast(chart: Chart | None = None) -> Dict[Tuple[int, int], DiffForm]:
    """Residual of the deformation structure equation, entry by entry (9 entries)."""
    chart = chart or build_deformation_chart()
    phi, delta = phi_matrix(chart), delta_matrix(chart)
    dp, pd, dd = _mat_wedge(delta, phi, chart), _mat_wedge(phi, delta, chart), _mat_wedge(delta, delta, chart)
    return {(i, j): ext_d(delta[i][j]) + dp[i][j] + pd[i][j] + dd[i][j]
            for i in range(3) for j in range(3)}


# the cubic sigma ----------------------------------------------------------------------

Z = ("Z0", "Z1", "Z2")


def _with_frame_vars(chart: Chart) -> Chart:
    """Adjoin formal Z^i with dZ^i = -sum_j phi_ij Z^j."""
    phi = phi_matrix(chart)
    for i, zi in enumerate(Z):
        acc = chart.zero(1)
        for j, zj in enumerate(Z):
            acc = acc - phi[i][j] * Poly.var(zj)
        chart.set_derivation(zi, acc)
    return chart


def sigma_poly() -> Poly:
    return to_poly("t*Z1^3 + T_1*Z1^2*Z2 + 6*A_2*Z1*Z2^2 - 2*A_3*Z2^3")


def d_sigma(chart: Chart | None = None) -> DiffForm:
    chart = _with_frame_vars(chart or build_deformation_chart())
    return chart.d_scalar(sigma_poly())


@dataclass
class SigmaReport:
    residual: Dict[str, Poly]            # generator -> coefficient outside span(omega, theta)
    z1sq_z0_mod_z2: Tuple[Poly, Poly]    # (omega, theta) coefficients of (Z1)^2 Z0 modulo Z2
    z1cube_mod_z2: Tuple[Poly, Poly]     # (omega, theta) coefficients of (Z1)^3 modulo Z2

    @property
    def ok(self) -> bool:
        return not self.residual


def _coeff_mod_z2(p: Poly, z0: int, z1: int) -> Poly:
    """Coefficient of (Z0)^z0 (Z1)^z1 after setting Z2 = 0."""
    p = p.subs({"Z2": 0})
    c = p.coefficients_in("Z0").get(z0, Poly.zero())
    return c.coefficients_in("Z1").get(z1, Poly.zero())


def verify_sigma_covariance(chart: Chart | None = None) -> SigmaReport:
    ds = d_sigma(chart)
    residual = {}
    for g in GENERATORS:
        if g in ("omega", "theta"):
            continue
        c = ds.coefficient(g)
        if c:
            residual[g] = c
    om, th = ds.coefficient("omega"), ds.coefficient("theta")
    return SigmaReport(
        residual=residual,
        z1sq_z0_mod_z2=(_coeff_mod_z2(om, 1, 2), _coeff_mod_z2(th, 1, 2)),
        z1cube_mod_z2=(_coeff_mod_z2(om, 0, 3), _coeff_mod_z2(th, 0, 3)),
    )


def linearity_quartic(chart: Chart | None = None) -> Poly:
    """(d sigma)^flat + 3 Z^0 sigma, with omega -> Z^1 and theta -> Z^2."""
    ds = d_sigma(chart)
    q = ds.coefficient("omega") * Poly.var("Z1") + ds.coefficient("theta") * Poly.var("Z2")
    return q + Poly.var("Z0") * sigma_poly() * 3


QUARTIC_DISPLAYED = {
    (4, 0): "T_{-1}",
    (3, 1): "T_{1,-1} + T_0",
    (2, 2): "3*T_{1,0} + 6*A_4 - 6*t*A_3",
    (1, 3): "A_5 - 9*A_2^2 - 2*T_1*A_3 + 9*A_{2,0}",
    (0, 4): "-2*A_{3,0}",
}

# the three equations, as (lhs, rhs)
LINEARITY_SYSTEM = (
    ("-t*A_3*T_{1,-1} + t^2*A_{3,0}", "-T_1*T_{-1}*A_3 + t*A_3*T_0"),
    ("-3*t*A_3*T_{1,0} + t*T_1*A_{3,0}", "-6*t^2*A_3^2 + 6*t*A_3*A_4 - 6*A_2*T_{-1}*A_3"),
    ("-9*t*A_3*A_{2,0} + 6*t*A_2*A_{3,0}",
     "-9*t*A_3*A_2^2 + 2*A_3^2*T_{-1} + t*A_3*A_5 - 2*t*A_3^2*T_1"),
)

SOLUTION_1 = {
    "T_{1,0}": "(6*T_{-1}*t*A_2 - 6*t^2*A_4 + 6*t^3*A_3 - T_1^2*T_{-1} + t*T_0*T_1 + t*T_{1,-1}*T_1)/(3*t^2)",
    "A_{2,0}": "(-2*A_3*T_{-1}*t + 2*T_1*t^2*A_3 - 6*A_2*T_1*T_{-1} - t^2*A_5 + 9*t^2*A_2^2"
               " + 6*t*A_2*T_{1,-1} + 6*t*A_2*T_0)/(9*t^2)",
    "A_{3,0}": "A_3*(-T_1*T_{-1} + t*T_0 + t*T_{1,-1})/t^2",
}

SOLUTION_2 = {
    "T_{-1}": "-t*(6*t^2*A_3 - 6*A_4*t + T_1*T_{1,-1} - 3*T_{1,0}*t + T_1*T_0)/(6*t*A_2 - T_1^2)",
    "A_{2,0}": "(12*t^2*A_3^2 + 54*t*A_2^3 - 12*t*A_3*A_4 + 48*t*A_2*T_1*A_3 - 6*t*A_3*T_{1,0}"
               " - 36*A_2*A_4*T_1 - 6*t*A_2*A_5 - 9*A_2^2*T_1^2 + 2*T_1*A_3*T_0 - 2*A_3*T_1^3"
               " + 36*A_2^2*T_{1,-1} + 2*T_1*A_3*T_{1,-1} + 36*T_0*A_2^2 - 18*T_1*T_{1,0}*A_2"
               " + A_5*T_1^2)/(9*(6*t*A_2 - T_1^2))",
    "A_{3,0}": "3*A_3*(2*T_1*t*A_3 - 2*T_1*A_4 - T_{1,0}*T_1 + 2*A_2*T_{1,-1} + 2*A_2*T_0)/(6*t*A_2 - T_1^2)",
}


@dataclass
class LinearityReport:
    quartic_mismatch: Dict[Tuple[int, int], Poly]
    divisibility_mismatch: List[int]
    solution_residuals: Dict[str, List[RatFunc]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (not self.quartic_mismatch and not self.divisibility_mismatch
                and all(not r for rs in self.solution_residuals.values() for r in rs))


def _quartic_coefficients(q: Poly) -> Dict[Tuple[int, int], Poly]:
    out = {}
    for (a, b) in QUARTIC_DISPLAYED:
        out[(a, b)] = q.coefficients_in("Z1").get(a, Poly.zero()).coefficients_in("Z2").get(b, Poly.zero())
    return out


def divisibility_conditions(q: Dict[Tuple[int, int], object]) -> List[RatFunc]:
    """Conditions for the quartic to equal sigma times a linear form a*Z1 + b*Z2.

    The outer coefficients fix a = q40/t and b = -q04/(2 A_3); the three
    middle coefficients give the conditions, scaled by -t*A_3 to clear
    denominators.
    """
    R = to_ratfunc
    t, T1, A2, A3 = R("t"), R("T_1"), R("A_2"), R("A_3")
    c = {k: RatFunc.from_poly(v) if isinstance(v, Poly) else v for k, v in q.items()}
    a = c[(4, 0)] / t
    b = -c[(0, 4)] / (A3 * 2)
    scale = -t * A3
    return [
        (c[(3, 1)] - T1 * a - t * b) * scale,
        (c[(2, 2)] - A2 * a * 6 - T1 * b) * scale,
        (c[(1, 3)] + A3 * a * 2 - A2 * b * 6) * scale,
    ]


def verify_linearity_solutions(chart: Chart | None = None) -> LinearityReport:
    q = linearity_quartic(chart)
    coeffs = _quartic_coefficients(q)
    mismatch = {k: coeffs[k] - to_poly(v) for k, v in QUARTIC_DISPLAYED.items() if coeffs[k] != to_poly(v)}
    # the divisibility conditions must be the displayed system (same scaling)
    conds = divisibility_conditions(coeffs)
    div_bad = []
    for i, ((lhs, rhs), cond) in enumerate(zip(LINEARITY_SYSTEM, conds)):
        if cond != to_ratfunc(lhs) - to_ratfunc(rhs):
            div_bad.append(i)
    residuals = {}
    for label, sol in (("solution_1", SOLUTION_1), ("solution_2", SOLUTION_2)):
        subs = {k: to_ratfunc(v) for k, v in sol.items()}
        residuals[label] = [
            (to_ratfunc(lhs) - to_ratfunc(rhs)).subs(subs) for lhs, rhs in LINEARITY_SYSTEM
        ]
    return LinearityReport(mismatch, div_bad, residuals)


# d^2 on the deformation chart ---------------------------------------------------------

@dataclass
class D2Entry:
    name: str
    residual: DiffForm          # d(d name) with undisplayed differentials set to zero
    absorbing: List[str]        # undisplayed scalars whose differentials could absorb it
    status: str                 # "identity" | "requires prolongation" | "inconsistent"


def _ideal_contains(form: DiffForm, gens: List[DiffForm]) -> bool:
    """Membership in the exterior ideal of independent 1-forms via wedge with their product."""
    basis: List[DiffForm] = []
    prod = None
    for g in gens:
        cand = g if prod is None else wedge(prod, g)
        if cand:
            basis.append(g)
            prod = cand
    if prod is None:
        return not form
    return not wedge(form, prod)


def check_deformation_d_squared(chart: Chart | None = None) -> List[D2Entry]:
    """d^2 on every scalar with a displayed differential."""
    chart = chart or build_deformation_chart()
    for s in UNDISPLAYED:
        if s not in chart.derivation:
            chart.set_derivation(s, chart.zero(1))
    out = []
    for name in DISPLAYED:
        dx = chart.derivation[name]
        res = ext_d(dx)
        betas, used = [], []
        for s in UNDISPLAYED:
            b = dx.map_coefficients(lambda c, s=s: c.diff(s))
            if b:
                betas.append(b)
                used.append(s)
        if not res:
            status = "identity"
        elif _ideal_contains(res, betas):
            status = "requires prolongation"
        else:
            status = "inconsistent"
        out.append(D2Entry(name, res, used, status))
    return out
