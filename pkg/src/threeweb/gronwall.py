"""Reduced structure equations of a linear 3-web with two linearizations.

The table lives on the normalized section M1 with coframe (omega, theta) and
the gauge T_1 = 1.  Every jet variable X carries dX = X_w omega + X_t theta
with polynomial coefficients, so the exterior derivative of any polynomial
follows by the chain rule.  On top of the table sit the curvature-ideal
towers for the general, one-pencil and two-pencil cases.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .exterior import Chart, DiffForm, check_d_squared, form_from_expr
from .symbolic import Poly, RatFunc, parse_expr, to_poly, to_ratfunc
from . import deformation


class TableError(ValueError):
    pass


VARIABLES = ("T_{0,0}", "T_{1,-1}", "T_{1,-1,-1}", "A_4", "A_{4,0}", "A_5", "A_{5,0}",
             "B_1", "B_2", "B_3", "B_4", "B_5", "B_6")

JET_ORDER = {
    "T_{1,-1}": 1, "A_4": 1, "A_5": 1,
    "T_{0,0}": 2, "A_{4,0}": 2, "A_{5,0}": 2, "T_{1,-1,-1}": 2,
    "B_1": 3, "B_2": 3, "B_3": 3,
    "B_4": 4, "B_5": 4,
    "B_6": 5,
}

# weight of phi11 in dX for the prolonged variables, and the names of the
# omega/theta coefficients (a name is either a data file entry or a variable)
PROLONGED = {
    "A_{4,0}": (9, "A_{4,0,-1}", "B_2"),
    "A_{5,0}": (9, "A_{5,0,-1}", "B_3"),
    "T_{1,-1,-1}": (9, "T_{1,-1,-1,-1}", "T_{1,-1,-1,0}"),
    "B_1": (12, "B_{1,-1}", "B_4"),
    "B_2": (12, "B_{2,-1}", "B_5"),
    "B_3": (12, "B_{3,-1}", "B_{3,0}"),
    "B_4": (15, "B_{4,-1}", "B_6"),
    "B_5": (15, "B_{5,-1}", "B_{5,0}"),
    "B_6": (18, "B_{6,-1}", "B_{6,0}"),
}

# gauge on M1; A_{2,0} and A_{3,0} come from the linearity of two foliations
GAUGE = {
    "t": "0", "T_1": "1", "T_{-1}": "0", "A_2": "0", "T_0": "0", "T_{1,0}": "0",
    "A_3": "1/2", "A_{2,0}": "(-T_{1,-1} + T_1^2 - A_5)/9", "A_{3,0}": "3*A_4",
}

# connection forms restricted to M1, as (omega, theta) coefficients with T_1 free
CONNECTION = {
    "omega": ("1", "0"),
    "theta": ("0", "1"),
    "eta": ("0", "0"),
    "phi01": ("0", "T_{0,0}/T_1"),
    "phi12": ("-3*A_4/T_1", "(T_{1,-1} - T_1^2 + A_5)/(3*T_1)"),
    "phi02": ("-(-8*T_{1,-1}*A_4 - 5*T_{0,0}*T_1 + A_{5,0}*T_1 - 8*A_5*A_4 - 7*A_4*T_1^2)/(4*T_1^2)",
              "(-30*A_{4,0}*T_1 - 3*T_{1,-1,-1}*T_1 + 2*T_1^4 - 2*T_1^2*A_5 + 5*T_{1,-1}^2"
              " + 108*A_4^2 + 5*T_{1,-1}*A_5 - T_1^2*T_{1,-1})/(9*T_1^2)"),
    "phi11": ("(-4*T_{1,-1} + 1 - A_5)/9", "A_4"),
}
PHI11_MINUS_PHI22 = ("(-T_{1,-1} + T_1^2 - A_5)/(3*T_1)", "3*A_4/T_1")

# dT_{0,0} and the derivative of T_{1,-1} before restriction
T00_RULE = ("-T_{0,0}*(-7*T_{1,-1} + 4*T_1^2 - 4*A_5)/(3*T_1)", "(-12*T_{0,0}*A_4 + B_1*T_1)/T_1")
T1M1_RULE = ("T_{1,-1}*(4*phi11 + 2*phi22) - 3*t*phi02 - 2*T_1*phi01 + 3*T_{-1}*phi12"
             " + T_{1,-1,-1}*omega + T_{1,-1,0}*theta + T_{1,-1,1}*eta")
T1M1_EXTRA = {
    "T_{1,-1,0}": "-(-5*T_{0,0}*T_1 + A_{5,0}*T_1 - 8*A_5*A_4 - 20*T_{1,-1}*A_4 - 7*A_4*T_1^2)/(4*T_1)",
    "T_{1,-1,1}": "5*T_{1,0} + 12*A_4 - 12*t*A_3",
}


def _canon(p: Poly) -> Poly:
    return p.with_gens(VARIABLES)


def _zero() -> Poly:
    return Poly.zero(VARIABLES)


# bundled data -------------------------------------------------------------------------

DATA_PACKAGE = "threeweb.data.gronwall"


def _data_text(fname: str) -> str:
    return resources.files(DATA_PACKAGE).joinpath(fname).read_text()


def sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def data_manifest() -> Dict[str, str]:
    out = {}
    for line in _data_text("MANIFEST").splitlines():
        if line.strip():
            digest, fname = line.split()
            out[fname] = digest
    return out


def parse_poly_records(text: str) -> List[Tuple[str, RatFunc]]:
    """Read ``name/gens/num/den`` records of the canonical data format."""
    records, cur = [], {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if key == "name" and cur:
            records.append(cur)
            cur = {}
        cur[key] = value
    if cur:
        records.append(cur)
    out = []
    for r in records:
        missing = {"name", "gens", "num", "den"} - set(r)
        if missing:
            raise TableError(f"record {r.get('name', '?')!r} lacks {sorted(missing)}")
        gens = tuple(r["gens"].split())
        num = to_poly(r["num"]).with_gens(gens)
        den = to_poly(r["den"]).with_gens(gens)
        out.append((r["name"], RatFunc(num, den)))
    return out


def format_poly_record(name: str, value, gens: Sequence[str]) -> str:
    if isinstance(value, Poly):
        value = RatFunc.from_poly(value)
    used = set(value.num.used_gens()) | set(value.den.used_gens())
    g = tuple(x for x in gens if x in used) or tuple(gens[:1])
    num = value.num.with_gens(g) if value.num else Poly.zero(g)
    return (f"name: {name}\ngens: {' '.join(g)}\n"
            f"num: {num.to_str()}\nden: {value.den.with_gens(g).to_str()}\n")


def load_data(fname: str, verify: bool = True) -> Dict[str, RatFunc]:
    """Entries of one bundled data file; the content hash is checked against MANIFEST."""
    text = _data_text(fname)
    if verify:
        want = data_manifest().get(fname)
        if want is None:
            raise TableError(f"{fname} is not listed in the data manifest")
        if sha256(text) != want:
            raise TableError(f"content hash mismatch for {fname}")
    return dict(parse_poly_records(text))


def prolongation_data() -> Dict[str, RatFunc]:
    out: Dict[str, RatFunc] = {}
    for fname in sorted(data_manifest()):
        if fname.startswith("prolong_"):
            out.update(load_data(fname))
    return out


def _gauge_map() -> Dict[str, RatFunc]:
    return {k: to_ratfunc(v) for k, v in GAUGE.items()}


def at_gauge(f) -> Poly:
    """Restrict a rational function of the general-T_1 data to T_1 = 1."""
    if isinstance(f, str):
        f = to_ratfunc(f)
    if isinstance(f, Poly):
        f = RatFunc.from_poly(f)
    g = f.subs({"T_1": RatFunc.const(1)})
    if not g.is_polynomial():
        raise TableError(f"not polynomial at T_1 = 1: {g}")
    p = g.num
    stray = [v for v in p.used_gens() if v not in VARIABLES]
    if stray:
        raise TableError(f"unresolved symbols {stray}")
    return _canon(p)


# the table ----------------------------------------------------------------------------

OneForm = Tuple[Poly, Poly]


@dataclass
class ReducedTable:
    variables: Tuple[str, ...]
    derivatives: Dict[str, OneForm]
    structure: Dict[str, Poly]  # d(omega) and d(theta) as multiples of omega^theta
    jet_order: Dict[str, int]
    raw: Dict[str, Tuple[int, Poly, Poly]] = field(default_factory=dict)
    connection: Dict[str, OneForm] = field(default_factory=dict)

    # calculus -------------------------------------------------------------------------
    def d(self, p: Poly) -> OneForm:
        """omega and theta components of dp (chain rule through the table)."""
        pw, pt = _zero(), _zero()
        for v in p.used_gens():
            if v not in self.derivatives:
                raise TableError(f"no derivative rule for {v!r}")
            dv = p.diff(v)
            w, t = self.derivatives[v]
            pw = pw + dv * w
            pt = pt + dv * t
        return _canon(pw), _canon(pt)

    def d2_coefficient(self, form: OneForm) -> Poly:
        """c with d(a omega + b theta) = c omega^theta."""
        a, b = form
        aw, at = self.d(a)
        bw, bt = self.d(b)
        return _canon(bw - at + a * self.structure["omega"] + b * self.structure["theta"])

    def chart(self) -> Chart:
        """The same equations as an exterior-algebra coframe chart."""
        ch = Chart.coframe(("omega", "theta"), scalar_vars=self.variables)
        ow = DiffForm(ch, 2, {(0, 1): self.structure["omega"]})
        tw = DiffForm(ch, 2, {(0, 1): self.structure["theta"]})
        ch.set_d_rule("omega", ow)
        ch.set_d_rule("theta", tw)
        for v in self.variables:
            w, t = self.derivatives[v]
            ch.set_derivation(v, DiffForm(ch, 1, {(0,): w, (1,): t}))
        return ch

    # serialization ----------------------------------------------------------------------
    def to_text(self) -> str:
        lines = ["# reduced derivation table", f"variables: {' '.join(self.variables)}"]
        lines.append("jet_order: " + " ".join(f"{v}={self.jet_order[v]}" for v in self.variables))
        for g in ("omega", "theta"):
            lines.append(f"d {g}: {self.structure[g].to_str()}")
        for v in self.variables:
            w, t = self.derivatives[v]
            lines.append(f"{v} omega: {w.to_str()}")
            lines.append(f"{v} theta: {t.to_str()}")
        body = "\n".join(lines) + "\n"
        return body + f"sha256: {sha256(body)}\n"

    @classmethod
    def from_text(cls, text: str) -> "ReducedTable":
        body, sep, tail = text.rpartition("sha256:")
        if not sep:
            raise TableError("missing content hash")
        if sha256(body) != tail.strip():
            raise TableError("content hash mismatch; refusing to load the table")
        variables, jet, structure, derivs = None, {}, {}, {}
        for line in body.splitlines():
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition(": ")
            if key == "variables":
                variables = tuple(value.split())
            elif key == "jet_order":
                for item in value.split():
                    k, _, n = item.rpartition("=")
                    jet[k] = int(n)
            elif key.startswith("d "):
                structure[key[2:]] = _canon(to_poly(value))
            else:
                v, _, direction = key.rpartition(" ")
                derivs.setdefault(v, [None, None])[0 if direction == "omega" else 1] = _canon(to_poly(value))
        if variables is None:
            raise TableError("missing variables line")
        return cls(variables, {v: tuple(derivs[v]) for v in variables}, structure, jet)

    def content_hash(self) -> str:
        return sha256(self.to_text())

    def __eq__(self, other):
        if not isinstance(other, ReducedTable):
            return NotImplemented
        return (self.variables == other.variables and self.derivatives == other.derivatives
                and self.structure == other.structure and self.jet_order == other.jet_order)


def _oneform(pair, scalars=None) -> OneForm:
    w, t = (to_ratfunc(s) if isinstance(s, str) else s for s in pair)
    if scalars:
        w, t = w.subs(scalars), t.subs(scalars)
    return at_gauge(w), at_gauge(t)


def _pullback(form: DiffForm, images: Mapping[str, OneForm], scalars: Mapping[str, RatFunc]) -> OneForm:
    """Restrict a 1-form on the deformation frame bundle to M1."""
    w, t = _zero(), _zero()
    for (i,), c in form.comps.items():
        name = form.chart.generators[i]
        if name not in images:
            raise TableError(f"connection symbol {name!r} left unresolved")
        c = RatFunc.from_poly(c) if isinstance(c, Poly) else c
        c = at_gauge(c.subs(scalars))
        iw, it = images[name]
        w, t = w + c * iw, t + c * it
    return _canon(w), _canon(t)


def _pullback2(form: DiffForm, images: Mapping[str, OneForm], scalars) -> Poly:
    """Coefficient of omega^theta of a restricted 2-form."""
    out = _zero()
    for (i, j), c in form.comps.items():
        gi, gj = form.chart.generators[i], form.chart.generators[j]
        (aw, at), (bw, bt) = images[gi], images[gj]
        c = RatFunc.from_poly(c) if isinstance(c, Poly) else c
        out = out + at_gauge(c.subs(scalars)) * (aw * bt - at * bw)
    return _canon(out)


def connection_images() -> Dict[str, OneForm]:
    imgs = {k: _oneform(v) for k, v in CONNECTION.items()}
    dw, dt = _oneform(PHI11_MINUS_PHI22)
    w11, t11 = imgs["phi11"]
    imgs["phi22"] = (_canon(w11 - dw), _canon(t11 - dt))
    return imgs


def assemble_reduced_table() -> ReducedTable:
    """Build the reduced derivation table from the bundled data."""
    scalars = _gauge_map()
    images = connection_images()
    data = prolongation_data()
    sl3 = deformation.build_deformation_chart()

    structure = {g: _pullback2(sl3.d_rules[g], images, scalars) for g in ("omega", "theta")}
    derivs: Dict[str, OneForm] = {}
    raw: Dict[str, Tuple[int, Poly, Poly]] = {}

    # step (c): first-order variables by restricting the frame-bundle rules
    for v in ("A_4", "A_5"):
        derivs[v] = _pullback(sl3.derivation[v], images, scalars)
    t_scalars = dict(scalars)
    t_scalars.update({k: to_ratfunc(s).subs(scalars) for k, s in T1M1_EXTRA.items()})
    t_form = form_from_expr(sl3, parse_expr(T1M1_RULE))
    derivs["T_{1,-1}"] = _pullback(t_form, images, t_scalars)

    phi_w, phi_t = images["phi11"]

    def weighted(v, weight, a, b):
        x = Poly.var(v, VARIABLES)
        raw[v] = (weight, a, b)
        derivs[v] = (_canon(a + weight * x * phi_w), _canon(b + weight * x * phi_t))

    a, b = _oneform(T00_RULE)
    weighted("T_{0,0}", 9, a, b)
    for v, (weight, wname, tname) in PROLONGED.items():
        coeffs = []
        for name in (wname, tname):
            if name in VARIABLES:
                coeffs.append(Poly.var(name, VARIABLES))
            elif name in data:
                coeffs.append(at_gauge(data[name]))
            else:
                raise TableError(f"missing prolongation datum {name!r}")
        weighted(v, weight, *coeffs)

    missing = [v for v in VARIABLES if v not in derivs]
    if missing:
        raise TableError(f"no rule for {missing}")
    return ReducedTable(VARIABLES, {v: derivs[v] for v in VARIABLES}, structure,
                        dict(JET_ORDER), raw, images)


# validation ---------------------------------------------------------------------------

@dataclass
class ClosureReport:
    verdict: bool
    residuals: Dict[str, Poly]
    eq6: Optional[Poly] = None
    eq6_terms: int = 0
    eq6_degree: int = 0
    eq6_hash: str = ""
    details: Dict[str, object] = field(default_factory=dict)


def eq6_hash(p: Poly) -> str:
    return sha256(_canon(p).to_str())


def validate_table(t: ReducedTable, use_chart: bool = False) -> ClosureReport:
    """d(dX) for every table variable; all but B_6 must vanish, B_6 yields Eq_6."""
    residuals: Dict[str, Poly] = {}
    if use_chart:
        ch = t.chart()
        for v, form in check_d_squared(ch, t.variables).items():
            residuals[v] = _canon(form.comps.get((0, 1), _zero())) if form.comps else _zero()
    else:
        for v in t.variables:
            residuals[v] = t.d2_coefficient(t.derivatives[v])
    eq6 = residuals.get("B_6", _zero())
    ok = all(not r for v, r in residuals.items() if v != "B_6") and bool(eq6)
    return ClosureReport(ok, residuals, eq6, len(eq6), eq6.total_degree() if eq6 else -1,
                         eq6_hash(eq6))


# leading-order relations --------------------------------------------------------------

# (variable, direction, displayed leading part) with T_1 = 1; A_{4,0} and A_{5,0}
# carry the first two relations (their omega coefficients are the new data)
LEADING_RELATIONS = (
    ("A_{4,0}", "omega", "-1/2*B_1"),
    ("A_{5,0}", "omega", "B_2"),
    ("T_{1,-1,-1}", "omega", "1/4*(3*B_3 + 5*B_1)"),
    ("T_{1,-1,-1}", "theta", "-1/4*B_2"),
    ("B_2", "omega", "-1/2*B_4 - 10/3*B_2"),
    ("B_3", "omega", "B_5 + 1/2*B_1 - 8/3*B_3"),
    ("B_3", "theta", "-3/2*B_4 - 5*B_2"),
    ("B_4", "omega", "-8/3*B_4"),
    ("B_5", "omega", "-1/2*B_6 - 4*B_5"),
    ("B_5", "theta", "B_4 + 26/9*B_2"),
)


@dataclass
class LeadingEntry:
    variable: str
    direction: str
    leading: Poly
    top_order: int
    difference: Poly
    graded_ok: bool  # difference lies in the ring of strictly lower-order variables
    ok: bool  # difference lies in that ring plus the ideal of variables below the lead
    offenders: Tuple[str, ...]


def leading_term_check(t: ReducedTable, use_raw: bool = True) -> List[LeadingEntry]:
    """Compare each prolongation coefficient with its displayed leading part.

    Two readings of "mod lower order terms" are reported.  ``graded_ok``
    demands that the difference involve only variables of jet order below the
    top order of the leading part.  ``ok`` also admits products that contain a
    variable of order below every variable of the leading part (such as
    T_{1,-1}*B_4); the displayed linear part must then match exactly.
    By default the comparison uses the coefficients before the phi11-weight
    terms are folded in, which is what the relations name.
    """
    out = []
    for v, direction, text in LEADING_RELATIONS:
        lead = _canon(to_poly(text))
        orders = [t.jet_order[g] for g in lead.used_gens()]
        top, low = max(orders), min(orders)
        k = 0 if direction == "omega" else 1
        entry = t.raw[v][1 + k] if use_raw and v in t.raw else t.derivatives[v][k]
        diff = _canon(entry - lead)
        graded = not any(t.jet_order[g] >= top for g in diff.used_gens())
        symbol = diff.subs({g: 0 for g in t.variables if t.jet_order[g] < low})
        offenders = tuple(g for g in symbol.used_gens())
        out.append(LeadingEntry(v, direction, lead, top, diff, graded, not offenders, offenders))
    return out


# curvature and ideal towers -----------------------------------------------------------

CASES = ("general", "one_pencil", "two_pencil")

WEB_CURVATURE = "-(4*T_{1,-1}*A_4 + A_{5,0}*T_1 + 5*A_4*T_1^2 + 3*T_{0,0}*T_1 - 8*A_5*A_4)/(2*T_1^2)"


def curvature_K(case: str = "general") -> Poly:
    """Web curvature on M1 at T_1 = 1; in the two-pencil case after the pencil relations."""
    k = at_gauge(WEB_CURVATURE)
    if case == "two_pencil":
        return reduce_poly(k, two_pencil_relations(level=1))
    if case not in CASES:
        raise TableError(f"unknown case {case!r}")
    return k


def _fixpoint(mapping: Dict[str, Poly]) -> Dict[str, Poly]:
    """Make every image free of the mapped variables (the map must be triangular)."""
    out = dict(mapping)
    for _ in range(len(out) + 1):
        nxt = {k: _canon(v.subs(out)) for k, v in out.items()}
        if nxt == out:
            return out
        out = nxt
    raise TableError("substitution map is not triangular")


def reduce_poly(p: Poly, mapping: Mapping[str, Poly]) -> Poly:
    return _canon(p.subs(mapping)) if mapping else _canon(p)


def solve_linear_for(p: Poly, var: str) -> Tuple[Fraction, Poly]:
    """Write p = u*var + r with u a nonzero rational; return (u, -r/u)."""
    coeffs = p.coefficients_in(var)
    if set(coeffs) != {0, 1} and set(coeffs) != {1}:
        raise TableError(f"generator is not linear in {var}")
    u = coeffs[1]
    if not u.is_constant():
        raise TableError(f"coefficient of {var} is not a rational constant: {u}")
    u = Fraction(u.constant_value())
    rest = coeffs.get(0, _zero())
    return u, _canon(-rest / u)


def _span_coefficients(target: Poly, basis: Sequence[Poly]) -> Optional[List[Fraction]]:
    """Rational x with target = sum x_i basis_i, or None."""
    monos = set(target.terms)
    for b in basis:
        monos |= set(b.terms)
    rows = [[Fraction(b.terms.get(m, 0)) for b in basis] + [Fraction(target.terms.get(m, 0))]
            for m in sorted(monos)]
    n, r, pivots = len(basis), 0, []
    for col in range(n):
        p = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][col]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    if any(row[-1] for row in rows[r:]):
        return None
    return [rows[pivots.index(j)][-1] if j in pivots else Fraction(0) for j in range(n)]


@dataclass
class Match:
    label: str
    scale: Optional[Fraction]  # displayed = scale * engine component
    component: str
    ok: bool
    difference: Optional[Poly] = None


@dataclass
class IdealTower:
    case: str
    generators: List[Tuple[str, Poly]]
    solved: List[Tuple[str, Poly]]
    units: List[Fraction]
    substitutions: Dict[str, Poly]
    matches: List[Match] = field(default_factory=list)
    relations: List[Tuple[str, Poly]] = field(default_factory=list)

    def mapping(self) -> Dict[str, Poly]:
        m = dict(self.substitutions)
        m.update(self.solved)
        return _fixpoint(m)

    @property
    def solved_map(self) -> List[Tuple[str, Poly]]:
        return list(self.solved)


def reduce(p: Poly, tower: IdealTower) -> Poly:
    """Normal form of p modulo the tower's ideal (triangular substitution)."""
    return reduce_poly(p, tower.mapping())


_TABLE_CACHE: Dict[str, ReducedTable] = {}


def default_table() -> ReducedTable:
    if "t" not in _TABLE_CACHE:
        _TABLE_CACHE["t"] = assemble_reduced_table()
    return _TABLE_CACHE["t"]


def _components(table: ReducedTable, p: Poly, mapping) -> List[Tuple[str, Poly]]:
    w, t = table.d(p)
    return [("omega", reduce_poly(w, mapping)), ("theta", reduce_poly(t, mapping))]


def _displayed(fname: str) -> Dict[str, Poly]:
    return {k: at_gauge(v) for k, v in load_data(fname).items()}


def pencil_chain(table: ReducedTable, start: Sequence[str] = ("T_{0,0}",)):
    """Variables forced to vanish by successive derivatives of start = 0.

    Returns the zero substitutions and any further relations met on the way
    (derivative components that are not a single variable).
    """
    zero = {v: _zero() for v in start}
    relations: List[Tuple[str, Poly]] = []
    queue = list(start)
    while queue:
        v = queue.pop(0)
        for direction, c in _components(table, Poly.var(v, VARIABLES), zero):
            if not c:
                continue
            used = c.used_gens()
            if len(c) == 1 and len(used) == 1 and c.total_degree() == 1:
                if used[0] not in zero:
                    zero[used[0]] = _zero()
                    queue.append(used[0])
            else:
                relations.append((f"d{v}/{direction}", c))
    return zero, relations


# displayed generators per case: (file, [(label, solved variable)]) per level
TOWER_LAYOUT = {
    "general": [
        ("general_K12.poly", [("K_1", "B_2"), ("K_2", "B_1")]),
        ("general_K34.poly", [("K_3", "B_5"), ("K_4", "B_4")]),
        ("general_K5.poly", [("K_5", "B_6")]),
    ],
    "one_pencil": [
        ("one_pencil_K12.poly", [("K_1", "B_2"), ("K_2", "B_3")]),
        ("one_pencil_K3.poly", [("K_3", "B_5")]),
    ],
}


def build_ideal_tower(case: str, table: Optional[ReducedTable] = None) -> IdealTower:
    """Derive the curvature ideals by differentiating K and reducing mod the previous ideal."""
    table = table or default_table()
    if case == "two_pencil":
        return _two_pencil_tower(table)
    if case not in TOWER_LAYOUT:
        raise TableError(f"unknown case {case!r}")
    subs, relations = pencil_chain(table) if case == "one_pencil" else ({}, [])
    k = reduce_poly(curvature_K("general"), subs)
    u, sol = solve_linear_for(k, "A_{5,0}")
    tower = IdealTower(case, [("K", k)], [("A_{5,0}", sol)], [u], subs, relations=relations)
    last = [("K", k)]
    for fname, entries in TOWER_LAYOUT[case]:
        mapping = tower.mapping()
        comps = []
        for label, g in last:
            for direction, c in _components(table, g, mapping):
                if c:
                    comps.append((f"d{label}/{direction}", c))
        shown = _displayed(fname)
        new = []
        for label, var in entries:
            target = reduce_poly(shown[label], mapping)
            match = None
            for name, c in comps:
                x = _span_coefficients(target, [c])
                if x is not None and x[0]:
                    match = Match(label, x[0], name, True)
                    new.append((label, _canon(c * x[0]), var))
                    break
            if match is None:
                coeffs = _span_coefficients(target, [c for _, c in comps])
                match = Match(label, None, "span" if coeffs else "", False, target)
                new.append((label, target, var))
            tower.matches.append(match)
        for label, g, var in new:
            g = reduce_poly(g, tower.mapping())
            u, sol = solve_linear_for(g, var)
            tower.generators.append((label, g))
            tower.solved.append((var, sol))
            tower.units.append(u)
        # every component of this level must lie in the new ideal
        mapping = tower.mapping()
        for name, c in comps:
            if reduce_poly(c, mapping):
                tower.matches.append(Match(name, None, name, False, reduce_poly(c, mapping)))
        last = [(label, g) for label, g, _ in new]
    return tower


# two pencils ----------------------------------------------------------------------------

def two_pencil_relations(level: int = 4) -> Dict[str, Poly]:
    """Displayed two-pencil substitutions: 1 = A_{5,0}, T_{1,-1,-1}; 2 adds B_2, B_3;
    3 adds B_4, B_5; 4 adds B_6."""
    files = ["two_pencil_12.poly", "two_pencil_34.poly", "two_pencil_56.poly", "two_pencil_B6.poly"]
    out: Dict[str, Poly] = {}
    for fname in files[:level]:
        out.update(_displayed(fname))
    return _fixpoint(out)


def _solve_system(eqs: List[Poly], targets: Sequence[str]) -> Tuple[Dict[str, Poly], List[Poly]]:
    """Solve equations linear in ``targets`` with rational pivots; return solution and leftovers."""
    eqs = [e for e in eqs if e]
    sol: Dict[str, Poly] = {}
    for var in targets:
        pivot = None
        for i, e in enumerate(eqs):
            c = e.coefficients_in(var)
            if 1 in c and c[1].is_constant() and set(c) <= {0, 1}:
                pivot = i
                break
        if pivot is None:
            raise TableError(f"no equation solves for {var}")
        e = eqs.pop(pivot)
        _, s = solve_linear_for(e, var)
        sol[var] = s
        eqs = [_canon(x.subs({var: s})) for x in eqs]
        sol = {k: _canon(v.subs({var: s})) for k, v in sol.items()}
    return sol, [e for e in eqs if e]


@dataclass
class TwoPencilDerivation:
    levels: List[Dict[str, Poly]]  # engine solutions per differentiation step
    agree: List[bool]  # against the displayed substitutions
    leftovers: List[Poly]  # equations left after the last step
    xxx7: bool


def derive_two_pencil(table: Optional[ReducedTable] = None) -> TwoPencilDerivation:
    """Differentiate the pencil relations and solve each step for the next variables."""
    table = table or default_table()
    current = two_pencil_relations(level=1)
    steps = [("B_2", "B_3"), ("B_4", "B_5"), ("B_6",)]
    levels, agree, leftovers = [], [], []
    prev = dict(current)
    for i, targets in enumerate(steps):
        eqs = []
        for var, expr in prev.items():
            rel = Poly.var(var, VARIABLES) - expr
            for _, c in _components(table, rel, current):
                eqs.append(c)
        sol, rest = _solve_system(eqs, targets)
        levels.append(sol)
        shown = two_pencil_relations(level=i + 2)
        agree.append(all(reduce_poly(sol[v], current) == reduce_poly(shown[v], current)
                         for v in targets))
        current = _fixpoint({**current, **sol})
        rest = [reduce_poly(e, current) for e in rest]
        rest = [e for e in rest if e]
        if i < len(steps) - 1 and rest:
            raise TableError(f"unexpected relation at step {i + 1}: {rest[0]}")
        leftovers = rest
        prev = sol
    xxx7 = _check_xxx7(leftovers)
    return TwoPencilDerivation(levels, agree, leftovers, xxx7)


def _check_xxx7(leftovers: Sequence[Poly]) -> bool:
    """Every leftover is, modulo T_{0,0}, a multiple of A_4 (T_{1,-1} + 1) B_1, and one is nonzero."""
    key = _canon(to_poly("A_4*(T_{1,-1} + 1)*B_1"))
    shown = _displayed("two_pencil_7.poly")["XXX7"]
    if key != shown:
        return False
    nonzero = False
    for e in leftovers:
        r = reduce_poly(e, {"T_{0,0}": _zero()})
        if not r:
            continue
        q, rem = r.divmod(key)
        if rem:
            return False
        nonzero = True
    return nonzero


def _two_pencil_tower(table: ReducedTable) -> IdealTower:
    subs = two_pencil_relations()
    k = reduce_poly(at_gauge(WEB_CURVATURE), subs)
    u0, s0 = solve_linear_for(k, "T_{0,0}")
    tower = IdealTower("two_pencil", [("K", k)], [("T_{0,0}", s0)], [u0], subs)
    # K_1 is the theta-derivative of K modulo K
    comps = [(f"dK/{d}", c) for d, c in _components(table, k, tower.mapping()) if c]
    shown = _canon(Poly.var("B_1", VARIABLES))
    match = None
    for name, c in comps:
        x = _span_coefficients(shown, [c])
        if x is not None and x[0]:
            match = Match("K_1", x[0], name, True)
            break
    tower.matches.append(match or Match("K_1", None, "", False, shown))
    u1, s1 = solve_linear_for(shown, "B_1")
    tower.generators.append(("K_1", shown))
    tower.solved.append(("B_1", s1))
    tower.units.append(u1)
    return tower


# closure ------------------------------------------------------------------------------

def verify_closure(case: str, table: Optional[ReducedTable] = None,
                   tower: Optional[IdealTower] = None) -> ClosureReport:
    """Every derivative of every generator must reduce to zero modulo the tower."""
    table = table or default_table()
    tower = tower or build_ideal_tower(case, table)
    mapping = tower.mapping()
    residuals: Dict[str, Poly] = {}
    for label, g in tower.generators:
        for direction, c in _components(table, g, mapping):
            residuals[f"d{label}/{direction}"] = c
    details: Dict[str, object] = {
        "matches": all(m.ok for m in tower.matches),
        "units": [str(u) for u in tower.units],
    }
    ok = details["matches"] and all(not r for r in residuals.values())
    if case == "two_pencil":
        b4 = reduce_poly(Poly.var("B_4", VARIABLES), mapping)
        derivation = derive_two_pencil(table)
        details["b4_vanishes"] = not b4
        details["dB1_closure"] = not residuals["dK_1/omega"] and not residuals["dK_1/theta"]
        details["xxx7"] = derivation.xxx7
        details["displayed_substitutions"] = all(derivation.agree)
        ok = ok and details["b4_vanishes"] and details["xxx7"] and details["displayed_substitutions"]
    return ClosureReport(ok, residuals, details=details)


# the gamma / Q computation ----------------------------------------------------------

@dataclass
class QReport:
    gamma: Tuple[RatFunc, RatFunc]
    q: RatFunc
    numerator: Poly
    denominator: Poly
    degree: int
    support: Tuple[str, ...]
    b1_solution: RatFunc


def q_matrix(table: Optional[ReducedTable] = None) -> QReport:
    """Two pencils with A_4 (T_{1,-1} + 1) != 0: dK = gamma K and d(gamma) = Q omega^theta."""
    table = table or default_table()
    derivation = derive_two_pencil(table)
    t00 = Poly.var("T_{0,0}", VARIABLES)
    b1 = None
    for rel in derivation.leftovers:
        c = rel.coefficients_in("B_1")
        if set(c) <= {0, 1} and 1 in c:
            q, r = c.get(0, _zero()).divmod(t00)
            if r:
                raise TableError("leftover relation is not a multiple of T_{0,0} at B_1 = 0")
            b1 = RatFunc(-q, c[1]) * RatFunc.from_poly(t00)
            break
    if b1 is None:
        raise TableError("no relation determines B_1")
    subs = two_pencil_relations()

    def restrict(p: Poly) -> RatFunc:
        return RatFunc.from_poly(reduce_poly(p, subs)).subs({"B_1": b1})

    def d(f: RatFunc) -> Tuple[RatFunc, RatFunc]:
        w, t = RatFunc.const(0), RatFunc.const(0)
        for v in sorted(set(f.num.used_gens()) | set(f.den.used_gens())):
            df = f.diff(v)
            if df:
                vw, vt = table.derivatives[v]
                w, t = w + df * restrict(vw), t + df * restrict(vt)
        return w, t

    k = RatFunc.from_poly(reduce_poly(curvature_K("two_pencil"), subs))
    kw, kt = d(k)
    gamma = (kw / k, kt / k)
    for part in (kw - gamma[0] * k, kt - gamma[1] * k):
        if part:
            raise TableError("dK is not proportional to K")
    (_, gwt), (gtw, _) = d(gamma[0]), d(gamma[1])
    cw, ct = restrict(table.structure["omega"]), restrict(table.structure["theta"])
    q = gtw - gwt + gamma[0] * cw + gamma[1] * ct
    num = _canon(q.num)
    return QReport(gamma, q, num, _canon(q.den), num.total_degree(),
                   tuple(v for v in VARIABLES if v in num.used_gens()), b1)


# persistence --------------------------------------------------------------------------

def dump_table(t: ReducedTable, path) -> str:
    text = t.to_text()
    with open(path, "w") as fh:
        fh.write(text)
    return sha256(text)


def load_table(path) -> ReducedTable:
    with open(path) as fh:
        return ReducedTable.from_text(fh.read())
