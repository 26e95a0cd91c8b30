"""Differential forms over coordinate charts and abstract coframes.

A form stores one coefficient per strictly increasing tuple of generator
indices.  Coefficients may be any exact ring element that supports ``+``,
``-``, ``*``, truthiness and ``diff(name)``: :class:`Poly`, :class:`RatFunc`
or :class:`JetSeries`.

On a coordinate chart the generators are the differentials of the
coordinates and ``d`` of a coefficient is its gradient.  On a coframe chart
the differential of each generator is given by a table of 2-forms and the
differential of each scalar variable is given by a table of 1-forms; ``d`` of
a polynomial coefficient then follows from the chain rule.
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from .symbolic import Poly, RatFunc
from .symbolic.expr import Const, Neg, Pow, Var, Wedge, parse_expr


class ChartError(ValueError):
    pass


class Chart:
    """Generators plus the rules that define ``d`` on them."""

    def __init__(self, kind: str, generators: Sequence[str], coordinates: Sequence[str] = (),
                 scalar_vars: Sequence[str] = ()):
        if kind not in ("coordinate", "coframe"):
            raise ChartError(f"unknown chart kind {kind!r}")
        self.kind = kind
        self.generators = tuple(generators)
        if len(set(self.generators)) != len(self.generators):
            raise ChartError("duplicate generator names")
        self.index = {g: i for i, g in enumerate(self.generators)}
        self.coordinates = tuple(coordinates)
        self.scalar_vars = tuple(scalar_vars)
        self.d_rules: Dict[str, "DiffForm"] = {}
        self.derivation: Dict[str, "DiffForm"] = {}

    @classmethod
    def coordinate(cls, coords: Sequence[str]) -> "Chart":
        coords = tuple(coords)
        return cls("coordinate", tuple("d" + c for c in coords), coordinates=coords, scalar_vars=coords)

    @classmethod
    def coframe(cls, generators: Sequence[str], scalar_vars: Sequence[str] = ()) -> "Chart":
        return cls("coframe", generators, scalar_vars=scalar_vars)

    @property
    def dim(self) -> int:
        return len(self.generators)

    def set_d_rule(self, gen: str, form: "DiffForm"):
        if self.kind != "coframe":
            raise ChartError("coordinate charts have closed generators")
        if gen not in self.index:
            raise ChartError(f"unknown generator {gen!r}")
        if form.chart is not self or (form and form.degree != 2):
            raise ChartError(f"d-rule for {gen!r} must be a 2-form on this chart")
        self.d_rules[gen] = form

    def set_derivation(self, var: str, form: "DiffForm"):
        if self.kind != "coframe":
            raise ChartError("coordinate charts differentiate by partials")
        if form.chart is not self or (form and form.degree != 1):
            raise ChartError(f"derivation of {var!r} must be a 1-form on this chart")
        if var not in self.scalar_vars:
            self.scalar_vars = self.scalar_vars + (var,)
        self.derivation[var] = form

    # building blocks ----------------------------------------------------------------
    def gen(self, name: str, coef=1) -> "DiffForm":
        if name not in self.index:
            raise ChartError(f"unknown generator {name!r}")
        return DiffForm(self, 1, {(self.index[name],): _coef(coef)})

    def zero(self, degree: int = 0) -> "DiffForm":
        return DiffForm(self, degree, {})

    def scalar(self, coef) -> "DiffForm":
        return DiffForm(self, 0, {(): _coef(coef)})

    def d_generator(self, i: int) -> "DiffForm":
        if self.kind == "coordinate":
            return self.zero(2)
        return self.d_rules.get(self.generators[i], self.zero(2))

    def d_scalar(self, c) -> "DiffForm":
        """Differential of a coefficient, as a 1-form."""
        if self.kind == "coordinate":
            comps = {}
            for i, x in enumerate(self.coordinates):
                dc = c.diff(x)
                if dc:
                    comps[(i,)] = dc
            return DiffForm(self, 1, comps)
        out = self.zero(1)
        for v in _used_vars(c):
            if v not in self.derivation:
                raise ChartError(f"scalar {v!r} has no derivation rule")
            dv = c.diff(v)
            if dv:
                out = out + self.derivation[v] * dv
        return out


def _coef(c):
    return c if hasattr(c, "diff") else Poly.const(c)


def _used_vars(c) -> Tuple[str, ...]:
    if isinstance(c, Poly):
        return c.used_gens()
    if isinstance(c, RatFunc):
        return tuple(dict.fromkeys(c.num.used_gens() + c.den.used_gens()))
    return tuple(getattr(c, "variables", ()))


def _merge(a: Tuple[int, ...], b: Tuple[int, ...]):
    """Sorted union of two index tuples with the sign of the sorting permutation."""
    if set(a) & set(b):
        return 0, None
    inversions = 0
    for x in a:
        for y in b:
            if x > y:
                inversions += 1
    return (-1 if inversions & 1 else 1), tuple(sorted(a + b))


class DiffForm:
    """Homogeneous form of a fixed degree on a chart."""

    __slots__ = ("chart", "degree", "comps")

    def __init__(self, chart: Chart, degree: int, comps: Mapping[Tuple[int, ...], object]):
        self.chart = chart
        self.degree = degree
        clean = {}
        for idx, c in comps.items():
            idx = tuple(idx)
            if len(idx) != degree or any(idx[k] >= idx[k + 1] for k in range(len(idx) - 1)):
                raise ChartError(f"component index {idx} is not strictly increasing of length {degree}")
            if c:
                clean[idx] = c
        self.comps = clean

    # access -------------------------------------------------------------------------
    def component(self, *names: str):
        """Coefficient of the wedge of the named generators (in any order)."""
        idx = [self.chart.index[n] for n in names]
        if len(set(idx)) != len(idx):
            return None
        order = sorted(range(len(idx)), key=lambda k: idx[k])
        sign = _perm_sign(order)
        c = self.comps.get(tuple(sorted(idx)))
        if c is None:
            return None
        return c if sign > 0 else -c

    def coefficient(self, *names: str, zero=None):
        c = self.component(*names)
        if c is None:
            return zero if zero is not None else Poly.zero()
        return c

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self) -> bool:
        return bool(self.comps)

    def _same(self, other: "DiffForm"):
        if other.chart is not self.chart:
            raise ChartError("forms live on different charts")

    # linear structure ---------------------------------------------------------------
    def __add__(self, other: "DiffForm") -> "DiffForm":
        if not isinstance(other, DiffForm):
            return NotImplemented
        self._same(other)
        if not other.comps:
            return self
        if not self.comps:
            return other
        if other.degree != self.degree:
            raise ChartError("cannot add forms of different degrees")
        out = dict(self.comps)
        for k, c in other.comps.items():
            out[k] = out[k] + c if k in out else c
        return DiffForm(self.chart, self.degree, out)

    def __neg__(self) -> "DiffForm":
        return DiffForm(self.chart, self.degree, {k: -c for k, c in self.comps.items()})

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        return self + (-other)

    def __mul__(self, c) -> "DiffForm":
        """Multiply by a scalar coefficient."""
        if isinstance(c, DiffForm):
            return NotImplemented
        return DiffForm(self.chart, self.degree, {k: v * c for k, v in self.comps.items()})

    __rmul__ = __mul__

    def map_coefficients(self, fn) -> "DiffForm":
        return DiffForm(self.chart, self.degree, {k: fn(v) for k, v in self.comps.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffForm):
            return NotImplemented
        if other.chart is not self.chart:
            return False
        if not self.comps and not other.comps:
            return True
        return self.degree == other.degree and (self - other).is_zero()

    def __hash__(self):
        return hash((id(self.chart), self.degree, len(self.comps)))

    def __str__(self) -> str:
        if not self.comps:
            return "0"
        parts = []
        for idx in sorted(self.comps):
            basis = "^".join(self.chart.generators[i] for i in idx)
            c = str(self.comps[idx])
            parts.append(f"({c})" + (f"*{basis}" if basis else ""))
        return " + ".join(parts)

    __repr__ = __str__


def _perm_sign(order: Sequence[int]) -> int:
    sign, seen = 1, list(order)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    """Exterior product."""
    a._same(b)
    deg = a.degree + b.degree
    if not a.comps or not b.comps or deg > a.chart.dim:
        return DiffForm(a.chart, deg, {})
    out: Dict[Tuple[int, ...], object] = {}
    for ia, ca in a.comps.items():
        for ib, cb in b.comps.items():
            sign, idx = _merge(ia, ib)
            if not sign:
                continue
            term = ca * cb
            if sign < 0:
                term = -term
            out[idx] = out[idx] + term if idx in out else term
    return DiffForm(a.chart, deg, out)


def wedge_all(forms: Iterable[DiffForm]) -> DiffForm:
    forms = list(forms)
    acc = forms[0]
    for f in forms[1:]:
        acc = wedge(acc, f)
    return acc


def ext_d(a: DiffForm) -> DiffForm:
    """Exterior derivative."""
    chart = a.chart
    out = DiffForm(chart, a.degree + 1, {})
    for idx, c in a.comps.items():
        basis = DiffForm(chart, a.degree, {idx: Poly.one()})
        out = out + wedge(chart.d_scalar(c), basis)
        # d(e_i1 ^ ... ^ e_ik) = sum (-1)^j e_i1 ^ .. d e_ij .. ^ e_ik
        for j, i in enumerate(idx):
            de = chart.d_generator(i)
            if not de:
                continue
            left = DiffForm(chart, j, {idx[:j]: Poly.one()})
            right = DiffForm(chart, len(idx) - j - 1, {idx[j + 1:]: Poly.one()})
            term = wedge(wedge(left, de), right) * c
            out = out - term if j & 1 else out + term
    return out


def check_d_squared(chart: Chart, names: Optional[Iterable[str]] = None) -> Dict[str, DiffForm]:
    """Residual d(d(.)) for every generator and scalar variable with a rule.

    Returns a mapping name -> residual; every residual is zero exactly when
    the structure equations are formally integrable.
    """
    report: Dict[str, DiffForm] = {}
    if chart.kind == "coordinate":
        for x in chart.coordinates:
            f = DiffForm(chart, 0, {(): RatFunc.var(x)})
            report[x] = ext_d(ext_d(f))
        return report
    wanted = set(names) if names is not None else None
    for g in chart.generators:
        if wanted is None or g in wanted:
            report[g] = ext_d(chart.d_generator(chart.index[g]))
    for v in chart.scalar_vars:
        if v in chart.derivation and (wanted is None or v in wanted):
            report[v] = ext_d(chart.derivation[v])
    return report


# chart files --------------------------------------------------------------------------

def form_from_expr(chart: Chart, e, degree_hint: Optional[int] = None) -> DiffForm:
    """Interpret an expression tree as a form; generator names are 1-forms."""

    def go(x):
        if isinstance(x, Const):
            return chart.scalar(Poly.const(x.value))
        if isinstance(x, Var):
            if x.name in chart.index:
                return chart.gen(x.name)
            return chart.scalar(Poly.var(x.name))
        if isinstance(x, Neg):
            return -go(x.arg)
        if isinstance(x, Pow):
            base = go(x.base)
            if base.degree != 0:
                raise ChartError("powers of non-scalar forms are not allowed")
            c = base.comps.get((), Poly.zero())
            if x.exp < 0:
                raise ChartError("negative powers are not allowed in chart files")
            return chart.scalar(c ** x.exp)
        if isinstance(x, Wedge):
            return wedge(go(x.left), go(x.right))
        a, b = go(x.left), go(x.right)
        if x.op in "+-":
            if a and b and a.degree != b.degree:
                raise ChartError("sum of forms of different degrees")
            return a + b if x.op == "+" else a - b
        if x.op == "*":
            if a.degree and b.degree:
                return wedge(a, b)
            if a.degree == 0:
                return b * a.comps.get((), Poly.zero()) if a.comps else DiffForm(chart, b.degree, {})
            return a * b.comps.get((), Poly.zero()) if b.comps else DiffForm(chart, a.degree, {})
        if b.degree != 0 or not b.comps or not b.comps[()].is_constant():
            raise ChartError("only division by nonzero constants is allowed in chart files")
        return a * (Poly.one() / b.comps[()].constant_value())

    return go(e)


def parse_chart(text: str) -> Chart:
    """Read a coframe chart from the sectioned text format."""
    section = None
    gens: list = []
    d_lines: list = []
    der_lines: list = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("generators", "d-rules", "derivation"):
                raise ChartError(f"line {lineno}: unknown section {section!r}")
            continue
        if section == "generators":
            gens.extend(g.strip() for g in line.replace(",", " ").split())
        elif section in ("d-rules", "derivation"):
            if "=" not in line:
                raise ChartError(f"line {lineno}: expected 'name = form'")
            name, rhs = (s.strip() for s in line.split("=", 1))
            (d_lines if section == "d-rules" else der_lines).append((lineno, name, rhs))
        else:
            raise ChartError(f"line {lineno}: content outside a section")
    chart = Chart.coframe(gens)
    for lineno, name, rhs in d_lines:
        try:
            chart.set_d_rule(name, form_from_expr(chart, parse_expr(rhs, wedge=True)))
        except ValueError as exc:
            raise ChartError(f"line {lineno}: {exc}") from exc
    for lineno, name, rhs in der_lines:
        try:
            chart.set_derivation(name, form_from_expr(chart, parse_expr(rhs, wedge=True)))
        except ValueError as exc:
            raise ChartError(f"line {lineno}: {exc}") from exc
    return chart
