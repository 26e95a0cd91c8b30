"""Command-line front end.

Every subcommand produces a report of named verdicts and payload strings.
The default output is line oriented (``key: value``, canonical ordering);
``--json`` prints the same report as sorted JSON.  Exit status is 0 when all
verdicts hold, 1 when some verification fails and 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import burgers, deformation, gronwall, linearize, webcurv
from .symbolic import ParseError, SeriesError, to_ratfunc


class UsageError(ValueError):
    pass


@dataclass
class Report:
    command: str
    verdicts: Dict[str, Tuple[bool, str]] = field(default_factory=dict)
    payloads: Dict[str, str] = field(default_factory=dict)
    hashes: Dict[str, str] = field(default_factory=dict)
    timing: Optional[float] = None

    def verdict(self, name: str, ok: bool, anchor: str):
        self.verdicts[name] = (bool(ok), anchor)

    @property
    def ok(self) -> bool:
        return all(v for v, _ in self.verdicts.values())

    def as_dict(self) -> dict:
        d = {
            "command": self.command,
            "ok": self.ok,
            "verdicts": {k: {"value": v, "anchor": a} for k, (v, a) in self.verdicts.items()},
            "payloads": dict(self.payloads),
            "hashes": dict(self.hashes),
        }
        if self.timing is not None:
            d["timing"] = round(self.timing, 3)
        return d

    def to_text(self) -> str:
        lines = [f"command: {self.command}"]
        for k in sorted(self.verdicts):
            v, a = self.verdicts[k]
            lines.append(f"verdict.{k}: {'true' if v else 'false'}  # {a}")
        for k in sorted(self.payloads):
            lines.append(f"payload.{k}: {self.payloads[k]}")
        for k in sorted(self.hashes):
            lines.append(f"hash.{k}: {self.hashes[k]}")
        if self.timing is not None:
            lines.append(f"timing: {self.timing:.3f}s")
        lines.append(f"ok: {'true' if self.ok else 'false'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        r = cls(d["command"])
        r.verdicts = {k: (v["value"], v["anchor"]) for k, v in d["verdicts"].items()}
        r.payloads = d["payloads"]
        r.hashes = d["hashes"]
        r.timing = d.get("timing")
        return r


# argument helpers ---------------------------------------------------------------------

def _split(text: str, sep: str = ";") -> List[str]:
    parts = [p.strip() for p in text.split(sep)]
    if any(not p for p in parts):
        raise UsageError(f"empty entry in {text!r}")
    return parts


def _point(text: Optional[str]):
    if text is None:
        return None
    parts = _split(text, ",")
    if len(parts) != 2:
        raise UsageError("--at expects x,y")
    try:
        return tuple(Fraction(p) for p in parts)
    except ValueError as e:
        raise UsageError(f"bad coordinate in --at: {text!r}") from e


def _checks(text: Optional[str], allowed, default) -> List[str]:
    if not text:
        return list(default)
    out = _split(text, ",")
    bad = [c for c in out if c not in allowed]
    if bad:
        raise UsageError(f"unknown check(s) {bad}; choose from {sorted(allowed)}")
    return out


def _fr(v) -> str:
    return str(Fraction(v))


# subcommands --------------------------------------------------------------------------

def cmd_simplify(args, rep: Report):
    f = to_ratfunc(args.expr)
    rep.payloads["canonical"] = str(f)
    pt = _point(args.at)
    if pt is not None:
        try:
            rep.payloads["value"] = _fr(f.evaluate({"x": pt[0], "y": pt[1]}))
        except ZeroDivisionError:
            rep.payloads["value"] = "pole"


def cmd_webcurv(args, rep: Report):
    pt = _point(args.at)
    if bool(args.slopes) == bool(args.forms):
        raise UsageError("give exactly one of --slopes and --forms")
    if args.slopes:
        w = webcurv.Web3.from_slopes(_split(args.slopes), pt)
    else:
        pairs = []
        for item in _split(args.forms):
            ab = _split(item, ",")
            if len(ab) != 2:
                raise UsageError("--forms expects a1,b1;a2,b2;a3,b3")
            pairs.append(tuple(ab))
        w = webcurv.Web3.from_forms(pairs, pt)
    res = webcurv.web_curvature(w)
    checks = res.verify()
    rep.verdict("sum_zero", checks["sum_zero"], "w1 + w2 + w3 = 0")
    rep.verdict("structure_equations", checks["structure"], "d wi + rho ^ wi = 0")
    rep.verdict("curvature_identity", checks["curvature"], "d rho = K w1 ^ w2")
    rep.payloads["K"] = str(res.K)
    rep.payloads["rho"] = f"({res.rho[0]}) dx + ({res.rho[1]}) dy"
    rep.payloads["flat"] = "true" if not res.K else "false"
    if pt is not None:
        order = args.order if args.order is not None else 3
        try:
            jet = webcurv.curvature_jet(w, pt, order)
        except webcurv.WebError as e:
            raise UsageError(str(e)) from e
        rep.payloads["K_at"] = _fr(jet.constant_term())
        rep.payloads["jet"] = str(jet)
        if order >= 3:
            j3 = [jet.coefficient(m) for m in webcurv.jet_monomials(3)]
            rep.payloads["j3K"] = "[" + ", ".join(_fr(c) for c in j3) + "]"


def cmd_linearize(args, rep: Report):
    fams = [linearize.Family.parse(s) for s in _split(args.slopes)]
    if args.ode:
        hs = _split(args.ode)
        if len(hs) != 4:
            raise UsageError("--ode expects h3;h2;h1;h0")
        ode = linearize.CubicODE.of(*hs)
    elif len(fams) >= 4:
        try:
            fit = linearize.vandermonde_fit(fams)
        except linearize.LinearizeError as e:
            raise UsageError(str(e)) from e
        ode = fit.ode
        rep.payloads["fitted_ode"] = str(ode)
    else:
        try:
            part, direction = linearize.candidate_family_3web(fams)
        except linearize.LinearizeError as e:
            raise UsageError(str(e)) from e
        rep.payloads["candidate_particular"] = str(part)
        rep.payloads["candidate_direction"] = str(direction)
        return
    r = linearize.check_linearization(fams, ode)
    for i, res in enumerate(r.residuals, 1):
        rep.payloads[f"residual_{i}"] = str(res)
    rep.payloads["mvanish_residual"] = str(r.mvanish)
    rep.verdict("leaves_are_solutions", not any(r.residuals), "p_x + p p_y = h3 p^3 + h2 p^2 + h1 p + h0")
    rep.verdict("L1_zero", r.L1_zero, "L1 = 0 for y'' = f")


def cmd_burgers(args, rep: Report):
    order = args.order if args.order is not None else 8
    try:
        sol = burgers.solve_burgers(args.init, order, args.s)
    except burgers.BurgersError as e:
        raise UsageError(str(e)) from e
    rep.verdict("pde_residual_zero", sol.residual().is_zero(), "h_x + h h_y = 0")
    rep.verdict("initial_trace", sol.trace_ok(), "h(0, y) = initial")
    try:
        K = burgers.curvature_of_example(sol)
    except SeriesError as e:
        raise UsageError(str(e)) from e
    rep.verdict("reduced_matches_unreduced", K == burgers.curvature_unreduced(sol),
                "h_yy/h = (h_x h_y - h h_xy)/h^3")
    cc = burgers.cross_check_with_webcurv(sol)
    rep.verdict("cross_check", cc.agree, "moving-frame K agrees with h_yy/h up to a unit")
    order_k = burgers.vanishing_order(K)
    rep.payloads["h"] = str(sol.h)
    rep.payloads["K"] = str(K)
    rep.payloads["vanishing_order"] = str(order_k)
    if args.s is not None:
        rep.verdict("vanishing_order_at_least_s", isinstance(order_k, str) or order_k >= args.s,
                    "K vanishes to order at least s")
        if K.cap >= args.s:
            jets, derivs = burgers.curvature_ideal_check(sol, args.s)
            rep.verdict("curvature_ideal_description", jets == derivs,
                        "jets of K through s vanish iff d^k_y h(0,0) = 0 for 2 <= k <= s+2")


_CASES = {"general": "general", "one-pencil": "one_pencil", "two-pencil": "two_pencil",
          "one_pencil": "one_pencil", "two_pencil": "two_pencil"}
_GRONWALL_CHECKS = ("d2", "eq6", "leading", "ideals", "closure", "curvature", "qmatrix", "data", "all")


def cmd_gronwall(args, rep: Report):
    case = _CASES.get(args.case or "general")
    if case is None:
        raise UsageError(f"unknown case {args.case!r}; choose general, one-pencil or two-pencil")
    checks = _checks(args.check, _GRONWALL_CHECKS + ("q",), ("closure",))
    checks = ["qmatrix" if c == "q" else c for c in checks]
    if "all" in checks:
        checks = [c for c in _GRONWALL_CHECKS if c != "all" and (c != "qmatrix" or case == "two_pencil")]
    if args.load_table:
        try:
            table = gronwall.load_table(args.load_table)
        except OSError as e:
            raise UsageError(f"cannot read {args.load_table}: {e}") from e
    else:
        table = gronwall.default_table()
    rep.hashes["table"] = table.content_hash()
    if args.dump_table:
        rep.hashes["dumped"] = gronwall.dump_table(table, args.dump_table)
    if "d2" in checks or "eq6" in checks:
        v = gronwall.validate_table(table)
        if "d2" in checks:
            rep.verdict("d_squared", v.verdict, "d(dX) = 0 for all non-B_6 variables, d(dB_6) = Eq6 w^theta")
        if "eq6" in checks:
            rep.verdict("eq6_nonzero", bool(v.eq6), "d(dB_6) = Eq6 w^theta with Eq6 != 0")
        rep.payloads["eq6_terms"] = str(v.eq6_terms)
        rep.payloads["eq6_degree"] = str(v.eq6_degree)
        rep.hashes["eq6"] = v.eq6_hash
    if "leading" in checks:
        entries = gronwall.leading_term_check(table)
        rep.verdict("leading_terms", all(e.ok for e in entries),
                    "prolongation coefficients = leading part mod lower order")
        strict = [f"{e.variable}/{e.direction}" for e in entries if not e.graded_ok]
        rep.payloads["leading_strict_grading_failures"] = ",".join(strict) or "none"
    if "ideals" in checks:
        tower = gronwall.build_ideal_tower(case, table)
        rep.verdict("ideal_generators_match", all(m.ok for m in tower.matches),
                    "engine-derived generators equal the displayed ones")
        rep.payloads["tower"] = ", ".join(f"{label}->{var}" for (label, _), (var, _) in
                                          zip(tower.generators, tower.solved))
    if "closure" in checks:
        c = gronwall.verify_closure(case, table)
        rep.verdict("closure", c.verdict, "derivatives of the curvature ideal generators lie in the ideal")
        for k in ("b4_vanishes", "dB1_closure", "xxx7", "displayed_substitutions"):
            if k in c.details:
                rep.verdict(k, c.details[k], "two-pencil reduction")
        rep.payloads["units"] = ", ".join(c.details["units"])
    if "curvature" in checks:
        k = gronwall.curvature_K(case)
        rep.payloads["K"] = k.to_str()
        if case == "two_pencil":
            rep.verdict("K_is_minus_T00", k == -gronwall.to_poly("T_{0,0}"), "K = -T_{0,0}")
    if "qmatrix" in checks:
        if case != "two_pencil":
            raise UsageError("--check qmatrix needs --case two-pencil")
        q = gronwall.q_matrix(table)
        rep.verdict("q_degree_6", q.degree == 6, "numerator of Q has degree 6")
        rep.verdict("q_five_variables", len(q.support) == 5, "numerator of Q involves five variables")
        rep.payloads["q_support"] = ",".join(q.support)
        rep.payloads["q_numerator_terms"] = str(len(q.numerator))
    if "data" in checks:
        manifest = gronwall.data_manifest()
        for fname, digest in sorted(manifest.items()):
            rep.hashes[f"data.{fname}"] = digest
        try:
            for fname in manifest:
                gronwall.load_data(fname)
            ok = True
        except gronwall.TableError:
            ok = False
        rep.verdict("data_hashes", ok, "data files match their manifest")


_DEFORMATION_CHECKS = ("fundast", "sigma", "linearity", "d2")


def cmd_deformation(args, rep: Report):
    checks = _checks(args.check, _DEFORMATION_CHECKS, _DEFORMATION_CHECKS)
    if "fundast" in checks:
        res = deformation.verify_fundast()
        rep.verdict("fundamental_identity", all(not f for f in res.values()), "all 9 components vanish")
    if "sigma" in checks:
        rep.verdict("sigma_covariance", deformation.verify_sigma_covariance().ok, "d sigma in span(omega, theta)")
    if "linearity" in checks:
        rep.verdict("linearity_solutions", deformation.verify_linearity_solutions().ok,
                    "displayed solutions satisfy the linearity system")
    if "d2" in checks:
        entries = deformation.check_deformation_d_squared()
        rep.verdict("d_squared_consistent", all(e.status != "inconsistent" for e in entries),
                    "d(dX) vanishes or is absorbed by prolongation")
        rep.payloads["d2_status"] = ", ".join(f"{e.name}={e.status}" for e in entries)


COMMANDS = {
    "simplify": cmd_simplify, "webcurv": cmd_webcurv, "linearize": cmd_linearize,
    "burgers": cmd_burgers, "gronwall": cmd_gronwall, "deformation": cmd_deformation,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--at", help="base point x,y")
    common.add_argument("--order", type=int, help="series order cap")
    common.add_argument("--case", help="general | one-pencil | two-pencil")
    common.add_argument("--check", help="comma-separated list of checks")
    common.add_argument("--dump-table", help="write the reduced table to this file")
    common.add_argument("--load-table", help="read the reduced table from this file")
    common.add_argument("--timing", action="store_true", help="include wall-clock time")

    p = argparse.ArgumentParser(prog="threeweb", description="Exact computations for planar 3-webs.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simplify", parents=[common], help="canonical form of an expression")
    s.add_argument("expr")
    s = sub.add_parser("webcurv", parents=[common], help="web curvature")
    s.add_argument("--slopes", help="three slopes separated by ';'")
    s.add_argument("--forms", help="three forms a,b separated by ';' meaning a dx + b dy")
    s = sub.add_parser("linearize", parents=[common], help="linearization checks")
    s.add_argument("--slopes", required=True, help="slopes separated by ';' (prefix dual: for dx - q dy)")
    s.add_argument("--ode", help="h3;h2;h1;h0")
    s = sub.add_parser("burgers", parents=[common], help="Burgers web example")
    s.add_argument("--init", required=True, help="initial data h(0, y)")
    s.add_argument("--s", type=int, help="expected vanishing order")
    sub.add_parser("gronwall", parents=[common], help="reduced structure equations and curvature ideals")
    sub.add_parser("deformation", parents=[common], help="deformation identities")
    return p


def run(argv=None) -> Tuple[int, Optional[Report]]:
    parser = build_parser()
    args = parser.parse_args(argv)
    rep = Report(args.command)
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command](args, rep)
    except (UsageError, ParseError, webcurv.WebError, linearize.LinearizeError,
            gronwall.TableError, ZeroDivisionError) as e:
        print(f"threeweb {args.command}: error: {e}", file=sys.stderr)
        return 2, None
    if args.timing:
        rep.timing = time.perf_counter() - t0
    sys.stdout.write(rep.to_json() if args.json else rep.to_text())
    return (0 if rep.ok else 1), rep


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
