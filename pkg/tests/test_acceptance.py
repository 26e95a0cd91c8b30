"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import hashlib
import random
import time
from importlib import resources

import pytest

import oracles
from helpers import random_forms, random_slope_text, random_web_cases
from test_gronwall import EQ6_HASH, PINNED
from threeweb import burgers, deformation, gronwall
from threeweb.exterior import ext_d, wedge
from threeweb.linearize import (CubicODE, candidate_family_3web, check_linearization, mvanish_residual,
                                unique_fit, vandermonde_determinant, vandermonde_fit)
from threeweb.symbolic import to_poly, to_ratfunc
from threeweb.webcurv import Web3, j3K, web_curvature

R = to_ratfunc


@pytest.fixture
def report(capsys):
    def emit(n, ok, what, seconds):
        with capsys.disabled():
            print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {what}  ({seconds:.2f}s)")
        assert ok, f"criterion {n} failed: {what}"
    return emit


def test_criterion_01_exterior_properties(report):
    t = time.perf_counter()
    chart, forms = random_forms(101, 120)
    dd = all(ext_d(ext_d(a)).is_zero() for a in forms)
    leibniz = anti = True
    for a, b in zip(forms, forms[1:] + forms[:1]):
        if a.degree + b.degree < chart.dim:
            sign = -1 if a.degree % 2 else 1
            leibniz &= ext_d(wedge(a, b)) == wedge(ext_d(a), b) + wedge(a, ext_d(b)) * sign
        sign = -1 if (a.degree * b.degree) % 2 else 1
        anti &= wedge(a, b) == wedge(b, a) * sign
    dt = time.perf_counter() - t
    report(1, len(forms) >= 100 and dd and leibniz and anti and dt < 10,
           f"d∘d = 0, Leibniz, graded anticommutativity on {len(forms)} random forms", dt)


def test_criterion_02_fundamental_identity_and_sigma(report):
    t = time.perf_counter()
    res = deformation.verify_fundast()
    sigma = deformation.verify_sigma_covariance()
    dt = time.perf_counter() - t
    report(2, len(res) == 9 and all(r.is_zero() for r in res.values()) and sigma.ok and dt < 60,
           "deformation structure equation: 9 zero components; d sigma in span(omega, theta)", dt)


def test_criterion_03_linearity_system(report):
    t = time.perf_counter()
    rep = deformation.verify_linearity_solutions()
    dt = time.perf_counter() - t
    report(3, rep.ok and len(rep.solution_residuals) == 2 and dt < 10,
           "both closed-form solutions satisfy the three linearity equations", dt)


def test_criterion_04_reduced_table(report):
    t = time.perf_counter()
    table = gronwall.default_table()
    v = gronwall.validate_table(table)
    others = [r for name, r in v.residuals.items() if name != "B_6"]
    leading = gronwall.leading_term_check(table)
    dt = time.perf_counter() - t
    ok = (len(others) == 12 and not any(others) and bool(v.eq6) and v.eq6_hash == EQ6_HASH
          and all(e.ok for e in leading) and dt < 600)
    report(4, ok, f"d² = 0 on 12 variables, Eq6 has {v.eq6_terms} terms, "
                  f"{len(leading)} leading-term relations hold", dt)


def test_criterion_05_curvature_ideal_closure(report):
    t = time.perf_counter()
    table = gronwall.default_table()
    ok = True
    for case in gronwall.CASES:
        tower = gronwall.build_ideal_tower(case, table)
        ok &= all(m.ok for m in tower.matches)
        c = gronwall.verify_closure(case, table, tower)
        ok &= c.verdict and all(not r for r in c.residuals.values())
    two = gronwall.verify_closure("two_pencil", table).details
    ok &= all(two[k] for k in ("b4_vanishes", "dB1_closure", "xxx7", "displayed_substitutions"))
    dt = time.perf_counter() - t
    report(5, ok and dt < 600, "generators match the displayed ones and close in all three cases", dt)


def test_criterion_06_two_pencil_curvature(report):
    t = time.perf_counter()
    k = gronwall.curvature_K("two_pencil")
    dt = time.perf_counter() - t
    report(6, k == -gronwall._canon(to_poly("T_{0,0}")), f"K = {k.to_str()} after the pencil relations", dt)


def test_criterion_07_q_degree_and_support(report):
    t = time.perf_counter()
    q = gronwall.q_matrix()
    dt = time.perf_counter() - t
    report(7, q.degree == 6 and len(q.support) == 5 and dt < 60,
           f"Q numerator degree {q.degree} in {len(q.support)} variables", dt)


def test_criterion_08_burgers_family(report):
    t = time.perf_counter()
    ok, orders = True, []
    for s in (1, 2, 3):
        sol = burgers.solve_burgers(f"1 + y^{s + 3}", 12, s)
        K = burgers.curvature_of_example(sol)
        order = burgers.vanishing_order(K)
        orders.append(order)
        ok &= sol.residual().is_zero() and sol.trace_ok()
        ok &= isinstance(order, int) and order >= s and not K.is_zero()
        ok &= burgers.curvature_ideal_check(sol, s) == (True, True)
        bad = burgers.solve_burgers(f"1 + y^{s + 2}", 12)
        ok &= burgers.curvature_ideal_check(bad, s) == (False, False)
        ok &= burgers.cross_check_with_webcurv(sol).agree
    dt = time.perf_counter() - t
    report(8, ok and dt < 60, f"s = 1, 2, 3 give vanishing orders {orders}", dt)


def test_criterion_09_oracle_equivalence(report):
    t = time.perf_counter()
    cases = random_web_cases(2024, webs=10, points=5)
    agree = total = 0
    for slopes, points in cases:
        w = Web3.from_slopes(slopes)
        for pt in points:
            total += 1
            agree += j3K(w, pt) == oracles.web_curvature_jet(slopes, pt)
    dt = time.perf_counter() - t
    report(9, total == 50 and agree == total, f"{agree}/{total} order-3 jets of K agree exactly", dt)


def test_criterion_10_linearization(report):
    t = time.perf_counter()
    den = R("x*(x - 1)*(x - 2)")
    fit = vandermonde_fit(["0", "1", "2", "x"])
    ok = fit.ode.coefficients == (1 / den, -3 / den, 2 / den, R("0"))
    ok &= vandermonde_fit(["y/x", "(y - 1)/(x - 2)", "5", "y/(x + 3)"]).ode.is_zero()
    ok &= not mvanish_residual("0") and not mvanish_residual("x^2 - 3/(x + 1)")
    rng = random.Random(99)
    tried = 0
    while tried < 5:
        slopes = [R(random_slope_text(rng, deg=1)) for _ in range(4)]
        if not vandermonde_determinant(slopes):
            continue
        f = vandermonde_fit(slopes)
        _, direction = candidate_family_3web(slopes[:3])
        other = CubicODE(*(a + b for a, b in zip(f.ode.coefficients, direction.coefficients)))
        ok &= not any(f.residuals) and unique_fit(slopes, f.ode, other) and unique_fit(slopes, f.ode, f.ode)
        tried += 1
    ok &= check_linearization(["0", "1", "2"], CubicODE.of(0, 0, 0, 0)).verdict
    dt = time.perf_counter() - t
    report(10, ok, "Vandermonde fit, straight-line fits, L1 on functions of x, uniqueness on 5 quadruples", dt)


def test_criterion_11_j3K_shape_and_flat_webs(report):
    t = time.perf_counter()
    h = R("(1 + y)/(1 + x)")
    flat = [Web3.from_slopes(["0", "1", "2"]),
            Web3.from_slopes(["y/x", "y/(x - 1)", "(y - 1)/x"]),
            Web3.from_forms([(R("0"), R("1")), (-h, R("0")), (h, R("-1"))])]
    vecs = [j3K(w, (1, 2)) for w in flat]
    curved = j3K(Web3.from_slopes(["0", "1", "x"]), (3, 1))
    ok = all(len(v) == 10 and v == [0] * 10 for v in vecs) and len(curved) == 10 and any(curved)
    ok &= all(not web_curvature(w).K for w in flat)
    dt = time.perf_counter() - t
    report(11, ok, "j3K has 10 entries and is zero on flat webs", dt)


def test_criterion_12_determinism(report, tmp_path):
    t = time.perf_counter()
    root = resources.files(gronwall.DATA_PACKAGE)
    ok = all(hashlib.sha256(root.joinpath(f).read_bytes()).hexdigest() == d for f, d in PINNED.items())
    ok &= gronwall.data_manifest() == PINNED
    table = gronwall.default_table()
    ok &= gronwall.validate_table(table).eq6_hash == EQ6_HASH
    a, b = tmp_path / "a", tmp_path / "b"
    gronwall.dump_table(table, a)
    loaded = gronwall.load_table(a)
    gronwall.dump_table(loaded, b)
    ok &= a.read_bytes() == b.read_bytes()
    ok &= gronwall.validate_table(loaded).eq6_hash == EQ6_HASH
    dt = time.perf_counter() - t
    report(12, ok, f"{len(PINNED)} data hashes and Eq6 hash stable; dump/load byte-identical", dt)
