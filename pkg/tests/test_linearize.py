import random
from fractions import Fraction

import pytest
import sympy as sp

import oracles
from helpers import random_slope_text
from threeweb.linearize import (CubicODE, Family, LinearizeError, candidate_family_3web,
                                check_linearization, family_residual, mvanish_residual, total_derivative, unique_fit,
                                vandermonde_determinant, vandermonde_fit)
from threeweb.symbolic import to_ratfunc

R = to_ratfunc


def sym(rf):
    return sp.sympify(str(rf).replace("^", "**"))


@pytest.mark.parametrize("g,f,expected", [("y", "x*p^2", "p"), ("p", "x*y + p^3", "x*y + p^3"),
                                          ("x*p", "0", "p")])
def test_total_derivative(g, f, expected):
    assert total_derivative(g, f) == R(expected)


@pytest.mark.parametrize("f", ["0", "x^3 - 1/x", "7"])
def test_mvanish_vanishes_on_functions_of_x(f):
    assert not mvanish_residual(f)


def test_mvanish_on_y_p_cubed():
    # the composed-operator reference gives zero as well
    assert oracles.mvanish(oracles.y * oracles.p ** 3) == 0
    assert not mvanish_residual("y*p^3")


@pytest.mark.parametrize("f", ["x*p + x^2", "p + 1", "y^2*p^3 + x*p", "x*y*p^2 - p^3 + y",
                               "p^3/(1 + x) + y*p"])
def test_mvanish_matches_reference(f):
    ref = oracles.mvanish(sp.sympify(f.replace("^", "**")))
    assert sp.simplify(sym(mvanish_residual(f)) - ref) == 0


def test_mvanish_linear_in_p_with_y_free_coefficients():
    assert not mvanish_residual("x^2*p + 1/(x + 1)")


def test_fit_constant_and_straight_slopes():
    assert vandermonde_fit(["0", "1", "2", "3"]).ode.is_zero()
    # each of these solves p_x + p p_y = 0
    fit = vandermonde_fit(["y/x", "(y - 1)/(x - 2)", "5", "y/(x + 3)"])
    assert fit.ode.is_zero() and fit.consistent


def test_fit_0_1_2_x():
    fit = vandermonde_fit(["0", "1", "2", "x"])
    den = R("x*(x - 1)*(x - 2)")
    assert fit.ode.coefficients == (1 / den, -3 / den, 2 / den, R("0"))
    ref = oracles.vandermonde_solution([0, 1, 2, oracles.x], [0, 0, 0, 1])
    assert [sp.simplify(sym(h) - r) for h, r in zip(fit.ode.coefficients, ref)] == [0] * 4
    rep = check_linearization(["0", "1", "2", "x"], fit.ode)
    assert not any(rep.residuals)
    assert rep.mvanish == R("72*(x - 1)*(p - 1)/(x^3*(x - 2)^3)")
    assert not rep.verdict and rep.L2_zero


def test_fit_reports_overdetermined_residuals():
    fit = vandermonde_fit(["0", "1", "2", "3", "x"])
    assert fit.ode.is_zero()
    assert fit.residuals[-1] == R("1") and not fit.consistent


def test_fit_errors():
    with pytest.raises(LinearizeError):
        vandermonde_fit(["0", "1", "2"])
    with pytest.raises(LinearizeError):
        vandermonde_fit(["0", "1", "x", "x"])


def _value(rf, pt):
    return Fraction(rf.num.evaluate(pt)) / Fraction(rf.den.evaluate(pt))


def test_random_quadruples_fit_exactly_and_uniquely():
    rng = random.Random(17)
    done = 0
    while done < 5:
        texts = [random_slope_text(rng, deg=1) for _ in range(4)]
        slopes = [R(t) for t in texts]
        if not vandermonde_determinant(slopes):
            continue
        fit = vandermonde_fit(slopes)
        assert not any(fit.residuals[:4])
        for _ in range(2):
            pt = (Fraction(rng.randint(-9, 9), rng.randint(1, 5)), Fraction(rng.randint(-9, 9), 7))
            env = dict(zip("xy", pt))
            if any(not h.den.evaluate(env) for h in fit.ode.coefficients):
                continue
            vals = [_value(p, env) for p in slopes]
            if len(set(vals)) < 4:
                continue
            ref = oracles.vandermonde_at_point([t.replace("^", "**") for t in texts], pt)
            assert [_value(h, env) for h in fit.ode.coefficients] == ref
        # a second cubic that agrees on three slopes only
        _, direction = candidate_family_3web(slopes[:3])
        other = CubicODE(*(a + b for a, b in zip(fit.ode.coefficients, direction.coefficients)))
        assert unique_fit(slopes, fit.ode, other)
        assert unique_fit(slopes, fit.ode, fit.ode)
        assert not any(family_residual(Family(p), other) for p in slopes[:3])
        assert family_residual(Family(slopes[3]), other)
        done += 1


def test_candidate_family_3web():
    particular, direction = candidate_family_3web(["0", "1", "x"])
    assert not particular.h3
    for t in ("0", "1", "y"):
        ode = CubicODE(*(a + R(t) * b for a, b in zip(particular.coefficients, direction.coefficients)))
        assert not any(check_linearization(["0", "1", "x"], ode).residuals)


def test_constant_web_with_zero_ode():
    rep = check_linearization(["0", "1", "2"], CubicODE.of("0", "0", "0", "0"))
    assert rep.verdict


def test_burgers_web_with_vertical_family():
    # h = y/(1 + x) solves h_x + h h_y = 0
    fams = [Family(R("0")), Family(R("0"), dual=True), Family(R("y/(1 + x)"))]
    assert check_linearization(fams, CubicODE.of("0", "0", "0", "0")).verdict
    assert Family.parse("dual: 0") == fams[1]


def test_dual_family_transforms_the_ode():
    # vertical lines solve y'' = h3 p^3 + ... only when h3 = 0
    vert = [Family(R("0"), dual=True)]
    assert not any(check_linearization(vert, CubicODE.of("0", "x", "y", "1")).residuals)
    assert any(check_linearization(vert, CubicODE.of("1", "0", "0", "0")).residuals)
