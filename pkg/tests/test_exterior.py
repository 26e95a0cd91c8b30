import pytest

from helpers import random_forms
from threeweb.deformation import GENERATORS, build_sl3_coframe, maurer_cartan_rules
from threeweb.exterior import (Chart, ChartError, DiffForm, check_d_squared, ext_d, parse_chart,
                               wedge, wedge_all)
from threeweb.symbolic import Poly, to_poly

XY = Chart.coordinate(("x", "y"))


def test_d_of_function_and_one_form():
    f = XY.scalar(to_poly("x^2*y"))
    df = ext_d(f)
    assert df.coefficient("dx") == to_poly("2*x*y")
    assert df.coefficient("dy") == to_poly("x^2")
    a = XY.gen("dx", to_poly("-y")) + XY.gen("dy", to_poly("x"))
    assert ext_d(a).coefficient("dx", "dy") == 2
    assert ext_d(a).coefficient("dy", "dx") == -2


def test_wedge_sign_and_square():
    dx, dy = XY.gen("dx"), XY.gen("dy")
    assert wedge(dx, dy) == -wedge(dy, dx)
    assert wedge(dx, dx).is_zero()
    assert wedge_all([dx, dy]).coefficient("dx", "dy") == 1


def test_bad_component_index():
    with pytest.raises(ChartError):
        DiffForm(XY, 2, {(1, 0): Poly.one()})
    with pytest.raises(ChartError):
        XY.gen("dz")


def test_mixed_chart_rejected():
    other = Chart.coordinate(("x", "y"))
    with pytest.raises(ChartError):
        XY.gen("dx") + other.gen("dx")


FORMS = random_forms(2024, 120)


def test_d_squared_on_random_forms():
    chart, forms = FORMS
    assert len(forms) >= 100
    for a in forms:
        assert ext_d(ext_d(a)).is_zero()


def test_leibniz_on_random_forms():
    chart, forms = FORMS
    for a, b in zip(forms, forms[1:] + forms[:1]):
        if a.degree + b.degree + 1 > chart.dim:
            continue
        lhs = ext_d(wedge(a, b))
        sign = -1 if a.degree % 2 else 1
        rhs = wedge(ext_d(a), b) + wedge(a, ext_d(b)) * sign
        assert lhs == rhs


def test_graded_anticommutativity_on_random_forms():
    chart, forms = FORMS
    for a, b in zip(forms, forms[2:] + forms[:2]):
        sign = -1 if (a.degree * b.degree) % 2 else 1
        assert wedge(a, b) == wedge(b, a) * sign


def test_wedge_associative_on_random_forms():
    chart, forms = FORMS
    for a, b, c in zip(forms, forms[1:], forms[2:]):
        assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


def test_sl3_chart_matches_maurer_cartan():
    chart = build_sl3_coframe()
    assert chart.generators == GENERATORS
    rules = maurer_cartan_rules(chart)
    for g in GENERATORS:
        assert chart.d_generator(chart.index[g]) == rules[g], g
    assert all(r.is_zero() for r in check_d_squared(chart).values())


def test_coframe_d_squared_detects_bad_rules():
    good = parse_chart("[generators]\na b\n[d-rules]\na = a^b\n[derivation]\nu = b\nv = v*b\n")
    assert all(r.is_zero() for r in check_d_squared(good).values())
    # du = a forces d(du) = da = a^b
    bad = check_d_squared(parse_chart("[generators]\na b\n[d-rules]\na = a^b\n[derivation]\nu = a\n"))
    assert bad["u"].coefficient("a", "b") == 1


def test_parse_chart_errors():
    with pytest.raises(ChartError):
        parse_chart("[generators]\na\n[bogus]\n")
    with pytest.raises(ChartError):
        parse_chart("[generators]\na\n[d-rules]\na = a\n")
