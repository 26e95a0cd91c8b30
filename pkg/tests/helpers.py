"""Seeded random inputs shared by the property and acceptance tests."""

import random
from fractions import Fraction
from itertools import combinations

from threeweb.exterior import Chart, DiffForm
from threeweb.symbolic import Poly

COORDS = ("x", "y", "z", "w")


def random_poly(rng, gens=COORDS, terms=3, deg=2):
    d = {}
    for _ in range(rng.randint(0, terms)):
        m = tuple(rng.randint(0, deg) for _ in gens)
        d[m] = Fraction(rng.randint(-6, 6), rng.randint(1, 3))
    return Poly(gens, d)


def random_form(rng, chart, degree):
    comps = {}
    for idx in combinations(range(chart.dim), degree):
        if rng.random() < 0.6:
            comps[idx] = random_poly(rng, chart.coordinates)
    return DiffForm(chart, degree, comps)


def random_forms(seed, count, chart=None):
    rng = random.Random(seed)
    chart = chart or Chart.coordinate(COORDS)
    return chart, [random_form(rng, chart, rng.randint(0, 3)) for _ in range(count)]


def random_slope_text(rng, deg=2):
    """A random polynomial slope in x, y with small rational coefficients, as text."""
    terms = []
    for _ in range(rng.randint(1, 3)):
        c = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        i, j = rng.randint(0, deg), rng.randint(0, deg)
        terms.append(f"({c})*x^{i}*y^{j}")
    terms.append(str(rng.randint(-3, 3)))
    return " + ".join(terms)


def random_point(rng):
    return (Fraction(rng.randint(-5, 5), rng.randint(1, 4)), Fraction(rng.randint(-5, 5), rng.randint(1, 4)))


def random_web_cases(seed, webs=10, points=5):
    """[(slope texts, [points])] with slopes pairwise distinct at every point."""
    from threeweb.symbolic import to_ratfunc
    rng = random.Random(seed)
    out = []
    while len(out) < webs:
        slopes = [random_slope_text(rng) for _ in range(3)]
        ps = [to_ratfunc(s) for s in slopes]
        if any(ps[i] == ps[j] for i in range(3) for j in range(i + 1, 3)):
            continue
        pts = []
        while len(pts) < points:
            pt = random_point(rng)
            env = {"x": pt[0], "y": pt[1]}
            vals = [p.num.evaluate(env) for p in ps]
            if len(set(vals)) == 3:
                pts.append(pt)
        out.append((slopes, pts))
    return out
