"""Exact arithmetic: polynomials, rational functions, truncated series, expressions."""

from .poly import Poly, as_rational, poly_sum
from .ratfunc import RatFunc, poly_gcd
from .series import JetSeries, SeriesError, series_lift
from .expr import ParseError, normalize, parse_expr, to_poly, to_ratfunc, to_text


def differentiate(f, name: str):
    """Exact partial derivative of a RatFunc or Poly with respect to ``name``."""
    if isinstance(f, Poly):
        f = RatFunc.from_poly(f)
    return f.diff(name)


__all__ = [
    "Poly", "RatFunc", "JetSeries", "SeriesError", "ParseError",
    "as_rational", "poly_sum", "poly_gcd", "series_lift", "differentiate",
    "normalize", "parse_expr", "to_poly", "to_ratfunc", "to_text",
]
