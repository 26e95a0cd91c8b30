from threeweb import deformation as dfm
from threeweb.exterior import check_d_squared
from threeweb.symbolic import Poly, to_poly


def test_sl3_coframe_is_flat():
    chart = dfm.build_sl3_coframe()
    assert all(r.is_zero() for r in check_d_squared(chart).values())
    # d(theta) written out by hand from d(phi) = -phi^phi with phi00 = -phi11 - phi22
    dth = chart.d_generator(chart.index["theta"])
    assert dth.coefficient("omega", "eta") == 1
    assert dth.coefficient("theta", "phi11") == 1
    assert dth.coefficient("theta", "phi22") == 2


def test_delta_shape():
    chart = dfm.build_deformation_chart()
    delta = dfm.delta_matrix(chart)
    assert delta[1][0].is_zero() and delta[2][0].is_zero()
    assert delta[2][1] == chart.gen("omega", to_poly("t"))
    assert delta[0][0] == delta[2][2]
    trace = delta[0][0] + delta[1][1] + delta[2][2]
    assert trace.is_zero()


def test_fundast_all_nine_components_vanish():
    res = dfm.verify_fundast()
    assert len(res) == 9
    assert all(r.is_zero() for r in res.values())


def test_fundast_detects_a_broken_rule():
    chart = dfm.build_deformation_chart()
    chart.set_derivation("t", chart.derivation["t"] + chart.gen("eta"))
    res = dfm.verify_fundast(chart)
    assert not res[(2, 1)].is_zero()


def test_sigma_covariance():
    assert dfm.sigma_poly() == to_poly("t*Z1^3 + T_1*Z1^2*Z2 + 6*A_2*Z1*Z2^2 - 2*A_3*Z2^3")
    r = dfm.verify_sigma_covariance()
    assert r.ok and not r.residual
    assert r.z1sq_z0_mod_z2 == (to_poly("-3*t"), to_poly("-T_1"))
    assert r.z1cube_mod_z2 == (to_poly("T_{-1}"), to_poly("T_0"))


def test_linearity_quartic_and_solutions():
    rep = dfm.verify_linearity_solutions()
    assert not rep.quartic_mismatch
    assert not rep.divisibility_mismatch
    assert set(rep.solution_residuals) == {"solution_1", "solution_2"}
    for rs in rep.solution_residuals.values():
        assert len(rs) == 3 and all(not r for r in rs)
    assert rep.ok
    q = dfm.linearity_quartic()
    top = q.coefficients_in("Z1").get(4, Poly.zero()).coefficients_in("Z2").get(0, Poly.zero())
    assert top == to_poly("T_{-1}")


def test_d_squared_statuses():
    entries = dfm.check_deformation_d_squared()
    assert [e.name for e in entries] == list(dfm.DISPLAYED)
    assert all(e.status in ("identity", "requires prolongation") for e in entries)
    assert all(set(e.absorbing) <= set(dfm.UNDISPLAYED) for e in entries)


def test_hypotheses_are_recorded():
    assert len(dfm.HYPOTHESES) == 2
