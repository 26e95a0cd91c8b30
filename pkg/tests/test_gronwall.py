import hashlib
from importlib import resources

import pytest

from threeweb import gronwall as g
from threeweb.symbolic import to_poly

PINNED = {
    "prolong_A_4_0_m1.poly": "36d82acb2a61cde799610e1769aa51fae2a4869b769e62c5dcd322a8144b7d71",
    "prolong_A_5_0_m1.poly": "16ebe1b7f9d7823c0438c9d699323e59b8727dba2bbc576ae4e2c8fc8c694fcb",
    "prolong_B_1_m1.poly": "7af165309e58543492b70d241544bebde39c56837c058dca99476ea3eb409d83",
    "prolong_B_2_m1.poly": "5df9073cdc7c411d687ae30343e7a90fba6b0ea1540f7dfca007b2e29d382786",
    "prolong_B_3_0.poly": "541facba8eaeed0258a4cbf4ca91881424fd3c449803def733d997505aedc813",
    "prolong_B_3_m1.poly": "1161b5222693ac420bca7df9d0c776ea28a38084cec37c0c3f03313ff46d80f4",
    "prolong_B_4_m1.poly": "35da9ca670f2e646630a76d1036da839d77693c9c1ec211daf9d8d1fadea7256",
    "prolong_B_5_0.poly": "6ad8c04a1cb99afad55cf1a40fca7a71a43636dd8b882e9d6966934d975a1e47",
    "prolong_B_5_m1.poly": "a79b4a29c816b646d037b8e0d1571ac2235b9826901582c9e56797dd23b69ccb",
    "prolong_B_6_0.poly": "8d03f9b1773e872f99c7f3d8ce294d61f46c7d70f072e07770d5a11218366d6b",
    "prolong_B_6_m1.poly": "d28debe3fff80ac2d64cb4e4ae6ab49e60128ca75c8da0a6077e8919517fe017",
    "prolong_T_1_m1_m1_0.poly": "9f16bbb8f875c12d6b3f36383e03c41dd59d8d1f26e74251174d801a64dc1bb9",
    "prolong_T_1_m1_m1_m1.poly": "449e3a3e131604fc4cb90ac19fd0b52d154d1fca0282839f2b2a3275b2571be2",
    "general_K12.poly": "716f800a0a272c69d75e0a85babb086a87906696d6fd31f277309a690bf4339e",
    "general_K34.poly": "856082eb630c9da4bcc4c0a4dca531b63937ba0ad8703b8932885d03c408bae4",
    "general_K5.poly": "76ac35524af5abaab0110de650ecd7218624a5809eafee70c6159c8d9506a443",
    "one_pencil_K12.poly": "7a5e51584f3eca07da7146602f85f1aed3d83db61aee5805e56e32e1d8c1b3c2",
    "one_pencil_K3.poly": "7b1f2addb00c58c6c0c492f490c88d38b6fd827113494e2285c31d40a2fb7b29",
    "two_pencil_12.poly": "1cb4d4c2ef8c76ada17dcc27be1218ba7ddb3948cf282464156d414a082c7216",
    "two_pencil_34.poly": "89727e3fdc675eab8ef9e3695ca6eb8f46165b9be47edb09c9ff20381b4bd07a",
    "two_pencil_56.poly": "9c6a314535f799a4bb047357878d5ca4b38ce93c7e8032aba138701194cd6524",
    "two_pencil_7.poly": "5663962176d7b49baba5255c38a9d19e8f8c5b6f37200f2e14891331d7fe37e6",
    "two_pencil_B6.poly": "2a05c941ed3c8a476935e2270276b1c290243774b786d5d4fa258d87976aaea4",
}
EQ6_HASH = "ae1aaf07914e889493dd1d5458741beb4bad18723bcf8bef7c3276f0954f2841"
TABLE_HASH = "c1e5e8b21efb58cc94300b2c72f37fdaf74afb98c0fa4d86082f644ce2eccb0c"


@pytest.fixture(scope="module")
def table():
    return g.default_table()


def P(text):
    return g._canon(to_poly(text))


# data ---------------------------------------------------------------------------------

def test_data_files_match_pinned_hashes():
    root = resources.files(g.DATA_PACKAGE)
    for fname, digest in PINNED.items():
        assert hashlib.sha256(root.joinpath(fname).read_bytes()).hexdigest() == digest, fname
    assert g.data_manifest() == PINNED


def test_every_data_file_parses():
    for fname in PINNED:
        assert g.load_data(fname)


def test_tampered_data_is_refused(monkeypatch):
    real = g._data_text
    monkeypatch.setattr(g, "_data_text",
                        lambda f: real(f) + "\n" if f == "general_K5.poly" else real(f))
    with pytest.raises(g.TableError):
        g.load_data("general_K5.poly")


# table assembly -----------------------------------------------------------------------

def test_table_examples(table):
    assert table.variables == g.VARIABLES
    assert table.derivatives["T_{0,0}"][1] == P("-3*T_{0,0}*A_4 + B_1")
    assert table.derivatives["A_4"][1] == P("A_{4,0} - 3*A_4^2")
    assert table.structure["omega"] == P("3*A_4")
    assert g.PROLONGED["B_6"][0] == 18
    assert table.content_hash() == TABLE_HASH


def test_validation_and_eq6(table):
    rep = g.validate_table(table)
    assert rep.verdict
    assert set(rep.residuals) == set(g.VARIABLES)
    assert all(not r for v, r in rep.residuals.items() if v != "B_6")
    assert rep.eq6 and rep.eq6_terms == 456 and rep.eq6_degree == 7
    assert rep.eq6_hash == EQ6_HASH


def test_validation_through_exterior_chart_agrees(table):
    a, b = g.validate_table(table), g.validate_table(table, use_chart=True)
    assert b.verdict and a.residuals == b.residuals


def test_leading_terms(table):
    entries = g.leading_term_check(table)
    assert len(entries) == len(g.LEADING_RELATIONS)
    assert all(e.ok for e in entries)
    strict = {(e.variable, e.direction) for e in entries if not e.graded_ok}
    assert strict == {("B_4", "omega"), ("B_5", "theta")}


# curvature ideals ---------------------------------------------------------------------

def test_curvature_at_gauge():
    k = g.curvature_K("general")
    assert k == P("-1/2*(4*T_{1,-1}*A_4 + A_{5,0} + 5*A_4 + 3*T_{0,0} - 8*A_5*A_4)")


@pytest.mark.parametrize("case,units,solved", [
    ("general", ["-1/2", "-1", "-3", "-1", "1/2", "1/2"],
     ["A_{5,0}", "B_2", "B_1", "B_5", "B_4", "B_6"]),
    ("one_pencil", ["-1/2", "-1", "-1", "-1"], ["A_{5,0}", "B_2", "B_3", "B_5"]),
])
def test_towers(table, case, units, solved):
    tower = g.build_ideal_tower(case, table)
    assert [str(u) for u in tower.units] == units
    assert [v for v, _ in tower.solved] == solved
    assert tower.matches and all(m.ok for m in tower.matches)


def test_one_pencil_chain(table):
    tower = g.build_ideal_tower("one_pencil", table)
    assert set(tower.substitutions) == {"T_{0,0}", "B_1", "B_4", "B_6"}


@pytest.mark.parametrize("case", g.CASES)
def test_closure(table, case):
    rep = g.verify_closure(case, table)
    assert rep.verdict
    assert all(not r for r in rep.residuals.values())


def test_two_pencil_details(table):
    rep = g.verify_closure("two_pencil", table)
    for key in ("b4_vanishes", "dB1_closure", "xxx7", "displayed_substitutions"):
        assert rep.details[key] is True
    d = g.derive_two_pencil(table)
    assert all(d.agree) and d.leftovers


def test_two_pencil_curvature_is_minus_t00():
    assert g.curvature_K("two_pencil") == -P("T_{0,0}")


def test_reduce_is_idempotent(table):
    tower = g.build_ideal_tower("general", table)
    for _, gen in tower.generators:
        r = g.reduce(gen, tower)
        assert not r
    p = P("B_6*A_4 + T_{1,-1}^2*B_2 - A_{5,0}")
    once = g.reduce(p, tower)
    assert g.reduce(once, tower) == once


def test_q_matrix(table):
    q = g.q_matrix(table)
    assert q.degree == 6
    assert q.support == ("T_{0,0}", "T_{1,-1}", "A_4", "A_{4,0}", "A_5")
    assert len(q.numerator) == 82


# persistence --------------------------------------------------------------------------

def test_dump_load_round_trip(table, tmp_path):
    p1, p2 = tmp_path / "a.table", tmp_path / "b.table"
    h1 = g.dump_table(table, p1)
    back = g.load_table(p1)
    h2 = g.dump_table(back, p2)
    assert h1 == h2
    assert p1.read_bytes() == p2.read_bytes()
    assert back.derivatives == table.derivatives and back.jet_order == table.jet_order


def test_corrupted_table_is_refused(table, tmp_path):
    path = tmp_path / "t.table"
    g.dump_table(table, path)
    text = path.read_text().replace("3*A_4", "4*A_4", 1)
    path.write_text(text)
    with pytest.raises(g.TableError, match="hash mismatch"):
        g.load_table(path)
