import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from khst import invariants
from khst.errors import DimensionMismatch, NegativeComponent, UnknownName
from khst.exactla import F2Matrix
from khst.homology import OpMatrix, kh
from khst.invariants import (KhKey, LinkResult, RankProfile, StEntry, StTable, analyze,
                             census_compare, compare_with_mirror, compute_census, cp2_count,
                             kh_key, mutant_check, rank_profile, st_entry, st_table)
from khst.linkdata import CensusEntry, diagram_from_quads, mirror, parse_pd

from conftest import RH_TREFOIL_PD, TREFOIL_PD, htw


def op(rows, cols, columns):
    return OpMatrix((0, 0), (0, 0), F2Matrix.from_columns(rows, columns))


def zero(rows, cols):
    return op(rows, cols, [0] * cols)


def unknot_entry(name="unknot"):
    return CensusEntry(name, parse_pd("UNKNOT"))


def trefoil_entry(name="trefoil"):
    return CensusEntry(name, parse_pd(RH_TREFOIL_PD))


# ---------------------------------------------------------------- ranks

def test_profile_all_zero():
    assert rank_profile(zero(2, 2), zero(2, 2), zero(2, 2)) == RankProfile(0, 0, 0, 0)


def test_profile_identity_sq2():
    p = rank_profile(zero(0, 2), zero(2, 0), op(2, 2, [0b01, 0b10]))
    assert p == RankProfile(2, 2, 0, 0)


def test_profile_dimension_checks():
    with pytest.raises(DimensionMismatch):
        rank_profile(zero(1, 2), zero(1, 1), zero(1, 3))
    with pytest.raises(DimensionMismatch):
        rank_profile(zero(1, 2), zero(1, 2), zero(1, 2))
    with pytest.raises(DimensionMismatch):
        rank_profile(zero(1, 2), zero(2, 1), zero(1, 2))


def brute_profile(A, B, S, n, m, p):
    """Ranks by listing every vector of each subspace."""
    def apply(M, x):
        return M.apply(x)

    def log2(s):
        return len(s).bit_length() - 1

    ker = [x for x in range(1 << n) if apply(A, x) == 0]
    im_s = {apply(S, x) for x in range(1 << n)}
    im_sk = {apply(S, x) for x in ker}
    im_b = {apply(B, y) for y in range(1 << m)}
    return RankProfile(log2(im_s), log2(im_sk), log2(im_s & im_b), log2(im_sk & im_b))


def test_profile_against_enumeration():
    for seed in range(500):
        rng = random.Random(seed)
        n, m, p = rng.randint(0, 6), rng.randint(0, 6), rng.randint(0, 6)
        A = F2Matrix.from_columns(m, [rng.getrandbits(m) if m else 0 for _ in range(n)])
        B = F2Matrix.from_columns(p, [rng.getrandbits(p) if p else 0 for _ in range(m)])
        S = F2Matrix.from_columns(p, [rng.getrandbits(p) if p else 0 for _ in range(n)])
        if rng.random() < 0.3 and n:
            # make some Sq^2 columns land in im B
            cols = [B.apply(rng.getrandbits(m)) if m else 0 for _ in range(n)]
            S = F2Matrix.from_columns(p, cols)
        got = rank_profile(OpMatrix((0, 0), (1, 0), A), OpMatrix((1, 0), (2, 0), B),
                           OpMatrix((0, 0), (2, 0), S))
        assert got == brute_profile(A, B, S, n, m, p), seed


def test_st_entry_examples():
    assert st_entry(RankProfile(0, 0, 0, 0)) == StEntry(0, 0, 0, 0)
    assert st_entry(RankProfile(2, 1, 1, 1)) == StEntry(0, 1, 1, 0)
    assert st_entry(RankProfile(1, 1, 0, 0)) == StEntry(1, 0, 0, 0)


def test_st_entry_negative():
    with pytest.raises(NegativeComponent):
        st_entry(RankProfile(1, 2, 0, 0))
    with pytest.raises(NegativeComponent):
        RankProfile(1, 2, 0, 0).check()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_profiles_are_natural(seed):
    rng = random.Random(seed)
    n, m, p = (rng.randint(0, 5) for _ in range(3))
    A = F2Matrix.from_columns(m, [rng.getrandbits(m) if m else 0 for _ in range(n)])
    B = F2Matrix.from_columns(p, [rng.getrandbits(p) if p else 0 for _ in range(m)])
    S = F2Matrix.from_columns(p, [rng.getrandbits(p) if p else 0 for _ in range(n)])
    prof = rank_profile(OpMatrix((0, 0), (1, 0), A), OpMatrix((1, 0), (2, 0), B),
                        OpMatrix((0, 0), (2, 0), S))
    prof.check()
    e = st_entry(prof)
    assert min(e) >= 0
    assert (e.a, e.b, e.c, e.d) == (prof.r2 - prof.r4, prof.r1 - prof.r2 - prof.r3 + prof.r4,
                                    prof.r4, prof.r3 - prof.r4)


# ---------------------------------------------------------------- tables

def test_table_drops_zero_and_sorts():
    t = StTable({(3, 5): StEntry(0, 1, 0, 0), (0, 1): StEntry(0, 0, 0, 0), (1, 3): StEntry(0, 0, 1, 0)})
    assert list(t.entries) == [(1, 3), (3, 5)]
    assert t.serialize() == "1,3:0,0,1,0;3,5:0,1,0,0"


def test_table_round_trip():
    t = StTable({(-2, -3): StEntry(0, 1, 2, 0), (1, 3): StEntry(0, 2, 0, 1)})
    assert StTable.parse(t.serialize()) == t
    assert StTable.parse("") == StTable()
    assert t.tsv_rows("L") == ["L\t-2\t-3\t0\t1\t2\t0", "L\t1\t3\t0\t2\t0\t1"]


def test_unknot_and_trefoil_tables():
    assert len(st_table(parse_pd("UNKNOT"))) == 0
    assert len(st_table(parse_pd(RH_TREFOIL_PD))) == 0
    assert len(st_table(parse_pd(TREFOIL_PD))) == 0


def test_t34_table_nonempty():
    t = st_table(htw("K8n3"))
    assert len(t) > 0
    assert cp2_count(t)[1] is False


def test_kh_key(trefoil):
    key = kh_key(kh(trefoil, "Z"))
    assert str(key) == "0,1,1,[];0,3,1,[];2,5,1,[];3,7,0,[2];3,9,1,[]"
    assert key == kh_key(kh(parse_pd(RH_TREFOIL_PD), "Z"))
    assert key != kh_key(kh(mirror(trefoil), "Z"))


# ---------------------------------------------------------------- harnesses

def fake(name, key, st=""):
    return LinkResult(name, KhKey(key), StTable.parse(st), 1)


def test_compare_unknot_trefoil():
    rep = census_compare([analyze(unknot_entry()), analyze(trefoil_entry())])
    assert rep.groups == [] and rep.witnesses == []


def test_compare_duplicate_names():
    rep = census_compare([analyze(trefoil_entry("a")), analyze(trefoil_entry("b"))])
    assert rep.groups == [["a", "b"]] and rep.witnesses == []


def test_compare_detects_split():
    rs = [fake("x", "k", "0,1:0,1,0,0"), fake("y", "k", "0,1:0,2,0,0"), fake("z", "k", "0,1:0,1,0,0")]
    rep = census_compare(rs)
    assert rep.witnesses == [[["x", "z"], ["y"]]]
    assert "split" in rep.text()


def test_compare_reports_failures():
    rs = [fake("x", "k"), LinkResult("bad", None, None, None, "NotRealizable: nope")]
    rep = census_compare(rs)
    assert rep.failures == [("bad", "NotRealizable: nope")]
    assert "failed bad" in rep.text()


def test_compare_deterministic():
    rs = [fake(n, k, s) for n, k, s in [("a", "1", ""), ("b", "1", "0,1:0,1,0,0"), ("c", "2", ""),
                                        ("d", "2", ""), ("e", "1", "")]]
    texts = set()
    for perm in itertools.permutations(rs):
        texts.add(census_compare(perm).text())
    assert len(texts) == 1


def test_analyze_captures_errors():
    # a 2-crossing code with no planar realization
    D = diagram_from_quads([(1, 1, 2, 3), (2, 4, 3, 4)])
    r = analyze(CensusEntry("np", D))
    assert r.key is None and r.error.startswith("NotRealizable")


def test_link_result_json():
    r = analyze(trefoil_entry())
    assert LinkResult.from_json(r.to_json()) == r


def test_census_journal_resume(tmp_path, monkeypatch):
    journal = tmp_path / "j.jsonl"
    entries = [unknot_entry(), trefoil_entry()]
    first = sorted(compute_census(entries, journal=journal), key=lambda r: r.name)
    assert len(journal.read_text().splitlines()) == 2

    def boom(*a, **k):
        raise AssertionError("recomputed")

    monkeypatch.setattr(invariants, "analyze", boom)
    again = sorted(compute_census(entries, journal=journal), key=lambda r: r.name)
    assert again == first


def test_census_workers_match():
    entries = [unknot_entry(), trefoil_entry(), CensusEntry("fig8", htw("K4a1"))]
    one = census_compare(compute_census(entries, workers=1)).text()
    two = census_compare(compute_census(entries, workers=2)).text()
    assert one == two


def test_compare_with_mirror():
    entries = [trefoil_entry("a"), CensusEntry("b", mirror(parse_pd(RH_TREFOIL_PD)))]
    orientation, results = compare_with_mirror(entries)
    assert orientation == "none"
    orientation, results = compare_with_mirror([trefoil_entry("a"), trefoil_entry("b")])
    assert orientation == "as parsed" and len(results) == 2


def test_mutant_check_harness():
    census = [unknot_entry(), trefoil_entry()]
    rep = mutant_check(census, [("unknot", "trefoil")])
    assert rep.rows[0][0] == ("unknot", "trefoil")
    assert rep.rows[0][2] is False
    assert mutant_check(census, []).rows == []
    with pytest.raises(UnknownName):
        mutant_check(census, [("unknot", "K11n34")])


def test_cp2_examples():
    assert cp2_count(StTable()) == ({}, False)
    assert cp2_count(StTable({(1, 5): StEntry(0, 2, 0, 1)})) == ({(1, 5): 0}, False)
    assert cp2_count(StTable({(0, 3): StEntry(1, 0, 0, 0)}))[1] is True
