import itertools
import random
import threading

import pytest
from hypothesis import given, settings, strategies as st

from khst.cube import Cube, CubeVertex, Merge, Split, classify_edge, classify_face, resolve
from khst.errors import LengthMismatch, NotAFace, NotAnEdge, NotRealizable, OrientationConflict
from khst.linkdata import diagram_from_quads, parse_pd

from conftest import knotinfo

# two-crossing diagrams found by running over all 2-crossing PD codes
FACE_EXAMPLES = {
    "TwoMerges": [(1, 1, 2, 3), (2, 3, 4, 4)],
    "SplitThenMerge": [(1, 1, 2, 3), (2, 4, 4, 3)],
    "TwoSplits": [(1, 2, 2, 3), (3, 4, 4, 1)],
    "MergeThenSplit": [(1, 2, 3, 4), (2, 1, 4, 3)],
    "Disjoint": [(1, 1, 2, 2), (3, 3, 4, 4)],
    "Ladybug": [(1, 2, 3, 4), (2, 3, 4, 1)],
}


def test_vertex_strings():
    v = CubeVertex.from_string("011")
    assert v.bits == 0b110 and v.weight == 2 and str(v) == "011"


def test_trefoil_all_zero(trefoil):
    assert len(resolve(trefoil, "000").circles) == 2


def test_trefoil_all_one(trefoil):
    assert len(resolve(trefoil, "111").circles) == 3


def test_circles_partition_arcs(trefoil):
    for v in range(8):
        arcs = sorted(a for c in resolve(trefoil, v).circles for a in c)
        assert arcs == list(range(1, 7))


def test_circles_ordered_by_least_arc(trefoil):
    for v in range(8):
        mins = [min(c) for c in resolve(trefoil, v).circles]
        assert mins == sorted(mins)


def test_one_crossing_unknot():
    D = parse_pd("UNKNOT")
    a, b = len(resolve(D, "0").circles), len(resolve(D, "1").circles)
    assert {a, b} == {1, 2}


def test_vertex_length_checked(trefoil):
    with pytest.raises(LengthMismatch):
        resolve(trefoil, "01")


def test_trefoil_merge(trefoil):
    e = classify_edge(trefoil, "000", "100")
    assert isinstance(e, Merge) and (e.c1, e.c2) == (0, 1)


def test_trefoil_split(trefoil):
    e = classify_edge(trefoil, "011", "111")
    assert isinstance(e, Split)
    assert len(resolve(trefoil, "111").circles) == 3


def test_untouched_circles_tracked(trefoil):
    cube = Cube(trefoil)
    for v in range(8):
        for k in range(3):
            if v >> k & 1:
                continue
            e = cube.edge(v, k)
            w = v | 1 << k
            src, dst = cube.circles(v), cube.circles(w)
            for s, t in e.others:
                assert set(src[s]) == set(dst[t])


@pytest.mark.parametrize("u,w", [("000", "000"), ("000", "110"), ("100", "000")])
def test_not_an_edge(trefoil, u, w):
    with pytest.raises(NotAnEdge):
        classify_edge(trefoil, u, w)


@pytest.mark.parametrize("kind", sorted(FACE_EXAMPLES))
def test_face_kinds(kind):
    D = diagram_from_quads(FACE_EXAMPLES[kind])
    assert classify_face(D, "00", "11").kind == kind


def test_ladybug_example_shape():
    D = diagram_from_quads(FACE_EXAMPLES["Ladybug"])
    cube = Cube(D)
    assert [cube.ncircles(v) for v in range(4)] == [1, 2, 2, 1]
    assert D.components == 2


def test_ladybug_conventions_pair_differently():
    D = diagram_from_quads(FACE_EXAMPLES["Ladybug"])
    right = classify_face(D, "00", "11", "right").matching
    left = classify_face(D, "00", "11", "left").matching
    assert len(right) == len(left) == 2
    assert right != left


def test_unknown_convention():
    D = diagram_from_quads(FACE_EXAMPLES["Ladybug"])
    with pytest.raises(ValueError):
        classify_face(D, "00", "11", "up")


def test_ladybug_only_in_split_patterns():
    for quads in two_crossing_codes():
        try:
            D = diagram_from_quads(quads)
            f = classify_face(D, "00", "11")
        except (NotRealizable, OrientationConflict):
            continue
        if f.kind == "Ladybug":
            cube = Cube(D)
            assert isinstance(cube.edge(0, 0), Split) and isinstance(cube.edge(0, 1), Split)
            assert cube.ncircles(3) == cube.ncircles(0)


@pytest.mark.parametrize("u,w", [("000", "100"), ("000", "111"), ("100", "110"), ("011", "101")])
def test_not_a_face(trefoil, u, w):
    with pytest.raises(NotAFace):
        classify_face(trefoil, u, w)


def test_face_symmetric_in_coordinates(trefoil):
    cube = Cube(trefoil)
    for v in range(8):
        for i, j in itertools.combinations(range(3), 2):
            if v >> i & 1 or v >> j & 1:
                continue
            a, b = cube.face(v, i, j), cube.face(v, j, i)
            assert a == b


def test_face_kind_matches_deltas():
    D = diagram_from_quads(knotinfo()["K6a3"][1])
    cube = Cube(D)
    for v in range(1 << D.n):
        for i, j in itertools.combinations(range(D.n), 2):
            if v >> i & 1 or v >> j & 1:
                continue
            f = cube.face(v, i, j)
            n0, n1, n2, n3 = (cube.ncircles(v), cube.ncircles(v | 1 << i),
                              cube.ncircles(v | 1 << j), cube.ncircles(v | 1 << i | 1 << j))
            d = sorted([(n1 - n0, n3 - n1), (n2 - n0, n3 - n2)])
            expect = {
                "TwoMerges": [(-1, -1), (-1, -1)],
                "TwoSplits": [(1, 1), (1, 1)],
                "Ladybug": [(1, -1), (1, -1)],
                "MergeThenSplit": [(-1, 1), (-1, 1)],
                "SplitThenMerge": [(-1, 1), (1, -1)],
            }
            if f.kind != "Disjoint":
                assert d == expect[f.kind], (v, i, j, f.kind)


def test_concurrent_readers(trefoil):
    cube = Cube(trefoil)
    want = [Cube(trefoil).circles(v) for v in range(8)]
    got = {}

    def work(t):
        got[t] = [cube.circles(v) for v in range(8)]

    ts = [threading.Thread(target=work, args=(t,)) for t in range(8)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert all(g == want for g in got.values())


def two_crossing_codes():
    seen = set()
    for labels in itertools.product(range(1, 5), repeat=8):
        if any(labels.count(a) != 2 for a in range(1, 5)):
            continue
        quads = (labels[:4], labels[4:])
        if quads in seen:
            continue
        seen.add(quads)
        yield [list(q) for q in quads]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_edges_change_circle_count_by_one(seed):
    rng = random.Random(seed)
    _, quads, _, _ = rng.choice([k for k in knotinfo().values() if len(k[1]) <= 9])
    cube = Cube(diagram_from_quads(quads))
    for _ in range(30):
        v = rng.randrange(1 << cube.n)
        k = rng.randrange(cube.n)
        if v >> k & 1:
            continue
        assert abs(cube.ncircles(v | 1 << k) - cube.ncircles(v)) == 1
