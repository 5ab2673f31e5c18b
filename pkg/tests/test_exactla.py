import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from khst.errors import DimensionMismatch
from khst.exactla import (EchelonBasis, F2Matrix, ZSparseMatrix, f2_decompose, f2_rank,
                          smith_normal_form, subspace_intersection)

SEEDS = range(1000)


# naive oracles: one bit per list cell, cofactor determinants

def naive_rank(mat):
    m = [row[:] for row in mat]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(m)) if m[r][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c]:
                m[r] = [x ^ y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def span(vectors):
    out = {0}
    for v in vectors:
        out |= {x ^ v for x in out}
    return out


def det(m):
    if not m:
        return 1
    return sum((-1) ** c * m[0][c] * det([row[:c] + row[c + 1:] for row in m[1:]])
               for c in range(len(m)) if m[0][c])


def determinantal_factors(mat):
    rows, cols = len(mat), len(mat[0])
    g = [1]
    for k in range(1, min(rows, cols) + 1):
        d = 0
        for rs in itertools.combinations(range(rows), k):
            for cs in itertools.combinations(range(cols), k):
                d = math.gcd(d, det([[mat[r][c] for c in cs] for r in rs]))
        if d == 0:
            break
        g.append(d)
    return tuple(g[t] // g[t - 1] for t in range(1, len(g)))


def random_f2(rng, rows, cols):
    return [[rng.randrange(2) for _ in range(cols)] for _ in range(rows)]


# ---------------------------------------------------------------- F2

def test_identity():
    d = f2_decompose(F2Matrix.identity(5))
    assert d.rank == 5 and d.kernel == ()


def test_zero():
    d = f2_decompose(F2Matrix(3, 4))
    assert d.rank == 0 and len(d.kernel) == 4


def test_rank_against_naive_oracle():
    for seed in SEEDS:
        rng = random.Random(seed)
        mat = random_f2(rng, 6, 9)
        d = f2_decompose(F2Matrix.from_dense(mat))
        assert d.rank == naive_rank(mat), seed


def test_kernel_and_image():
    for seed in SEEDS:
        rng = random.Random(seed)
        mat = random_f2(rng, rng.randint(1, 7), rng.randint(1, 9))
        M = F2Matrix.from_dense(mat)
        d = f2_decompose(M)
        assert d.rank + len(d.kernel) == M.cols
        assert all(M.apply(k) == 0 for k in d.kernel)
        assert f2_rank(d.kernel) == len(d.kernel)
        assert span(d.image) == span(M.columns())


def test_solve():
    for seed in range(200):
        rng = random.Random(seed)
        M = F2Matrix.from_dense(random_f2(rng, 5, 7))
        d = f2_decompose(M)
        image = span(M.columns())
        for b in range(32):
            x = d.solve(b)
            if b in image:
                assert x is not None and M.apply(x) == b
            else:
                assert x is None


def test_transform_gives_rref():
    M = F2Matrix.from_dense(random_f2(random.Random(7), 5, 8))
    d = f2_decompose(M)
    assert d.transform @ M == d.rref


def test_payload_packing():
    M = F2Matrix.from_entries(2, 70, [(0, 0), (0, 65), (1, 64)])
    assert M.payload == (1, 2, 0, 1)
    assert F2Matrix.from_payload(2, 70, M.payload) == M


def test_payload_trailing_bits():
    with pytest.raises(DimensionMismatch):
        F2Matrix.from_payload(1, 3, [0b1000])
    with pytest.raises(DimensionMismatch):
        F2Matrix.from_payload(1, 3, [0, 0])


def test_echelon_basis():
    eb = EchelonBasis()
    assert eb.add(0b011) and eb.add(0b110) and not eb.add(0b101)
    assert len(eb) == 2 and eb.contains(0b101) and not eb.contains(0b001)


def test_intersection_examples():
    assert subspace_intersection([[1, 0]], [[1, 0]]) == [0b01]
    assert subspace_intersection([[1, 0]], [[0, 1]]) == []


def test_intersection_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        subspace_intersection([[1, 0]], [[1, 0, 0]])
    with pytest.raises(DimensionMismatch):
        subspace_intersection([0b1000], [0b1], dim=3)


def test_intersection_against_brute_force():
    for seed in SEEDS:
        rng = random.Random(seed)
        A = [rng.randrange(256) for _ in range(4)]
        B = [rng.randrange(256) for _ in range(5)]
        got = subspace_intersection(A, B, dim=8)
        sa, sb = span(A), span(B)
        assert span(got) == sa & sb, seed
        assert f2_rank(got) == len(got)
        assert len(got) == f2_rank(A) + f2_rank(B) - f2_rank(A + B)


# ---------------------------------------------------------------- integers

def test_snf_identity():
    assert smith_normal_form(ZSparseMatrix.from_dense([[1, 0, 0], [0, 1, 0], [0, 0, 1]])).invariant_factors == (1, 1, 1)


def test_snf_two_by_two():
    assert smith_normal_form(ZSparseMatrix.from_dense([[2, 4], [6, 8]])).invariant_factors == (2, 4)


def test_snf_diagonal():
    assert smith_normal_form(ZSparseMatrix.from_dense([[6, 0], [0, 4]])).invariant_factors == (2, 12)


def test_snf_empty():
    r = smith_normal_form(ZSparseMatrix(3, 2, ()))
    assert r.invariant_factors == () and r.rank == 0


def test_snf_big_entries():
    big = 10 ** 40
    r = smith_normal_form(ZSparseMatrix.from_dense([[big, 0], [0, big * 3]]))
    assert r.invariant_factors == (big, 3 * big)


def test_sparse_invariants():
    with pytest.raises(ValueError):
        ZSparseMatrix(2, 2, ((0, 0, 0),))
    with pytest.raises(ValueError):
        ZSparseMatrix(2, 2, ((1, 0, 1), (0, 0, 1)))
    with pytest.raises(DimensionMismatch):
        ZSparseMatrix(2, 2, ((2, 0, 1),))


def test_snf_against_determinantal_divisors():
    for seed in SEEDS:
        rng = random.Random(seed)
        rows, cols = rng.randint(1, 4), rng.randint(1, 5)
        mat = [[rng.choice([0, 0, 0, 1, -1, 2, -2, 3, 6]) for _ in range(cols)] for _ in range(rows)]
        r = smith_normal_form(ZSparseMatrix.from_dense(mat))
        assert r.invariant_factors == determinantal_factors(mat), (seed, mat)


def test_snf_transforms():
    for seed in range(200):
        rng = random.Random(seed)
        mat = [[rng.randint(-3, 3) for _ in range(4)] for _ in range(3)]
        r = smith_normal_form(ZSparseMatrix.from_dense(mat), transforms=True)
        P, Q = r.left, r.right
        prod = [[sum(P[a][b] * mat[b][c] for b in range(3)) for c in range(4)] for a in range(3)]
        prod = [[sum(prod[a][b] * Q[b][c] for b in range(4)) for c in range(4)] for a in range(3)]
        diag = [[r.invariant_factors[a] if a == c and a < r.rank else 0 for c in range(4)]
                for a in range(3)]
        assert prod == diag
        assert abs(det([list(row) for row in P])) == 1
        assert abs(det([list(row) for row in Q])) == 1


def unimodular(rng, n):
    U = [[int(a == b) for b in range(n)] for a in range(n)]
    for _ in range(3 * n):
        a, b = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if a == b:
            continue
        q = rng.randint(-3, 3)
        U[a] = [x + q * y for x, y in zip(U[a], U[b])]
    return U


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_snf_invariant_under_unimodular(seed):
    rng = random.Random(seed)
    rows, cols = rng.randint(1, 5), rng.randint(1, 5)
    mat = [[rng.randint(-4, 4) for _ in range(cols)] for _ in range(rows)]
    mixed = matmul(matmul(unimodular(rng, rows), mat), unimodular(rng, cols))
    a = smith_normal_form(ZSparseMatrix.from_dense(mat)).invariant_factors
    b = smith_normal_form(ZSparseMatrix.from_dense(mixed)).invariant_factors
    assert a == b
    assert all(b[t + 1] % b[t] == 0 for t in range(len(b) - 1))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 2 ** 10 - 1), max_size=8), st.integers(1, 10))
def test_rank_nullity(rows, cols):
    M = F2Matrix(len(rows), cols, [r & ((1 << cols) - 1) for r in rows])
    d = f2_decompose(M)
    assert d.rank + len(d.kernel) == cols
    assert all(M.apply(k) == 0 for k in d.kernel)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 63), max_size=5), st.lists(st.integers(0, 63), max_size=5))
def test_intersection_in_both_spans(A, B):
    got = subspace_intersection(A, B, dim=6)
    ea, eb = EchelonBasis(), EchelonBasis()
    for v in A:
        ea.add(v)
    for v in B:
        eb.add(v)
    assert all(ea.contains(v) and eb.contains(v) for v in got)
    assert len(got) == f2_rank(A) + f2_rank(B) - f2_rank(A + B)
