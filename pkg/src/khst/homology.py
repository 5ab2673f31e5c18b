"""Khovanov homology over Z and F2, Sq^1, and homological width.

Homology is found by Gaussian elimination on the cube complex: an
invertible entry ``y0 -> x0`` of the differential is cancelled, and the
complex shrinks to a homotopy equivalent one.  Over F2 the elimination also
carries, for every surviving generator, a cocycle of the original complex
(``rep``) and a linear functional on original cochains (``fun``) with
``<rep_a, fun_b> = delta_ab``.  A cocycle ``z`` then has coordinates
``<z, fun_b>`` in the basis given by the ``rep``'s, with no further solving.
Over Z only unit entries are cancelled and the small remainder goes through
Smith normal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .complex import GradedComplex, KhCube, build_complex
from .errors import EmptyGroup, NotACocycle, DimensionMismatch
from .exactla import F2Matrix, ZSparseMatrix, smith_normal_form
from .linkdata import LinkDiagram

__all__ = [
    "ZCell", "F2Cell", "BigradedGroup", "OpMatrix", "kh", "kh_slice_f2",
    "kh_slice_z", "sq1", "width_f2", "parity", "coordinates", "lift_coboundary",
    "differential_f2", "bockstein_cochain",
]


def parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True)
class ZCell:
    free_rank: int
    invariant_factors: tuple[int, ...]  # factors > 1, sorted


@dataclass(frozen=True)
class F2Cell:
    dim: int
    # bit sets over the slice's degree-i generators
    reps: tuple[int, ...]
    funs: tuple[int, ...]


@dataclass
class BigradedGroup:
    """Homology of one diagram, keyed by ``(i, j)``; zero groups are omitted.

    For ``ring == "F2"`` the slice complexes are kept alongside, since the
    stored representatives are vectors in them.
    """

    ring: str
    entries: dict[tuple[int, int], ZCell | F2Cell]
    complexes: dict[int, GradedComplex] = field(default_factory=dict, repr=False)
    diagram: LinkDiagram | None = field(default=None, repr=False)

    def dim(self, i: int, j: int) -> int:
        e = self.entries.get((i, j))
        if e is None:
            return 0
        return e.dim if isinstance(e, F2Cell) else e.free_rank + len(e.invariant_factors)

    def f2_dims(self) -> dict[tuple[int, int], int]:
        """F2 dimensions; for an integral group, via universal coefficients."""
        if self.ring == "F2":
            return {k: e.dim for k, e in self.entries.items()}
        out: dict[tuple[int, int], int] = {}
        for (i, j), e in self.entries.items():
            ev = sum(1 for d in e.invariant_factors if d % 2 == 0)
            out[(i, j)] = out.get((i, j), 0) + e.free_rank + ev
            if ev:
                out[(i - 1, j)] = out.get((i - 1, j), 0) + ev
        return {k: v for k, v in sorted(out.items()) if v}

    def rows(self) -> list[tuple[int, int, int, tuple[int, ...]]]:
        """``(i, j, free_rank, invariant_factors)`` sorted by ``(i, j)``; Z only."""
        if self.ring != "Z":
            raise ValueError("integral rows need ring Z")
        return [(i, j, e.free_rank, e.invariant_factors) for (i, j), e in sorted(self.entries.items())]


@dataclass(frozen=True)
class OpMatrix:
    """A cohomology operation between stored bases: column ``c`` is the image
    of source basis vector ``c``."""

    source: tuple[int, int]
    target: tuple[int, int]
    matrix: F2Matrix

    @property
    def rank(self) -> int:
        from .exactla import f2_rank
        return f2_rank(self.matrix.row_vectors())

    def compose(self, first: "OpMatrix") -> "OpMatrix":
        """``self`` after ``first``."""
        if first.target != self.source:
            raise DimensionMismatch("operations do not compose")
        return OpMatrix(first.source, self.target, self.matrix @ first.matrix)


# ---------------------------------------------------------------- elimination

def _flatten(cx: GradedComplex):
    degs = cx.degrees
    base = {}
    total = 0
    for i in degs:
        base[i] = total
        total += cx.dim(i)
    deg = [0] * total
    local = [0] * total
    for i in degs:
        for r in range(cx.dim(i)):
            deg[base[i] + r] = i
            local[base[i] + r] = r
    return degs, base, total, deg, local


def kh_slice_f2(cx: GradedComplex) -> dict[int, F2Cell]:
    """F2 cohomology of one slice with representatives and dual functionals."""
    degs, base, total, deg, local = _flatten(cx)
    out: list[set[int]] = [set() for _ in range(total)]
    inc: list[set[int]] = [set() for _ in range(total)]
    for i in degs:
        b0, b1 = base[i], base.get(i + 1)
        for r, terms in enumerate(cx.diff.get(i, ())):
            if not terms:
                continue
            g = b0 + r
            s = {b1 + t for t, _ in terms}
            out[g] = s
            for x in s:
                inc[x].add(g)
    rep = [1 << local[g] for g in range(total)]
    fun = [1 << local[g] for g in range(total)]
    alive = [True] * total
    for y0 in range(total):
        if not alive[y0] or not out[y0]:
            continue
        o0 = out[y0]
        x0 = min(o0, key=lambda x: (len(inc[x]), x))
        # y in inc[x0]: d'(y) = d(y) + d(y0); rep[y] += rep[y0]
        ry0 = rep[y0]
        for y in list(inc[x0]):
            if y == y0:
                continue
            oy = out[y]
            for x in o0:
                if x in oy:
                    oy.discard(x)
                    inc[x].discard(y)
                else:
                    oy.add(x)
                    inc[x].add(y)
            rep[y] ^= ry0
        fx0 = fun[x0]
        for x in o0:
            if x != x0:
                fun[x] ^= fx0
        # delete y0 and x0
        for x in o0:
            inc[x].discard(y0)
        for y in inc[y0]:
            out[y].discard(y0)
        for x in out[x0]:
            inc[x].discard(x0)
        out[y0] = set()
        out[x0] = set()
        inc[y0] = set()
        inc[x0] = set()
        alive[y0] = alive[x0] = False
    cells: dict[int, F2Cell] = {}
    for i in degs:
        survivors = [g for g in range(base[i], base[i] + cx.dim(i)) if alive[g]]
        if survivors:
            cells[i] = F2Cell(len(survivors), tuple(rep[g] for g in survivors),
                              tuple(fun[g] for g in survivors))
    return cells


def kh_slice_z(cx: GradedComplex) -> dict[int, ZCell]:
    """Integral cohomology of one slice."""
    degs, base, total, deg, local = _flatten(cx)
    out: list[dict[int, int]] = [{} for _ in range(total)]
    inc: list[set[int]] = [set() for _ in range(total)]
    for i in degs:
        b0, b1 = base[i], base.get(i + 1)
        for r, terms in enumerate(cx.diff.get(i, ())):
            g = b0 + r
            d = {b1 + t: v for t, v in terms}
            out[g] = d
            for x in d:
                inc[x].add(g)
    alive = [True] * total
    changed = True
    while changed:
        changed = False
        for y0 in range(total):
            if not alive[y0]:
                continue
            o0 = out[y0]
            units = [x for x, v in o0.items() if v == 1 or v == -1]
            if not units:
                continue
            x0 = min(units, key=lambda x: (len(inc[x]), x))
            phi = o0[x0]
            for y in list(inc[x0]):
                if y == y0:
                    continue
                oy = out[y]
                a = oy[x0] * phi  # phi^-1 == phi for units
                for x, v in o0.items():
                    nv = oy.get(x, 0) - a * v
                    if nv:
                        if x not in oy:
                            inc[x].add(y)
                        oy[x] = nv
                    elif x in oy:
                        del oy[x]
                        inc[x].discard(y)
            for x in o0:
                inc[x].discard(y0)
            for y in inc[y0]:
                out[y].pop(y0, None)
            for x in out[x0]:
                inc[x].discard(x0)
            out[y0] = {}
            out[x0] = {}
            inc[y0] = set()
            inc[x0] = set()
            alive[y0] = alive[x0] = False
            changed = True
    # remaining complex: SNF of each differential
    surv = {i: [g for g in range(base[i], base[i] + cx.dim(i)) if alive[g]] for i in degs}
    ranks: dict[int, int] = {}
    torsion: dict[int, tuple[int, ...]] = {}
    for i in degs:
        src, tgt = surv[i], surv.get(i + 1, [])
        if not src or not tgt:
            ranks[i] = 0
            torsion[i + 1] = ()
            continue
        tpos = {g: k for k, g in enumerate(tgt)}
        entries = []
        for c, g in enumerate(src):
            for x, v in out[g].items():
                entries.append((tpos[x], c, v))
        snf = smith_normal_form(ZSparseMatrix.from_entries(len(tgt), len(src), entries))
        ranks[i] = snf.rank
        torsion[i + 1] = snf.torsion
    cells: dict[int, ZCell] = {}
    for i in degs:
        free = len(surv[i]) - ranks.get(i, 0) - ranks.get(i - 1, 0)
        tors = tuple(sorted(torsion.get(i, ())))
        if free or tors:
            cells[i] = ZCell(free, tors)
    return cells


def kh(diagram: LinkDiagram, ring: str = "Z", kcube: KhCube | None = None,
       j_filter=None) -> BigradedGroup:
    ring = ring.upper()
    cxs = build_complex(diagram, ring, j_filter=j_filter, kcube=kcube)
    entries: dict[tuple[int, int], ZCell | F2Cell] = {}
    keep: dict[int, GradedComplex] = {}
    for cx in cxs:
        cells = kh_slice_f2(cx) if ring == "F2" else kh_slice_z(cx)
        for i, cell in cells.items():
            entries[(i, cx.j)] = cell
        if ring == "F2":
            keep[cx.j] = cx
    entries = dict(sorted(entries.items()))
    return BigradedGroup(ring, entries, keep, diagram)


# ---------------------------------------------------------------- Sq^1

def coordinates(cell: F2Cell | None, z: int) -> int:
    """Coordinates of the cocycle ``z`` in the stored basis, as a bit set."""
    if cell is None:
        return 0
    out = 0
    for b, f in enumerate(cell.funs):
        if parity(z & f):
            out |= 1 << b
    return out


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def differential_f2(cx: GradedComplex, i: int, vec: int) -> int:
    out = 0
    rows = cx.diff.get(i, ())
    for r in _bits(vec):
        for t, _ in rows[r]:
            out ^= 1 << t
    return out


def lift_coboundary(cx: GradedComplex, i: int, vec: int) -> dict[int, int]:
    """Integral differential of the 0/1 lift of ``vec``."""
    acc: dict[int, int] = {}
    rows = cx.diff.get(i, ())
    for r in _bits(vec):
        for t, v in rows[r]:
            acc[t] = acc.get(t, 0) + v
    return {t: v for t, v in acc.items() if v}


def bockstein_cochain(cx: GradedComplex, i: int, vec: int) -> int:
    """``(d lift(vec)) / 2 mod 2`` for a mod-2 cocycle ``vec`` in degree ``i``."""
    y = 0
    for t, v in lift_coboundary(cx, i, vec).items():
        if v % 2:
            raise NotACocycle(f"vector is not a mod 2 cocycle in degree {i}")
        if (v // 2) % 2:
            y |= 1 << t
    return y


def _slice(complex_or_group, kh_f2: BigradedGroup, j: int) -> GradedComplex:
    if isinstance(complex_or_group, GradedComplex):
        if complex_or_group.j != j:
            raise DimensionMismatch(f"complex has quantum grading {complex_or_group.j}, not {j}")
        return complex_or_group
    if isinstance(complex_or_group, Mapping):
        return complex_or_group[j]
    if complex_or_group is None:
        return kh_f2.complexes[j]
    for cx in complex_or_group:
        if cx.j == j:
            return cx
    raise KeyError(j)


def sq1(complex, kh_f2: BigradedGroup, i: int, j: int) -> OpMatrix:
    """Sq^1 from ``(i, j)`` to ``(i+1, j)`` in the stored bases."""
    src = kh_f2.entries.get((i, j))
    tgt = kh_f2.entries.get((i + 1, j))
    nsrc = src.dim if src else 0
    ntgt = tgt.dim if tgt else 0
    cols = []
    if src and tgt:
        cx = _slice(complex, kh_f2, j)
        for rep in src.reps:
            cols.append(coordinates(tgt, bockstein_cochain(cx, i, rep)))
    else:
        cols = [0] * nsrc
    return OpMatrix((i, j), (i + 1, j), F2Matrix.from_columns(ntgt, cols))


def width_f2(kh_f2: BigradedGroup) -> int:
    """Number of occupied diagonals ``j - 2i`` over F2."""
    dims = kh_f2.f2_dims()
    diags = {j - 2 * i for (i, j), d in dims.items() if d}
    if not diags:
        raise EmptyGroup("homology is zero")
    return len(diags)
