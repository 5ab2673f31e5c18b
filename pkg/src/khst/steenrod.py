"""Chain-level Sq^2 on Khovanov homology.

The cube complex is viewed as a functor from the cube to correspondences:
each vertex carries a set of generators, each edge a set of signed points
``y -> z``, and each 2-face a bijection between the two families of
two-step paths across it (forced except on ladybug faces, where the
ladybug matching decides).

For an integral cocycle ``c``, with ``n_y`` copies of each generator ``y``,
the points landing at ``z`` have zero signed count, so they can be paired
positive with negative (the boundary matching).  For a target ``x`` two
levels up, the two-step paths from ``c`` to ``x`` form a graph whose edges
come from the face bijections and from the boundary matching; every vertex
has degree two, so the graph is a union of cycles.  The coefficient of
``x`` in ``Sq^2(c)`` is the number of cycles plus the frame term of every
face edge (see ``FrameAssignment.frame``).

A mod 2 cocycle whose 0/1 lift is not an integral cocycle is handled by
passing to the product with the Moore cube: one more coordinate, whose
single edge carries two points of the same sign.  ``c`` tensored with the
top cell of the Moore cube, corrected by ``-(d c)/2`` on the bottom cell,
is an integral cocycle there, and ``Sq^2 c`` is the top-cell component of
its square.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Hashable

from .complex import GradedComplex, KhCube
from .cube import LADYBUG_CONVENTIONS
from .errors import NotACocycle
from .exactla import F2Matrix
from .homology import (BigradedGroup, OpMatrix, _slice, coordinates,
                       differential_f2, lift_coboundary)

__all__ = [
    "FrameAssignment", "KhovanovFunctor", "MooreProduct", "PointFunctor",
    "sq2_cochain", "sq2", "sq2_of_cocycle", "verify_sq2_welldefined",
    "WelldefinednessReport", "dump_sq2",
]


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class FrameAssignment:
    """Auxiliary data entering the chain-level formula.

    ``convention`` selects the ladybug matching.  ``corrupt`` is a test
    hook: a nonzero value seeds a fixed pseudo-random set of faces on which
    the frame term is flipped, which breaks well-definedness.
    """

    convention: str = "right"
    corrupt: int = 0

    def __post_init__(self):
        if self.convention not in LADYBUG_CONVENTIONS:
            raise ValueError(f"unknown ladybug convention {self.convention!r}")

    def frame(self, v: int, i: int, j: int) -> int:
        """Frame term of the face spanned by ``i`` and ``j`` at ``v``: the
        parity of the 1-coordinates strictly between ``i`` and ``j``, but
        only when the 1-coordinates above both are even in number."""
        if i > j:
            i, j = j, i
        between = _popcount((v >> (i + 1)) & ((1 << (j - i - 1)) - 1)) & 1
        above = _popcount(v >> (j + 1)) & 1
        f = between & (above ^ 1)
        if self.corrupt:
            h = (v * 0x9E3779B1 + i * 0x85EBCA77 + j * 0xC2B2AE3D + self.corrupt * 0x27D4EB2F)
            f ^= _popcount(h & 0xFFFFFFFF) & 1
        return f


# ---------------------------------------------------------------- functors
#
# A functor exposes
#   vertex(g) -> cube vertex bits
#   up(g)     -> list of (h, point, sign, coordinate)
#   face(y, x, i, j, via_i, via_j) -> list of (index in via_i, index in via_j)
# where via_i / via_j list the paths (z, point_a, point_b) whose first step
# changes coordinate i / j.


class PointFunctor:
    """The zero-dimensional cube with one generator."""

    dim = 0

    def vertex(self, g) -> int:
        return 0

    def up(self, g):
        return []

    def face(self, y, x, i, j, via_i, via_j):
        raise AssertionError("a point has no faces")


class KhovanovFunctor:
    """Khovanov generators ``(v, mask)`` of one diagram."""

    def __init__(self, kcube: KhCube, frame: FrameAssignment):
        self.kc = kcube
        self.dim = kcube.n
        self.frame = frame
        self._up: dict = {}
        self._faces: dict = {}

    def vertex(self, g) -> int:
        return g[0]

    def up(self, g):
        r = self._up.get(g)
        if r is None:
            r = [((w, m), None, s, k) for w, m, s, k in self.kc.up(*g)]
            self._up[g] = r
        return r

    def face(self, y, x, i, j, via_i, via_j):
        if len(via_i) != len(via_j):
            raise AssertionError("face relation fails")
        if len(via_i) == 1:
            return [(0, 0)]
        # ladybug face: two paths each way
        v = y[0]
        key = (v, i, j)
        match = self._faces.get(key)
        if match is None:
            f = self.kc.cube.face(v, i, j, self.frame.convention)
            if f.kind != "Ladybug":
                raise AssertionError("two paths across a non-ladybug face")
            match = dict(f.matching)
            self._faces[key] = match
        _, _, tgt, _, _ = self.kc.edge_data(v, i)
        c1, c2 = tgt
        # the x-labelled circle among the two new circles at w_i
        pos_j = {}
        _, _, tgt_j, _, _ = self.kc.edge_data(v, j)
        for q, (z, _, _) in enumerate(via_j):
            d1, d2 = tgt_j
            circ = d1 if z[1] >> d1 & 1 else d2
            pos_j[circ] = q
        out = []
        for p, (z, _, _) in enumerate(via_i):
            circ = c1 if z[1] >> c1 & 1 else c2
            out.append((p, pos_j[match[circ]]))
        return out


class MooreProduct:
    """Product of a functor with the one-dimensional Moore cube.

    Generators are ``(g, e)``; the new coordinate comes last.  Its edge
    ``(g, 0) -> (g, 1)`` has the two points ``0`` and ``1``.
    """

    def __init__(self, base):
        self.base = base
        self.dim = base.dim + 1
        self._up: dict = {}

    def vertex(self, g) -> int:
        return self.base.vertex(g[0]) | (g[1] << self.base.dim)

    def up(self, g):
        r = self._up.get(g)
        if r is None:
            h, e = g
            r = [((h2, e), a, s, k) for h2, a, s, k in self.base.up(h)]
            if e == 0:
                s = -1 if _popcount(self.base.vertex(h)) & 1 else 1
                top = self.base.dim
                r.append(((h, 1), ("m", 0), s, top))
                r.append(((h, 1), ("m", 1), s, top))
            self._up[g] = r
        return r

    def face(self, y, x, i, j, via_i, via_j):
        top = self.base.dim
        if j != top:
            yb, xb = y[0], x[0]
            strip = lambda paths: [(z[0], a, b) for z, a, b in paths]
            return self.base.face(yb, xb, i, j, strip(via_i), strip(via_j))
        # first coordinate i in the base, then the Moore edge; match points
        pos = {(a, b): q for q, (_, b, a) in enumerate(via_j)}
        return [(p, pos[(a, b)]) for p, (_, a, b) in enumerate(via_i)]


# ---------------------------------------------------------------- the formula

def sq2_cochain(functor, cochain: dict, frame: FrameAssignment,
                target: Callable[[Hashable], bool] | None = None,
                rng: random.Random | None = None,
                trace: list | None = None) -> set:
    """Chain-level Sq^2 of an integral cocycle ``{generator: coefficient}``.

    Returns the set of targets with coefficient 1.  ``rng`` randomizes the
    boundary matching (the class must not depend on it).  When ``trace`` is
    a list, one ``(x, cycles, face_term)`` tuple per target is
    appended to it.
    """
    points: dict = defaultdict(list)  # z -> [(y, copy, point, sign)]
    for y in sorted(cochain):
        n = cochain[y]
        if not n:
            continue
        sy = 1 if n > 0 else -1
        for z, a, s, k in functor.up(y):
            for t in range(abs(n)):
                points[z].append((y, t, a, s * sy, k, s))
    # boundary matching
    partner: dict = {}
    for z, pts in points.items():
        pos = [p for p in pts if p[3] > 0]
        neg = [p for p in pts if p[3] < 0]
        if len(pos) != len(neg):
            raise NotACocycle("cochain is not an integral cocycle")
        if rng is not None:
            rng.shuffle(neg)
        for p, q in zip(pos, neg):
            partner[(p[0], p[1], p[2], z)] = (q[0], q[1], q[2], z, q[5])
            partner[(q[0], q[1], q[2], z)] = (p[0], p[1], p[2], z, p[5])
    # two-step paths grouped by target
    paths: dict = defaultdict(list)
    for z, pts in points.items():
        ups = functor.up(z)
        for (y, t, a, _, k1, s1) in pts:
            for x, b, s2, k2 in ups:
                if target is None or target(x):
                    paths[x].append((y, t, a, z, b, k1, k2, s1, s2))
    result = set()
    for x in sorted(paths):
        plist = paths[x]
        index = {(p[0], p[1], p[2], p[3], p[4]): q for q, p in enumerate(plist)}
        n = len(plist)
        face_nb = [-1] * n
        match_nb = [-1] * n
        face_term = 0
        # face edges
        groups: dict = defaultdict(list)
        for q, p in enumerate(plist):
            y, t, a, z, b, k1, k2, s1, s2 = p
            i, j = (k1, k2) if k1 < k2 else (k2, k1)
            groups[(y, t, i, j)].append(q)
        for (y, t, i, j), qs in groups.items():
            via_i = [q for q in qs if plist[q][5] == i]
            via_j = [q for q in qs if plist[q][5] == j]
            pairs = functor.face(y, x, i, j,
                                 [(plist[q][3], plist[q][2], plist[q][4]) for q in via_i],
                                 [(plist[q][3], plist[q][2], plist[q][4]) for q in via_j])
            f = frame.frame(functor.vertex(y), i, j)
            for pi, pj in pairs:
                a_, b_ = via_i[pi], via_j[pj]
                face_nb[a_] = b_
                face_nb[b_] = a_
                face_term ^= f
        # matching edges
        for q, p in enumerate(plist):
            y, t, a, z, b, k1, k2, s1, s2 = p
            if match_nb[q] >= 0:
                continue
            y2, t2, a2, _, s1b = partner[(y, t, a, z)]
            q2 = index[(y2, t2, a2, z, b)]
            match_nb[q] = q2
            match_nb[q2] = q
        # cycles
        seen = [False] * n
        cycles = 0
        for q0 in range(n):
            if seen[q0]:
                continue
            cycles += 1
            q, use_face = q0, True
            while not seen[q]:
                seen[q] = True
                q = face_nb[q] if use_face else match_nb[q]
                use_face = not use_face
                if q < 0:
                    raise AssertionError("path graph vertex of degree < 2")
            # the walk may stop one step early on the other edge type;
            # marking is complete because every vertex has degree two
        val = (cycles + face_term) & 1
        if trace is not None:
            trace.append((x, cycles, face_term))
        if val:
            result.add(x)
    return result


def sq2_of_cocycle(cx: GradedComplex, i: int, vec: int, frame: FrameAssignment,
                   rng: random.Random | None = None, trace: list | None = None) -> int:
    """Chain-level Sq^2 of a mod 2 cocycle of degree ``i`` in a slice, as a
    bit set over degree ``i+2`` generators."""
    gens = cx.gens.get(i, [])
    tgt_index = cx.index.get(i + 2, {})
    if differential_f2(cx, i, vec):
        raise NotACocycle(f"vector is not a cocycle in degree {i}")
    kf = KhovanovFunctor(cx.kcube, frame)
    lift = {gens[r]: 1 for r in _bits(vec)}
    dl = lift_coboundary(cx, i, vec)
    out = 0
    if not dl:
        xs = sq2_cochain(kf, lift, frame, target=tgt_index.__contains__, rng=rng, trace=trace)
        for x in xs:
            out |= 1 << tgt_index[x]
        return out
    # Moore product: c x top cell, corrected on the bottom cell
    nxt = cx.gens[i + 1]
    sign = -1 if (i + cx.kcube.n_minus + 1) & 1 else 1
    u = {(g, 1): 1 for g in lift}
    for t, v in dl.items():
        u[(nxt[t], 0)] = -sign * (v // 2)
    mf = MooreProduct(kf)
    xs = sq2_cochain(mf, u, frame, target=lambda g: g[1] == 1 and g[0] in tgt_index,
                     rng=rng, trace=trace)
    for x, _ in xs:
        out |= 1 << tgt_index[x]
    return out


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def sq2(complex, kh_f2: BigradedGroup, i: int, j: int, convention: str = "right",
        frame: FrameAssignment | None = None) -> OpMatrix:
    """Sq^2 from ``(i, j)`` to ``(i+2, j)`` in the stored bases."""
    frame = frame or FrameAssignment(convention)
    src = kh_f2.entries.get((i, j))
    tgt = kh_f2.entries.get((i + 2, j))
    nsrc = src.dim if src else 0
    ntgt = tgt.dim if tgt else 0
    if not src or not tgt:
        return OpMatrix((i, j), (i + 2, j), F2Matrix.from_columns(ntgt, [0] * nsrc))
    cx = _slice(complex, kh_f2, j)
    cols = []
    for rep in src.reps:
        y = sq2_of_cocycle(cx, i, rep, frame)
        if differential_f2(cx, i + 2, y):
            raise AssertionError("Sq^2 produced a non-cocycle")
        cols.append(coordinates(tgt, y))
    return OpMatrix((i, j), (i + 2, j), F2Matrix.from_columns(ntgt, cols))


# ---------------------------------------------------------------- verification

@dataclass
class WelldefinednessReport:
    i: int
    j: int
    trials: int
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_sq2_welldefined(complex, kh_f2: BigradedGroup, i: int, j: int,
                           trials: int = 100, seed: int = 0,
                           frame: FrameAssignment | None = None) -> WelldefinednessReport:
    """Recompute Sq^2 under random coboundary changes of the representatives,
    random boundary matchings and random reorderings of the generators, and
    compare with the stored-basis matrix."""
    frame = frame or FrameAssignment()
    rep = WelldefinednessReport(i, j, trials)
    src = kh_f2.entries.get((i, j))
    tgt = kh_f2.entries.get((i + 2, j))
    if not src or not tgt:
        return rep
    cx = _slice(complex, kh_f2, j)
    try:
        base = sq2(cx, kh_f2, i, j, frame=frame).matrix
    except AssertionError as exc:
        rep.violations.append(f"stored basis: {exc}")
        return rep
    rng = random.Random(seed)
    dim_prev = cx.dim(i - 1)
    for trial in range(trials):
        perm = _permuted(cx, rng)
        # transported representatives plus random coboundaries
        for b, r in enumerate(src.reps):
            vec = _transport(cx, perm, i, r)
            if dim_prev:
                w = rng.getrandbits(dim_prev)
                vec ^= differential_f2(perm, i - 1, _transport(cx, perm, i - 1, w))
            y = sq2_of_cocycle(perm, i, vec, frame, rng=rng)
            if differential_f2(perm, i + 2, y):
                rep.violations.append(f"trial {trial}: basis vector {b} maps to a non-cocycle")
                continue
            y_orig = _transport_back(cx, perm, i + 2, y)
            got = coordinates(tgt, y_orig)
            want = base.column(b)
            if got != want:
                rep.violations.append(
                    f"trial {trial}: basis vector {b} maps to {got:b}, expected {want:b}")
    return rep


def _permuted(cx: GradedComplex, rng: random.Random) -> GradedComplex:
    gens = {}
    for i, lst in cx.gens.items():
        lst = list(lst)
        rng.shuffle(lst)
        gens[i] = lst
    index = {i: {g: r for r, g in enumerate(lst)} for i, lst in gens.items()}
    diff = {}
    for i, lst in gens.items():
        tgt = index.get(i + 1, {})
        rows = []
        for v, m in lst:
            r0 = cx.index[i][(v, m)]
            terms = sorted((tgt[cx.gens[i + 1][t]], s) for t, s in cx.diff[i][r0])
            rows.append(terms)
        diff[i] = rows
    return GradedComplex(cx.ring, cx.j, gens, diff, cx.kcube, index)


def _transport(cx: GradedComplex, perm: GradedComplex, i: int, vec: int) -> int:
    out = 0
    idx = perm.index[i]
    for r in _bits(vec):
        out |= 1 << idx[cx.gens[i][r]]
    return out


def _transport_back(cx: GradedComplex, perm: GradedComplex, i: int, vec: int) -> int:
    return _transport(perm, cx, i, vec)


# ---------------------------------------------------------------- debug dump

def dump_sq2(cx: GradedComplex, kh_f2: BigradedGroup, i: int, frame: FrameAssignment | None = None) -> str:
    """Per basis cocycle and target generator: the cycle count and the frame
    term of the chain-level formula.

    Format, one line per target with nonzero path graph::

        <basis index> <v> <mask> <cycles> <frame term> <value>
    """
    frame = frame or FrameAssignment()
    src = kh_f2.entries.get((i, cx.j))
    lines = [f"# sq2 i={i} j={cx.j} convention={frame.convention}"]
    if not src:
        return "\n".join(lines) + "\n"
    for b, rep in enumerate(src.reps):
        tr: list = []
        sq2_of_cocycle(cx, i, rep, frame, trace=tr)
        for x, cyc, ft in sorted(tr, key=lambda t: repr(t[0])):
            g = x[0] if isinstance(x[0], tuple) else x
            lines.append(f"{b} {g[0]} {g[1]} {cyc} {ft} {(cyc + ft) & 1}")
    return "\n".join(lines) + "\n"
