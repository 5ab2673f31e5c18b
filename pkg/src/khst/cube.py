"""The cube of resolutions of a link diagram.

A vertex of the cube is an integer bitmask ``v``; bit ``k`` is the smoothing
of crossing ``k``.  At ``X(a,b,c,d)`` the 0-smoothing joins ``a-b`` and
``c-d``, the 1-smoothing joins ``b-c`` and ``d-a``.

Circles of a resolution are ordered by their least arc label, which makes
every index used downstream reproducible.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Literal

from .errors import LengthMismatch, NotAFace, NotAnEdge, NotRealizable
from .linkdata import LinkDiagram

__all__ = [
    "CubeVertex", "Resolution", "Merge", "Split", "FaceClass", "Cube",
    "resolve", "classify_edge", "classify_face", "LADYBUG_CONVENTIONS",
]

# slot pairs joined by the two smoothings
_SMOOTH = {0: ((0, 1), (2, 3)), 1: ((1, 2), (3, 0))}
_PARTNER = {0: (1, 0, 3, 2), 1: (3, 2, 1, 0)}

LADYBUG_CONVENTIONS = ("right", "left")


@dataclass(frozen=True)
class CubeVertex:
    bits: int
    n: int

    @property
    def weight(self) -> int:
        return bin(self.bits).count("1")

    @classmethod
    def from_string(cls, s: str) -> "CubeVertex":
        """``"011"`` has coordinate 0 equal to 0 and coordinates 1, 2 equal to 1."""
        return cls(sum(1 << k for k, ch in enumerate(s) if ch == "1"), len(s))

    def __str__(self) -> str:
        return "".join("1" if self.bits >> k & 1 else "0" for k in range(self.n))


@dataclass(frozen=True)
class Resolution:
    vertex: CubeVertex
    circles: tuple[tuple[int, ...], ...]

    def circle_of(self, arc: int) -> int:
        for t, c in enumerate(self.circles):
            if arc in c:
                return t
        raise KeyError(arc)


@dataclass(frozen=True)
class Merge:
    """Circles ``c1`` and ``c2`` of the source fuse into circle ``c`` of the target."""
    c1: int
    c2: int
    c: int
    others: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Split:
    """Circle ``c`` of the source divides into circles ``c1`` and ``c2`` of the target."""
    c: int
    c1: int
    c2: int
    others: tuple[tuple[int, int], ...]


FaceKind = Literal["TwoMerges", "TwoSplits", "MergeThenSplit", "SplitThenMerge",
                   "Disjoint", "Ladybug"]


@dataclass(frozen=True)
class FaceClass:
    kind: FaceKind
    bottom: int
    top: int
    coords: tuple[int, int]
    # circles touched at each corner: bottom, via first coordinate, via second, top
    data: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    # ladybug only: circle of the first intermediate resolution -> matched
    # circle of the second one
    matching: tuple[tuple[int, int], ...] = ()


class Cube:
    """Per-diagram memo of resolutions.  Entries are written once and never
    mutated, so concurrent readers are safe; writers serialize on a lock."""

    def __init__(self, diagram: LinkDiagram):
        self.diagram = diagram
        self.n = diagram.n
        self.quads = [x.labels for x in diagram.crossings]
        self.narcs = 2 * self.n
        occ: dict[int, list[tuple[int, int]]] = {}
        for k, q in enumerate(self.quads):
            for s, lab in enumerate(q):
                occ.setdefault(lab, []).append((k, s))
        self.occ = occ
        self._circ: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = {}
        self._lock = threading.Lock()

    # -- resolutions -------------------------------------------------------

    def _trace(self, v: int):
        quads, occ = self.quads, self.occ
        seen = [False] * (self.narcs + 1)
        circles = []
        for start in range(1, self.narcs + 1):
            if seen[start]:
                continue
            cyc = []
            arc = start
            end = occ[start][1]
            while not seen[arc]:
                seen[arc] = True
                cyc.append(arc)
                k, s = end
                s2 = _PARTNER[v >> k & 1][s]
                arc = quads[k][s2]
                o = occ[arc]
                end = o[1] if o[0] == (k, s2) else o[0]
            circles.append(tuple(cyc))
        circles.sort(key=min)
        arc_circle = [0] * (self.narcs + 1)
        for t, c in enumerate(circles):
            for arc in c:
                arc_circle[arc] = t
        return tuple(circles), tuple(arc_circle)

    def circles(self, v: int) -> tuple[tuple[int, ...], ...]:
        return self._get(v)[0]

    def arc_circle(self, v: int) -> tuple[int, ...]:
        """``arc_circle(v)[arc]`` is the index of the circle through ``arc``."""
        return self._get(v)[1]

    def ncircles(self, v: int) -> int:
        return len(self._get(v)[0])

    def _get(self, v: int):
        r = self._circ.get(v)
        if r is None:
            r = self._trace(v)
            with self._lock:
                self._circ.setdefault(v, r)
        return r

    def resolution(self, v: int) -> Resolution:
        return Resolution(CubeVertex(v, self.n), self.circles(v))

    # -- edges -------------------------------------------------------------

    def edge(self, v: int, k: int) -> Merge | Split:
        """Structure of the edge ``v -> v + e_k`` (bit ``k`` of ``v`` must be 0)."""
        if v >> k & 1:
            raise NotAnEdge(f"bit {k} already set")
        w = v | (1 << k)
        a, b, c, d = self.quads[k]
        av, aw = self.arc_circle(v), self.arc_circle(w)
        touched_v = {av[a], av[c]}
        touched_w = {aw[a], aw[b]}
        others = tuple(sorted(
            (t, aw[circ[0]]) for t, circ in enumerate(self.circles(v)) if t not in touched_v))
        if av[a] != av[c]:
            c1, c2 = sorted((av[a], av[c]))
            return Merge(c1, c2, aw[a], others)
        if len(touched_w) != 2:
            raise NotRealizable(f"smoothing crossing {k} at vertex {v} keeps the circle count; "
                                "the PD code is not planar")
        c1, c2 = sorted(touched_w)
        return Split(av[a], c1, c2, others)

    def circle_map(self, v: int, w: int) -> dict[int, int]:
        """Correspondence of circles untouched along the edge ``v -> w``."""
        k = _single_bit(v, w)
        e = self.edge(v, k)
        return dict(e.others)

    # -- faces -------------------------------------------------------------

    def junctions(self, v: int, circle: int):
        """Walk a circle of ``resolve(v)``.

        Returns a list of ``(arc, crossing, in_slot, out_slot)``: we travel
        along ``arc`` into ``crossing`` at ``in_slot`` and leave at
        ``out_slot``.
        """
        quads, occ = self.quads, self.occ
        start = min(self.circles(v)[circle])
        out = []
        arc = start
        end = occ[start][1]
        while True:
            k, s = end
            s2 = _PARTNER[v >> k & 1][s]
            out.append((arc, k, s, s2))
            arc = quads[k][s2]
            o = occ[arc]
            end = o[1] if o[0] == (k, s2) else o[0]
            if arc == start:
                break
        return out

    def face(self, v: int, i: int, j: int, convention: str = "right") -> FaceClass:
        if i == j or v >> i & 1 or v >> j & 1:
            raise NotAFace("face needs two distinct coordinates that are 0 at the bottom")
        if i > j:
            i, j = j, i
        wi, wj, u = v | 1 << i, v | 1 << j, v | 1 << i | 1 << j
        ei, ej = self.edge(v, i), self.edge(v, j)
        ti = _touched_source(ei)
        tj = _touched_source(ej)
        nv, nu = self.ncircles(v), self.ncircles(u)
        au = self.arc_circle(u)
        top = set()
        for k in (i, j):
            a, b, c, d = self.quads[k]
            top.update((au[a], au[b], au[c], au[d]))
        data = (tuple(sorted(ti | tj)),
                tuple(sorted(_touched_source(self.edge(wi, j)))),
                tuple(sorted(_touched_source(self.edge(wj, i)))),
                tuple(sorted(top)))
        matching: tuple[tuple[int, int], ...] = ()
        if not (ti & tj):
            kind = "Disjoint"
        else:
            di = 1 if isinstance(ei, Split) else -1
            dj = 1 if isinstance(ej, Split) else -1
            total = nu - nv
            if di == dj == -1:
                kind = "TwoMerges" if total == -2 else "MergeThenSplit"
            elif di == dj == 1:
                if total == 2:
                    kind = "TwoSplits"
                else:
                    kind = "Ladybug"
                    matching = self._ladybug_matching(v, i, j, ei.c, convention)
            else:
                kind = "SplitThenMerge"
        return FaceClass(kind, v, u, (i, j), data, matching)

    def _ladybug_matching(self, v: int, i: int, j: int, circle: int, convention: str):
        if convention not in LADYBUG_CONVENTIONS:
            raise ValueError(f"unknown ladybug convention {convention!r}")
        walk = self.junctions(v, circle)
        events = [(pos, k, s, s2) for pos, (arc, k, s, s2) in enumerate(walk) if k in (i, j)]
        if len(events) != 4 or [e[1] for e in events] not in ([i, j, i, j], [j, i, j, i]):
            raise NotAFace("ladybug arcs do not interleave on the circle")
        sides = {}
        for _, k, s, s2 in events:
            sides.setdefault(k, (s, s2) in ((0, 1), (2, 3)))
        # planar input puts the two arcs on opposite sides of the circle; for
        # non-planar input fall back to a fixed choice
        left_k = i if sides[i] or sides[i] == sides[j] else j
        n_walk = len(walk)
        reps = []
        for pos, k, s, s2 in events:
            if k != left_k:
                continue
            if convention == "right":
                reps.append(walk[pos][0])  # arc entering the junction
            else:
                reps.append(walk[(pos + 1) % n_walk][0])  # arc leaving it
        ai = self.arc_circle(v | 1 << i)
        aj = self.arc_circle(v | 1 << j)
        pairs = tuple(sorted((ai[r], aj[r]) for r in reps))
        assert len({p[0] for p in pairs}) == 2 and len({p[1] for p in pairs}) == 2
        return pairs


def _single_bit(v: int, w: int) -> int:
    x = v ^ w
    if x == 0 or x & (x - 1) or w < v:
        raise NotAnEdge("vertices do not form a cube edge")
    return x.bit_length() - 1


def _touched_source(e) -> set[int]:
    return {e.c1, e.c2} if isinstance(e, Merge) else {e.c}


def _touched_target(e) -> set[int]:
    return {e.c} if isinstance(e, Merge) else {e.c1, e.c2}


# -- functional interface -----------------------------------------------------

def _bits(diagram: LinkDiagram, vertex) -> int:
    if isinstance(vertex, CubeVertex):
        if vertex.n != diagram.n:
            raise LengthMismatch(f"vertex has length {vertex.n}, diagram has {diagram.n} crossings")
        return vertex.bits
    if isinstance(vertex, str):
        if len(vertex) != diagram.n:
            raise LengthMismatch(f"vertex has length {len(vertex)}, diagram has {diagram.n} crossings")
        return CubeVertex.from_string(vertex).bits
    return int(vertex)


def resolve(diagram: LinkDiagram, vertex) -> Resolution:
    v = _bits(diagram, vertex)
    return Cube(diagram).resolution(v)


def classify_edge(diagram: LinkDiagram, u, w) -> Merge | Split:
    a, b = _bits(diagram, u), _bits(diagram, w)
    k = _single_bit(a, b)
    return Cube(diagram).edge(a, k)


def classify_face(diagram: LinkDiagram, u, w, convention: str = "right") -> FaceClass:
    a, b = _bits(diagram, u), _bits(diagram, w)
    x = a ^ b
    if b < a or bin(x).count("1") != 2 or (a & x):
        raise NotAFace("vertices do not span a 2-face")
    i = (x & -x).bit_length() - 1
    j = x.bit_length() - 1
    return Cube(diagram).face(a, i, j, convention)
