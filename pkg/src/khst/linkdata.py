"""Link diagrams: PD and DT parsing, census files, mirror images.

PD convention: ``X(a,b,c,d)`` lists the four arc labels around a crossing
counterclockwise, starting from the incoming under-strand.  The under-strand
therefore runs ``a -> c``; the over-strand runs either ``d -> b`` (positive
crossing) or ``b -> d`` (negative crossing).

Planarity of PD input is not checked.  A non-planar PD code still produces a
well defined Khovanov complex, but it need not be a link invariant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import networkx as nx

from .errors import (InconsistentArcs, MalformedSyntax, NotRealizable,
                     OrientationConflict, RecordError, UnknownName)

__all__ = [
    "Crossing", "LinkDiagram", "CensusEntry", "parse_pd", "parse_dt",
    "dt_to_diagram", "dt_code", "load_census", "resolve_groups", "mirror",
    "parse_alpha_dt", "UNKNOT_PD",
]

UNKNOT_PD = "PD[X(1,1,2,2)]"


@dataclass(frozen=True)
class Crossing:
    a: int
    b: int
    c: int
    d: int
    sign: int

    @property
    def labels(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __str__(self) -> str:
        return f"X({self.a},{self.b},{self.c},{self.d})"


@dataclass(frozen=True)
class LinkDiagram:
    """An oriented link diagram with signed crossings."""

    crossings: tuple[Crossing, ...]
    components: int
    name: str | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for x in self.crossings if x.sign > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for x in self.crossings if x.sign < 0)

    def pd_string(self) -> str:
        return "PD[" + " ".join(str(x) for x in self.crossings) + "]"

    def with_name(self, name: str | None) -> "LinkDiagram":
        return LinkDiagram(self.crossings, self.components, name)

    def __str__(self) -> str:
        tag = f"{self.name}: " if self.name else ""
        return tag + self.pd_string()


@dataclass(frozen=True)
class CensusEntry:
    name: str
    diagram: LinkDiagram


# ---------------------------------------------------------------- PD parsing

_PD_RE = re.compile(r"^\s*PD\s*\[(.*)\]\s*$", re.S)
_X_RE = re.compile(r"X\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def parse_pd(text: str, name: str | None = None) -> LinkDiagram:
    """Parse ``PD[X(a,b,c,d) ...]`` (or the literal ``UNKNOT``)."""
    if text.strip().upper() == "UNKNOT":
        text = UNKNOT_PD
    m = _PD_RE.match(text)
    if not m:
        raise MalformedSyntax(f"not a PD code: {text!r}")
    body = m.group(1)
    quads = []
    pos = 0
    while True:
        sep = re.compile(r"[\s,]*").match(body, pos)
        pos = sep.end()
        if pos >= len(body):
            break
        if quads and sep.group(0) == "":
            raise MalformedSyntax(f"missing separator at offset {pos} in {text!r}")
        xm = _X_RE.match(body, pos)
        if not xm:
            raise MalformedSyntax(f"bad X-term at offset {pos} in {text!r}")
        quads.append(tuple(int(g) for g in xm.groups()))
        pos = xm.end()
    if not quads:
        raise MalformedSyntax("PD code with no crossings; use UNKNOT")
    return diagram_from_quads(quads, name=name)


def diagram_from_quads(quads: Sequence[Sequence[int]], name: str | None = None) -> LinkDiagram:
    """Validate raw PD quadruples, normalize labels, orient strands, sign crossings."""
    n = len(quads)
    counts: dict[int, int] = {}
    for q in quads:
        if len(q) != 4:
            raise MalformedSyntax("crossing without four labels")
        for lab in q:
            if lab < 1:
                raise InconsistentArcs(f"arc label {lab} is not positive")
            counts[lab] = counts.get(lab, 0) + 1
    bad = sorted(lab for lab, k in counts.items() if k != 2)
    if bad:
        raise InconsistentArcs(f"arc labels not appearing exactly twice: {bad}")
    relabel = {lab: i + 1 for i, lab in enumerate(sorted(counts))}
    quads = [tuple(relabel[lab] for lab in q) for q in quads]
    assert len(relabel) == 2 * n

    incoming = _orient(quads)
    crossings = []
    for k, (a, b, c, d) in enumerate(quads):
        sign = 1 if incoming[(k, 3)] else -1
        crossings.append(Crossing(a, b, c, d, sign))
    return LinkDiagram(tuple(crossings), _count_components(quads), name)


def _count_components(quads) -> int:
    parent = list(range(2 * len(quads) + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, c, d in quads:
        parent[find(a)] = find(c)
        parent[find(b)] = find(d)
    return len({find(x) for x in range(1, 2 * len(quads) + 1)})


def _orient(quads) -> dict[tuple[int, int], bool]:
    """Return ``incoming[(crossing, slot)]`` for every slot.

    Under-strands fix orientation (slot a in, slot c out).  Constraints are
    propagated along arcs and through crossings.  Components that never pass
    under are oriented by increasing labels, falling back to a fixed choice.
    """
    occ: dict[int, list[tuple[int, int]]] = {}
    for k, q in enumerate(quads):
        for s, lab in enumerate(q):
            occ.setdefault(lab, []).append((k, s))

    incoming: dict[tuple[int, int], bool] = {}

    def other_end(slot):
        lab = quads[slot[0]][slot[1]]
        o = occ[lab]
        return o[1] if o[0] == slot else o[0]

    def assign(slot, value):
        stack = [(slot, value)]
        while stack:
            sl, val = stack.pop()
            old = incoming.get(sl)
            if old is not None:
                if old != val:
                    k = sl[0]
                    raise OrientationConflict(
                        f"no consistent orientation through crossing X{quads[k]}")
                continue
            incoming[sl] = val
            stack.append(((sl[0], sl[1] ^ 2), not val))
            stack.append((other_end(sl), not val))

    for k in range(len(quads)):
        assign((k, 0), True)
        assign((k, 2), False)

    # components running only over other strands
    label_comp = _label_components(quads)
    for k, (a, b, c, d) in enumerate(quads):
        if (k, 3) in incoming:
            continue
        labs = sorted(x for x in label_comp if label_comp[x] == label_comp[b])
        succ = {labs[i]: labs[(i + 1) % len(labs)] for i in range(len(labs))}
        if succ[b] == d and succ[d] != b:
            assign((k, 1), True)
        else:
            assign((k, 3), True)
    return incoming


def _label_components(quads) -> dict[int, int]:
    adj: dict[int, list[int]] = {}
    for a, b, c, d in quads:
        adj.setdefault(a, []).append(c)
        adj.setdefault(c, []).append(a)
        adj.setdefault(b, []).append(d)
        adj.setdefault(d, []).append(b)
    comp: dict[int, int] = {}
    for start in sorted(adj):
        if start in comp:
            continue
        stack = [start]
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp[x] = start
            stack.extend(adj[x])
    return comp


def mirror(diagram: LinkDiagram) -> LinkDiagram:
    """Exchange over- and under-strands at every crossing."""
    out = []
    for x in diagram.crossings:
        if x.sign > 0:
            out.append(Crossing(x.d, x.a, x.b, x.c, -1))
        else:
            out.append(Crossing(x.b, x.c, x.d, x.a, 1))
    return LinkDiagram(tuple(out), diagram.components, diagram.name)


# ---------------------------------------------------------------- DT codes

def parse_dt(text: str, name: str | None = None) -> LinkDiagram:
    """Parse a knot DT code given as whitespace separated signed even integers."""
    toks = text.replace(",", " ").split()
    if not toks:
        raise MalformedSyntax("empty DT code")
    evens = []
    for t in toks:
        try:
            v = int(t)
        except ValueError:
            raise MalformedSyntax(f"DT entry {t!r} is not an integer") from None
        if v == 0 or v % 2:
            raise MalformedSyntax(f"DT entry {v} is not a nonzero even integer")
        evens.append(v)
    return dt_to_diagram(evens, name=name)


def parse_alpha_dt(code: str) -> tuple[list[int], list[int]]:
    """Decode the alphabetical DT format of the HTW/MT tables.

    ``"cacbca"`` means 3 crossings, 1 component with 3 crossings, evens
    ``4 6 2``.  Lower case letters are positive, upper case negative, and the
    optional ``.bits`` suffix (planar embedding hints) is ignored.
    Returns ``(evens, crossings_per_component)``.
    """
    code = code.split(".")[0].strip()

    def val(ch: str) -> int:
        if not ch.isalpha():
            raise MalformedSyntax(f"bad character {ch!r} in DT code {code!r}")
        return ord(ch.lower()) - ord("a") + 1

    if len(code) < 3:
        raise MalformedSyntax(f"DT code too short: {code!r}")
    n, ncomp = val(code[0]), val(code[1])
    per = [val(ch) for ch in code[2:2 + ncomp]]
    body = code[2 + ncomp:]
    if sum(per) != n or len(body) != n:
        raise MalformedSyntax(f"inconsistent lengths in DT code {code!r}")
    evens = [2 * val(ch) * (1 if ch.islower() else -1) for ch in body]
    return evens, per


def dt_to_diagram(evens: Sequence[int], component_sizes: Sequence[int] | None = None,
                  name: str | None = None) -> LinkDiagram:
    """Realize a DT code as a planar diagram.

    Passages are numbered ``1..2n`` along the components (component ``c``
    owning ``2*component_sizes[c]`` consecutive passages).  The odd passage
    ``2i-1`` meets the even passage ``|evens[i]|``; a positive entry means the
    even passage goes over.  The planar rotation at each crossing is recovered
    from a planar embedding of the 4-valent diagram graph; the global mirror
    ambiguity is fixed so that ``4 6 2`` gives ``X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)``.
    """
    n = len(evens)
    if component_sizes is None:
        component_sizes = [n]
    if sum(component_sizes) != n or any(s < 1 for s in component_sizes):
        raise MalformedSyntax("component sizes do not add up to the crossing count")
    if sorted(abs(e) for e in evens) != list(range(2, 2 * n + 1, 2)):
        raise MalformedSyntax("DT evens are not a permutation of 2,4,...,2n")

    # successor of each passage along its component
    nxt = {}
    start = 1
    for size in component_sizes:
        stop = start + 2 * size - 1
        for p in range(start, stop):
            nxt[p] = p + 1
        nxt[stop] = start
        start = stop + 1

    pairs = [(2 * i + 1, abs(e)) for i, e in enumerate(evens)]
    over_even = [e > 0 for e in evens]
    cross_of = {}
    for k, (p, q) in enumerate(pairs):
        cross_of[p] = k
        cross_of[q] = k

    bits = _rotation_bits(pairs, nxt, cross_of)
    if bits[cross_of[1]]:
        bits = [1 - b for b in bits]

    quads = []
    for k, (p, q) in enumerate(pairs):
        # counterclockwise order around the crossing, as (passage, is_incoming)
        if bits[k] == 0:
            ring = [(p, True), (q, True), (p, False), (q, False)]
        else:
            ring = [(p, True), (q, False), (p, False), (q, True)]
        under = q if not over_even[k] else p
        r = ring.index((under, True))
        ring = ring[r:] + ring[:r]
        quads.append(tuple(s if inc else nxt[s] for s, inc in ring))
    if _face_count(quads) != n + 2:
        raise NotRealizable("DT code has no planar realization")
    return diagram_from_quads(quads, name=name)


def _rotation_bits(pairs, nxt, cross_of) -> list[int]:
    g = nx.Graph()
    for k, (p, q) in enumerate(pairs):
        ring = [("in", p), ("in", q), ("out", p), ("out", q)]
        for r in range(4):
            g.add_edge((k, ring[r]), (k, ring[(r + 1) % 4]))
            g.add_edge((k, "hub"), (k, ring[r]))
    for s, t in nxt.items():
        mid = ("arc", t)
        g.add_edge((cross_of[s], ("out", s)), mid)
        g.add_edge(mid, (cross_of[t], ("in", t)))
    if not nx.is_connected(g):
        raise NotRealizable("DT code describes a split diagram")
    ok, emb = nx.check_planarity(g)
    if not ok:
        raise NotRealizable("DT code has no planar realization")
    bits = []
    for k, (p, q) in enumerate(pairs):
        cw = [v[1] for v in emb.neighbors_cw_order((k, "hub"))]
        ccw = cw[::-1]
        r = ccw.index(("in", p))
        ccw = ccw[r:] + ccw[:r]
        bits.append(0 if ccw[1] == ("in", q) else 1)
    return bits


def _face_count(quads) -> int:
    """Number of faces of the 4-valent graph with the PD rotation system."""
    occ: dict[int, list[tuple[int, int]]] = {}
    for k, q in enumerate(quads):
        for s, lab in enumerate(q):
            occ.setdefault(lab, []).append((k, s))
    seen = set()
    faces = 0
    for k in range(len(quads)):
        for s in range(4):
            if (k, s) in seen:
                continue
            faces += 1
            dart = (k, s)
            while dart not in seen:
                seen.add(dart)
                lab = quads[dart[0]][dart[1]]
                o = occ[lab]
                far = o[1] if o[0] == dart else o[0]
                dart = (far[0], (far[1] - 1) % 4)
    return faces


def dt_code(diagram: LinkDiagram) -> list[int]:
    """DT code of a knot diagram, starting the walk on arc 1."""
    if diagram.components != 1:
        raise ValueError("DT codes are produced for knots only")
    n = diagram.n
    # where each arc ends: (crossing, slot) with the arc incoming
    ends: dict[int, tuple[int, int]] = {}
    inc = _orient([x.labels for x in diagram.crossings])
    for k, x in enumerate(diagram.crossings):
        for s, lab in enumerate(x.labels):
            if inc[(k, s)]:
                ends[lab] = (k, s)
    seq = []
    lab = 1
    for _ in range(2 * n):
        k, s = ends[lab]
        seq.append((k, s in (0, 2)))  # (crossing, passing under)
        lab = diagram.crossings[k].labels[s ^ 2]
    first: dict[int, int] = {}
    evens = {}
    for pos, (k, under) in enumerate(seq, start=1):
        if k in first:
            p0 = first[k]
            odd, even = (p0, pos) if p0 % 2 else (pos, p0)
            if odd % 2 == 0 or even % 2:
                raise ValueError("walk does not alternate parity at a crossing")
            even_under = seq[even - 1][1]
            evens[odd] = -even if even_under else even
        else:
            first[k] = pos
    return [evens[o] for o in range(1, 2 * n, 2)]


# ---------------------------------------------------------------- census files

def _records(path: Path) -> Iterable[tuple[int, str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        yield lineno, line.rstrip("\n")


def load_census(path: str | Path, format: str,
                select: Callable[[str], bool] | None = None) -> list:
    """Load a census file.

    ``format`` is ``HTW-DT`` (``name<TAB>signed evens``), ``MT-PD``
    (``name<TAB>PD[...]``) or ``MUTANT-PAIRS`` (whitespace separated names per
    line).  The first two return :class:`CensusEntry` lists; the last returns
    a list of name tuples, to be checked with :func:`resolve_groups`.

    With ``select``, only records whose name it accepts are decoded and
    returned; the others are still checked for layout and duplicate names.
    """
    path = Path(path)
    fmt = format.upper().replace("_", "-")
    if fmt not in ("HTW-DT", "MT-PD", "MUTANT-PAIRS"):
        raise ValueError(f"unknown census format {format!r}")
    if fmt == "MUTANT-PAIRS":
        return [tuple(line.split()) for _, line in _records(path)]
    out: list[CensusEntry] = []
    seen: set[str] = set()
    for lineno, line in _records(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise RecordError(lineno, "expected 'name<TAB>code'", str(path))
        name, code = parts[0].strip(), parts[1].strip()
        if not name:
            raise RecordError(lineno, "empty name", str(path))
        if name in seen:
            raise RecordError(lineno, f"duplicate name {name}", str(path))
        seen.add(name)
        if select is not None and not select(name):
            continue
        try:
            if fmt == "HTW-DT":
                diagram = parse_dt(code, name=name)
            else:
                diagram = parse_pd(code, name=name)
        except Exception as exc:
            raise RecordError(lineno, f"{name}: {exc}", str(path)) from exc
        out.append(CensusEntry(name, diagram))
    return out


def resolve_groups(groups: Sequence[Sequence[str]], census: Sequence[CensusEntry]) -> list[list[CensusEntry]]:
    by_name = {e.name: e for e in census}
    out = []
    for g in groups:
        missing = [nm for nm in g if nm not in by_name]
        if missing:
            raise UnknownName(f"names not in census: {', '.join(missing)}")
        out.append([by_name[nm] for nm in g])
    return out
