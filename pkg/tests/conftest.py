import functools
import re
from pathlib import Path

import pytest

from khst.linkdata import CensusEntry, Crossing, LinkDiagram, diagram_from_quads, parse_dt, parse_pd
from khst.selftest import bundled, crossing_count

DATA = Path(__file__).parent / "data"

TREFOIL_PD = "PD[X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)]"       # as written: left-handed
RH_TREFOIL_PD = "PD[X(1,5,2,4) X(3,1,4,6) X(5,3,6,2)]"
FIG8_PD = "PD[X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)]"
HOPF_POS_PD = "PD[X(1,3,2,4) X(3,1,4,2)]"


@functools.lru_cache(maxsize=None)
def htw_codes():
    """Bundled HTW table as name -> DT text, without decoding."""
    out = {}
    for line in bundled("htw_knots_12.tsv").read_text().splitlines():
        if line and not line.startswith("#"):
            name, code = line.split("\t")
            out[name] = code
    return out


@functools.lru_cache(maxsize=None)
def htw(name):
    return parse_dt(htw_codes()[name], name=name)


def htw_knots(max_crossings, min_crossings=3):
    return [CensusEntry(n, htw(n)) for n in htw_codes()
            if min_crossings <= crossing_count(n) <= max_crossings]


@functools.lru_cache(maxsize=None)
def knotinfo():
    """htw name -> (knotinfo name, PD quads, jones text, Kh dict)."""
    out = {}
    for line in (DATA / "knotinfo.tsv").read_text().splitlines():
        if line.startswith("#"):
            continue
        h, name, pd, jones, khs = line.split("\t")
        quads = [list(map(int, q.split(","))) for q in re.findall(r"\[([-\d,]+)\]", pd)]
        kh = {}
        for item in khs.split(";"):
            t, r, i, j = map(int, item.split(","))
            free, tors = kh.get((i, j), (0, ()))
            if t == 0:
                free += r
            else:
                tors = tuple(sorted(tors + (t,) * r))
            kh[(i, j)] = (free, tors)
        out[h] = (name, quads, jones, kh)
    return out


def kh_dict(group):
    return {(i, j): (free, tuple(t)) for i, j, free, t in group.rows()}


def parse_jones_t(text):
    """KnotInfo Jones polynomial text -> {exponent of t: coefficient}."""
    s = text.replace(" ", "")
    terms = re.findall(r"([+-]?)(\d*)\*?(t(?:\^(?:\((-?\d+)\)|(\d+)))?)?", s)
    out = {}
    for sign, coef, tpart, e1, e2 in terms:
        if not coef and not tpart:
            continue
        c = int(coef) if coef else 1
        c = -c if sign == "-" else c
        e = int(e1 or e2 or 1) if tpart else 0
        out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c}


def disjoint_union(d1, d2):
    off = 2 * d1.n
    xs = list(d1.crossings) + [Crossing(x.a + off, x.b + off, x.c + off, x.d + off, x.sign)
                               for x in d2.crossings]
    return LinkDiagram(tuple(xs), d1.components + d2.components)


def braid_closure(strands, word):
    """PD quads of the closure of a braid word (generator k>0 or -k)."""
    lab = list(range(strands))
    nxt = strands
    quads = []
    for g in word:
        k = abs(g) - 1
        a, b = lab[k], lab[k + 1]
        c, d = nxt, nxt + 1
        nxt += 2
        quads.append((a, b, d, c) if g > 0 else (b, d, c, a))
        lab[k], lab[k + 1] = c, d
    ren = {top: bottom for top, bottom in zip(lab, range(strands))}
    quads = [tuple(ren.get(e, e) for e in q) for q in quads]
    ids = {e: t + 1 for t, e in enumerate(sorted({e for q in quads for e in q}))}
    return diagram_from_quads([[ids[e] for e in q] for q in quads])


@pytest.fixture
def trefoil():
    return parse_pd(RH_TREFOIL_PD)


@pytest.fixture
def fig8():
    return parse_pd(FIG8_PD)
