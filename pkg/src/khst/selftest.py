"""Invariant checks over the bundled knot table, used by ``khst selftest``."""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Callable

from .complex import KhCube, build_complex, graded_euler_characteristic, kauffman_jones
from .errors import KhError
from .homology import kh, sq1
from .invariants import st_table
from .linkdata import CensusEntry, load_census, parse_pd

__all__ = ["bundled", "check_link", "run_selftest"]


def bundled(name: str) -> Path:
    return Path(str(resources.files("khst") / "data" / name))


def crossing_count(name: str) -> int:
    digits = ""
    for ch in name[1:]:
        if not ch.isdigit():
            break
        digits += ch
    return int(digits)


def check_link(entry: CensusEntry) -> list[str]:
    """Names of the failed checks (empty when everything holds)."""
    bad = []
    D = entry.diagram
    kc = KhCube(D)
    cxs = build_complex(D, "Z", kcube=kc)
    if not all(cx.check_d_squared() for cx in cxs):
        bad.append("d^2=0")
    if graded_euler_characteristic(cxs) != kauffman_jones(D):
        bad.append("euler=jones")
    z = kh(D, "Z", kcube=kc)
    f = kh(D, "F2", kcube=kc)
    if z.f2_dims() != f.f2_dims():
        bad.append("universal coefficients")
    for (i, j) in f.entries:
        cx = f.complexes[j]
        a = sq1(cx, f, i, j)
        b = sq1(cx, f, i + 1, j)
        if b.compose(a).rank:
            bad.append(f"sq1 sq1=0 at ({i},{j})")
        cell = z.entries.get((i + 1, j))
        twos = sum(1 for d in cell.invariant_factors if d == 2) if cell else 0
        if a.rank != twos:
            bad.append(f"sq1 rank at ({i},{j})")
    try:
        st_table(D, kh_f2=f)
    except KhError as exc:
        bad.append(f"St: {exc}")
    return bad


def run_selftest(max_crossings: int = 7, echo: Callable[[str], None] = print) -> bool:
    entries = [CensusEntry("unknot", parse_pd("UNKNOT")),
               CensusEntry("hopf", parse_pd("PD[X(1,3,2,4) X(3,1,4,2)]"))]
    entries += load_census(bundled("htw_knots_12.tsv"), "HTW-DT",
                           select=lambda name: crossing_count(name) <= max_crossings)
    ok = True
    for e in entries:
        bad = check_link(e)
        ok &= not bad
        echo(f"{'ok  ' if not bad else 'FAIL'} {e.name}" + (f"  {', '.join(bad)}" if bad else ""))
    echo(f"{len(entries)} links, {'all checks pass' if ok else 'failures'}")
    return ok
