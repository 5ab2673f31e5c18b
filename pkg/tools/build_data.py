"""Regenerate the bundled census files from the SnapPy manifold database.

Needs the ``snappy_manifolds`` package (only for this script).  Usage:

    python3 tools/build_data.py [path/to/more_manifolds.sqlite]
"""

import sqlite3
import sys
from pathlib import Path

from khst.linkdata import dt_to_diagram, parse_alpha_dt

OUT = Path(__file__).resolve().parent.parent / "src" / "khst" / "data"
TRIPLE = ("K14n5017", "K14n11311", "K14n11629")
MUTANTS = [("K11n34", "K11n42")]


def default_db() -> Path:
    import snappy_manifolds
    return Path(snappy_manifolds.__file__).parent / "sqlite_files" / "more_manifolds.sqlite"


def crossings(name: str) -> int:
    digits = ""
    for ch in name[1:]:
        if not ch.isdigit():
            break
        digits += ch
    return int(digits)


def sort_key(name: str):
    kind = "a" if "a" in name[1:] else "n"
    return crossings(name), kind, int(name.split(kind, 1)[1])


def main(db: Path) -> None:
    con = sqlite3.connect(str(db))
    rows = con.execute("select name, DT from HT_links").fetchall()
    codes = {name: dt.split(".")[0] for name, dt in rows}
    OUT.mkdir(parents=True, exist_ok=True)

    knots = sorted((n for n in codes if n.startswith("K") and crossings(n) <= 12), key=sort_key)
    with open(OUT / "htw_knots_12.tsv", "w", encoding="utf-8") as fh:
        fh.write("# HTW knots up to 12 crossings: name<TAB>signed DT evens\n")
        for n in knots:
            evens, _ = parse_alpha_dt(codes[n])
            fh.write(f"{n}\t{' '.join(map(str, evens))}\n")

    with open(OUT / "htw14_triple.tsv", "w", encoding="utf-8") as fh:
        fh.write("# three 14 crossing knots with equal integral Khovanov homology\n")
        for n in TRIPLE:
            evens, _ = parse_alpha_dt(codes[n])
            fh.write(f"{n}\t{' '.join(map(str, evens))}\n")

    links = sorted((n for n in codes if n.startswith("L") and crossings(n) <= 10), key=sort_key)
    with open(OUT / "mt_links_10.tsv", "w", encoding="utf-8") as fh:
        fh.write("# Thistlethwaite links up to 10 crossings: name<TAB>PD\n")
        for n in links:
            evens, sizes = parse_alpha_dt(codes[n])
            fh.write(f"{n}\t{dt_to_diagram(evens, sizes, n).pd_string()}\n")

    with open(OUT / "mutant_pairs.txt", "w", encoding="utf-8") as fh:
        fh.write("# mutant knot groups, one per line\n")
        for g in MUTANTS:
            fh.write(" ".join(g) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else default_db())
