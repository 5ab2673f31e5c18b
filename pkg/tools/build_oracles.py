"""Extract the KnotInfo columns used as independent test oracles.

Usage: python3 tools/build_oracles.py path/to/knotinfo_data_complete.csv

Writes tests/data/knotinfo.tsv with one knot per line:
HTW name, KnotInfo name, PD, Jones polynomial, integral Khovanov vector
(entries ``torsion,rank,i,j`` joined by ``;``; torsion 0 means free).
"""

import ast
import csv
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "knotinfo.tsv"
MAX_CROSSINGS = 11


def htw_name(dt_name: str) -> str:
    head, idx = dt_name.split("_")
    return f"K{head}{idx}"


def main(src: Path) -> None:
    with open(src, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh, delimiter="|"))[1:]
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as fh:
        fh.write("# htw\tname\tpd\tjones\tkh (torsion,rank,i,j;...)\n")
        for r in rows:
            if not r["dt_name"] or not r["khovanov_unreduced_integral_vector"] or int(r["crossing_number"]) > MAX_CROSSINGS:
                continue
            kh = ast.literal_eval(r["khovanov_unreduced_integral_vector"])
            khs = ";".join(",".join(map(str, e)) for e in kh)
            jones = r["jones_polynomial"].replace(" ", "")
            fh.write(f"{htw_name(r['dt_name'])}\t{r['name']}\t{r['pd_notation']}\t{jones}\t{khs}\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]))
