"""St(L), the integral Khovanov fingerprint, and the census harnesses.

For fixed ``(i, j)`` let ``A = Sq^1 : (i, j) -> (i+1, j)``,
``B = Sq^1 : (i+1, j) -> (i+2, j)`` and ``S = Sq^2 : (i, j) -> (i+2, j)``.
The ranks are

    r1 = rank S
    r2 = rank S|ker A
    r3 = dim(im B & im S)
    r4 = dim(im B & S(ker A))

and ``St(i, j) = (r2 - r4, r1 - r2 - r3 + r4, r4, r3 - r4)``.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .complex import KhCube
from .errors import DimensionMismatch, KhError, NegativeComponent, UnknownName
from .exactla import f2_decompose, f2_rank, subspace_intersection
from .homology import BigradedGroup, OpMatrix, kh, sq1, width_f2
from .linkdata import CensusEntry, LinkDiagram, mirror
from .steenrod import FrameAssignment, sq2

__all__ = [
    "RankProfile", "StEntry", "StTable", "KhKey", "rank_profile", "st_entry",
    "st_table", "kh_key", "LinkResult", "analyze", "compute_census",
    "CompareReport", "census_compare", "compare_with_mirror", "MutantReport",
    "mutant_check", "cp2_count",
]


@dataclass(frozen=True)
class RankProfile:
    r1: int
    r2: int
    r3: int
    r4: int

    def check(self) -> None:
        r1, r2, r3, r4 = self.r1, self.r2, self.r3, self.r4
        if not (r1 >= r2 and r3 >= r4 and r2 >= r4 and r1 - r2 - r3 + r4 >= 0):
            raise NegativeComponent(f"rank profile {self} violates r1>=r2, r3>=r4, r2>=r4")


@dataclass(frozen=True)
class StEntry:
    a: int
    b: int
    c: int
    d: int

    def __iter__(self):
        return iter((self.a, self.b, self.c, self.d))

    def __bool__(self) -> bool:
        return any(self)

    def __str__(self) -> str:
        return f"{self.a},{self.b},{self.c},{self.d}"


def rank_profile(sq1_i: OpMatrix, sq1_i1: OpMatrix, sq2_m: OpMatrix) -> RankProfile:
    A, B, S = sq1_i.matrix, sq1_i1.matrix, sq2_m.matrix
    if A.cols != S.cols:
        raise DimensionMismatch(f"Sq^1 has {A.cols} source columns, Sq^2 has {S.cols}")
    if A.rows != B.cols:
        raise DimensionMismatch(f"Sq^1 into {A.rows} dimensions, next Sq^1 out of {B.cols}")
    if B.rows != S.rows:
        raise DimensionMismatch(f"Sq^1 lands in {B.rows} dimensions, Sq^2 in {S.rows}")
    ker = f2_decompose(A).kernel
    im_s = [S.column(c) for c in range(S.cols)]
    im_sk = [S.apply(v) for v in ker]
    im_b = [B.column(c) for c in range(B.cols)]
    r1 = f2_rank(im_s)
    r2 = f2_rank(im_sk)
    r3 = len(subspace_intersection(im_b, im_s))
    r4 = len(subspace_intersection(im_b, im_sk))
    return RankProfile(r1, r2, r3, r4)


def st_entry(p: RankProfile) -> StEntry:
    e = StEntry(p.r2 - p.r4, p.r1 - p.r2 - p.r3 + p.r4, p.r4, p.r3 - p.r4)
    if min(e) < 0:
        raise NegativeComponent(f"St entry {tuple(e)} from {p} has a negative component")
    return e


@dataclass(frozen=True)
class StTable:
    """Nonzero St entries keyed by ``(i, j)``."""

    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {k: v for k, v in self.entries.items() if v}
        object.__setattr__(self, "entries", dict(sorted(clean.items(), key=lambda kv: (kv[0][1], kv[0][0]))))

    def serialize(self) -> str:
        """Canonical string: ``i,j:a,b,c,d`` joined by ``;``, sorted by ``(j, i)``."""
        return ";".join(f"{i},{j}:{e}" for (i, j), e in self.entries.items())

    @classmethod
    def parse(cls, text: str) -> "StTable":
        out = {}
        for item in filter(None, text.split(";")):
            key, val = item.split(":")
            i, j = map(int, key.split(","))
            out[(i, j)] = StEntry(*map(int, val.split(",")))
        return cls(out)

    def tsv_rows(self, name: str) -> list[str]:
        return [f"{name}\t{i}\t{j}\t{e.a}\t{e.b}\t{e.c}\t{e.d}" for (i, j), e in self.entries.items()]

    def __eq__(self, other) -> bool:
        return isinstance(other, StTable) and self.serialize() == other.serialize()

    def __hash__(self) -> int:
        return hash(self.serialize())

    def __len__(self) -> int:
        return len(self.entries)


def st_table(diagram: LinkDiagram, convention: str = "right",
             kh_f2: BigradedGroup | None = None) -> StTable:
    F = kh_f2 if kh_f2 is not None else kh(diagram, "F2")
    frame = FrameAssignment(convention)
    out = {}
    for (i, j) in F.entries:
        if (i + 2, j) not in F.entries:
            continue
        cx = F.complexes[j]
        prof = rank_profile(sq1(cx, F, i, j), sq1(cx, F, i + 1, j), sq2(cx, F, i, j, frame=frame))
        e = st_entry(prof)
        if e:
            out[(i, j)] = e
    return StTable(out)


# ---------------------------------------------------------------- Kh(Z) key

@dataclass(frozen=True, order=True)
class KhKey:
    text: str

    def __str__(self) -> str:
        return self.text


def kh_key(kh_z: BigradedGroup) -> KhKey:
    parts = []
    for i, j, free, tors in kh_z.rows():
        parts.append(f"{i},{j},{free},[{' '.join(map(str, tors))}]")
    return KhKey(";".join(parts))


# ---------------------------------------------------------------- census

@dataclass(frozen=True)
class LinkResult:
    name: str
    key: KhKey | None
    st: StTable | None
    width: int | None = None
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps({"name": self.name,
                           "khkey": None if self.key is None else self.key.text,
                           "st": None if self.st is None else self.st.serialize(),
                           "width": self.width, "error": self.error}, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "LinkResult":
        d = json.loads(line)
        return cls(d["name"], None if d["khkey"] is None else KhKey(d["khkey"]),
                   None if d["st"] is None else StTable.parse(d["st"]),
                   d.get("width"), d.get("error"))


def analyze(entry: CensusEntry, convention: str = "right") -> LinkResult:
    """Integral homology key, St table and F2 width of one census entry.
    Errors are captured in the result rather than raised."""
    try:
        kc = KhCube(entry.diagram)
        z = kh(entry.diagram, "Z", kcube=kc)
        f = kh(entry.diagram, "F2", kcube=kc)
        return LinkResult(entry.name, kh_key(z), st_table(entry.diagram, convention, f), width_f2(f))
    except KhError as exc:
        return LinkResult(entry.name, None, None, None, f"{type(exc).__name__}: {exc}")


def _analyze_args(args):
    return analyze(*args)


def compute_census(entries: Sequence[CensusEntry], convention: str = "right",
                   workers: int = 1, journal: str | Path | None = None) -> Iterator[LinkResult]:
    """Yield a result per entry, in completion order.

    With ``journal``, results already recorded there are yielded first
    without recomputation, and every new result is appended and fsynced.
    """
    done: dict[str, LinkResult] = {}
    if journal is not None and Path(journal).exists():
        for line in Path(journal).read_text(encoding="utf-8").splitlines():
            if line.strip():
                r = LinkResult.from_json(line)
                done[r.name] = r
    names = {e.name for e in entries}
    for name, r in done.items():
        if name in names:
            yield r
    todo = [e for e in entries if e.name not in done]
    fh = open(journal, "a", encoding="utf-8") if journal is not None else None
    try:
        if workers <= 1:
            results: Iterable[LinkResult] = (analyze(e, convention) for e in todo)
            for r in results:
                _record(fh, r)
                yield r
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for r in pool.map(_analyze_args, [(e, convention) for e in todo], chunksize=1):
                    _record(fh, r)
                    yield r
    finally:
        if fh is not None:
            fh.close()


def _record(fh, r: LinkResult) -> None:
    if fh is None:
        return
    fh.write(r.to_json() + "\n")
    fh.flush()
    os.fsync(fh.fileno())


@dataclass
class CompareReport:
    groups: list[list[str]]          # KhKey groups of size >= 2
    splits: list[list[list[str]]]    # for each group, its partition by St
    failures: list[tuple[str, str]]

    @property
    def witnesses(self) -> list[list[list[str]]]:
        """Partitions of the KhKey groups that St refines strictly."""
        return [s for s in self.splits if len(s) > 1]

    def text(self) -> str:
        lines = []
        for g, s in zip(self.groups, self.splits):
            tag = "split" if len(s) > 1 else "same St"
            lines.append(f"group {' '.join(g)}: {tag}")
            if len(s) > 1:
                for part in s:
                    lines.append(f"  {' '.join(part)}")
        for name, err in self.failures:
            lines.append(f"failed {name}: {err}")
        lines.append(f"{len(self.groups)} Kh groups, {len(self.witnesses)} split by St, "
                     f"{len(self.failures)} failures")
        return "\n".join(lines) + "\n"


def census_compare(results: Iterable[LinkResult]) -> CompareReport:
    by_key: dict[str, list[LinkResult]] = {}
    failures = []
    for r in results:
        if r.error is not None:
            failures.append((r.name, r.error))
            continue
        by_key.setdefault(r.key.text, []).append(r)
    groups, splits = [], []
    for key in sorted(by_key):
        members = sorted(by_key[key], key=lambda r: r.name)
        if len(members) < 2:
            continue
        by_st: dict[str, list[str]] = {}
        for r in members:
            by_st.setdefault(r.st.serialize(), []).append(r.name)
        groups.append([r.name for r in members])
        splits.append(sorted(by_st.values()))
    groups_splits = sorted(zip(groups, splits))
    return CompareReport([g for g, _ in groups_splits], [s for _, s in groups_splits],
                         sorted(failures))


def compare_with_mirror(entries: Sequence[CensusEntry], convention: str = "right"
                        ) -> tuple[str, list[LinkResult]]:
    """Analyze a named group as parsed; if the KhKeys differ, retry with
    every diagram mirrored.  Returns ``("as parsed" | "mirrored" | "none",
    results)`` where the results are those of the orientation that matched
    (or the as-parsed ones)."""
    first = [analyze(e, convention) for e in entries]
    if len({r.key for r in first}) == 1 and first[0].key is not None:
        return "as parsed", first
    flipped = [analyze(CensusEntry(e.name, mirror(e.diagram)), convention) for e in entries]
    if len({r.key for r in flipped}) == 1 and flipped[0].key is not None:
        return "mirrored", flipped
    return "none", first


@dataclass
class MutantReport:
    rows: list[tuple[tuple[str, ...], bool, bool]]   # names, St agrees, Kh(F2) agrees

    @property
    def agree(self) -> int:
        return sum(1 for _, st, _ in self.rows if st)

    @property
    def disagree(self) -> int:
        return len(self.rows) - self.agree

    def text(self) -> str:
        lines = [f"{' '.join(names)}\tSt {'agree' if st else 'differ'}\t"
                 f"Kh(F2) {'agree' if f2 else 'differ'}" for names, st, f2 in self.rows]
        lines.append(f"{self.agree} agree, {self.disagree} disagree")
        return "\n".join(lines) + "\n"


def mutant_check(census: Sequence[CensusEntry], pair_groups: Sequence[Sequence[str]],
                 convention: str = "right") -> MutantReport:
    by_name = {e.name: e for e in census}
    for g in pair_groups:
        missing = [n for n in g if n not in by_name]
        if missing:
            raise UnknownName(f"names not in census: {', '.join(missing)}")
    rows = []
    for g in pair_groups:
        tables, dims = [], []
        for n in g:
            f = kh(by_name[n].diagram, "F2")
            tables.append(st_table(by_name[n].diagram, convention, f))
            dims.append(f.f2_dims())
        rows.append((tuple(g), len(set(tables)) <= 1, all(d == dims[0] for d in dims)))
    return MutantReport(rows)


def cp2_count(st: StTable) -> tuple[dict, bool]:
    amap = {k: e.a for k, e in st.entries.items()}
    return amap, any(a > 0 for a in amap.values())
