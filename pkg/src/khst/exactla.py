"""Exact linear algebra over F2 and over the integers.

F2 vectors are Python ints: bit ``c`` is coordinate ``c``.  An
:class:`F2Matrix` keeps one such int per row.  Its ``payload`` is the
platform independent packing used by debug dumps: each row occupies
``ceil(cols / 64)`` unsigned 64-bit words, least significant word first,
and column ``c`` is bit ``c % 64`` of word ``c // 64``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DimensionMismatch

__all__ = [
    "WORD_BITS", "F2Matrix", "F2Decomposition", "f2_decompose", "f2_rank",
    "EchelonBasis", "subspace_intersection", "ZSparseMatrix", "SnfResult",
    "smith_normal_form",
]

WORD_BITS = 64
_WORD_MASK = (1 << WORD_BITS) - 1


def _words(cols: int) -> int:
    return (cols + WORD_BITS - 1) // WORD_BITS


class F2Matrix:
    """Immutable dense matrix over F2 with rows stored as bit sets."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Iterable[int] = ()):
        data = tuple(data)
        if not data:
            data = (0,) * rows
        if len(data) != rows:
            raise DimensionMismatch(f"{len(data)} row vectors for a {rows}-row matrix")
        limit = 1 << cols
        for x in data:
            if x < 0 or x >= limit:
                raise DimensionMismatch("row vector has bits beyond the column count")
        self.rows = rows
        self.cols = cols
        self._data = data

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dense(cls, mat: Sequence[Sequence[int]], cols: int | None = None) -> "F2Matrix":
        if cols is None:
            cols = len(mat[0]) if mat else 0
        data = []
        for row in mat:
            if len(row) != cols:
                raise DimensionMismatch("ragged dense matrix")
            data.append(sum(1 << c for c, x in enumerate(row) if x & 1))
        return cls(len(mat), cols, data)

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Iterable[tuple[int, int]]) -> "F2Matrix":
        """Build from ``(row, col)`` pairs; repeated pairs cancel."""
        data = [0] * rows
        for r, c in entries:
            if not (0 <= r < rows and 0 <= c < cols):
                raise DimensionMismatch(f"entry ({r}, {c}) outside a {rows}x{cols} matrix")
            data[r] ^= 1 << c
        return cls(rows, cols, data)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[int]) -> "F2Matrix":
        """Matrix whose column ``c`` is the bit vector ``columns[c]``."""
        data = [0] * rows
        for c, col in enumerate(columns):
            x = col
            while x:
                low = x & -x
                r = low.bit_length() - 1
                if r >= rows:
                    raise DimensionMismatch("column vector longer than the row count")
                data[r] |= 1 << c
                x ^= low
        return cls(rows, len(columns), data)

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls(n, n, [1 << r for r in range(n)])

    @classmethod
    def from_payload(cls, rows: int, cols: int, payload: Sequence[int]) -> "F2Matrix":
        w = _words(cols)
        if len(payload) != rows * w:
            raise DimensionMismatch("payload length does not match the dimensions")
        data = []
        for r in range(rows):
            x = 0
            for k in range(w):
                x |= (payload[r * w + k] & _WORD_MASK) << (WORD_BITS * k)
            data.append(x)
        return cls(rows, cols, data)

    # -- access ------------------------------------------------------------

    @property
    def payload(self) -> tuple[int, ...]:
        w = _words(self.cols)
        out = []
        for x in self._data:
            for k in range(w):
                out.append((x >> (WORD_BITS * k)) & _WORD_MASK)
        return tuple(out)

    def row(self, r: int) -> int:
        return self._data[r]

    def row_vectors(self) -> tuple[int, ...]:
        return self._data

    def column(self, c: int) -> int:
        return sum(1 << r for r, x in enumerate(self._data) if x >> c & 1)

    def columns(self) -> list[int]:
        out = [0] * self.cols
        for r, x in enumerate(self._data):
            while x:
                low = x & -x
                out[low.bit_length() - 1] |= 1 << r
                x ^= low
        return out

    def __getitem__(self, rc: tuple[int, int]) -> int:
        r, c = rc
        return self._data[r] >> c & 1

    def to_dense(self) -> list[list[int]]:
        return [[x >> c & 1 for c in range(self.cols)] for x in self._data]

    def transpose(self) -> "F2Matrix":
        return F2Matrix(self.cols, self.rows, self.columns())

    def apply(self, x: int) -> int:
        """The product ``M x`` for a column bit vector ``x``."""
        out = 0
        for r, row in enumerate(self._data):
            if bin(row & x).count("1") & 1:
                out |= 1 << r
        return out

    def __matmul__(self, other: "F2Matrix") -> "F2Matrix":
        if self.cols != other.rows:
            raise DimensionMismatch("inner dimensions differ")
        odata = other._data
        data = []
        for x in self._data:
            acc = 0
            while x:
                low = x & -x
                acc ^= odata[low.bit_length() - 1]
                x ^= low
            data.append(acc)
        return F2Matrix(self.rows, other.cols, data)

    def restrict_columns(self, basis: Sequence[int]) -> "F2Matrix":
        """The matrix of ``M`` on the subspace spanned by ``basis`` (one column each)."""
        return F2Matrix.from_columns(self.rows, [self.apply(b) for b in basis])

    def __eq__(self, other) -> bool:
        return (isinstance(other, F2Matrix) and self.rows == other.rows
                and self.cols == other.cols and self._data == other._data)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        return f"F2Matrix({self.rows}x{self.cols})"


class EchelonBasis:
    """Incremental echelon basis of a subspace of F2^n.

    Each stored vector is keyed by its lowest set bit, and no other stored
    vector has that bit set.  Optionally records, for every stored vector,
    which inserted vectors it is a combination of.
    """

    def __init__(self, track: bool = False):
        self.piv: dict[int, int] = {}
        self.combo: dict[int, int] = {}
        self.track = track
        self._count = 0

    def __len__(self) -> int:
        return len(self.piv)

    def reduce(self, x: int) -> tuple[int, int]:
        """Return ``(residue, combination)`` with ``x = residue + sum of combination``."""
        comb = 0
        piv = self.piv
        y = x
        changed = True
        while changed and y:
            changed = False
            t = y
            while t:
                low = t & -t
                c = low.bit_length() - 1
                t ^= low
                p = piv.get(c)
                if p is not None and y >> c & 1:
                    y ^= p
                    if self.track:
                        comb ^= self.combo[c]
                    changed = True
        return y, comb

    def contains(self, x: int) -> bool:
        return self.reduce(x)[0] == 0

    def add(self, x: int) -> bool:
        """Insert ``x``; returns False when it was already in the span."""
        idx = self._count
        self._count += 1
        y, comb = self.reduce(x)
        if not y:
            return False
        low = y & -y
        c = low.bit_length() - 1
        if self.track:
            comb ^= 1 << idx
        # keep the basis fully reduced in column c
        for c2, p in list(self.piv.items()):
            if p >> c & 1:
                self.piv[c2] = p ^ y
                if self.track:
                    self.combo[c2] ^= comb
        self.piv[c] = y
        if self.track:
            self.combo[c] = comb
        return True

    def basis(self) -> list[int]:
        """Reduced echelon basis, ordered by pivot position."""
        return [self.piv[c] for c in sorted(self.piv)]


@dataclass(frozen=True)
class F2Decomposition:
    rank: int
    pivots: tuple[int, ...]           # pivot column of each nonzero rref row
    rref: F2Matrix
    kernel: tuple[int, ...]           # vectors in F2^cols
    image: tuple[int, ...]            # vectors in F2^rows (pivot columns of M)
    transform: F2Matrix               # T with T @ M == rref

    def solve(self, b: int) -> int | None:
        """Some ``x`` with ``M x = b``, or None when ``b`` is not in the image."""
        tb = self.transform.apply(b)
        r = self.rank
        if tb >> r:
            return None
        x = 0
        for k, c in enumerate(self.pivots):
            if tb >> k & 1:
                x |= 1 << c
        return x

    def contains(self, b: int) -> bool:
        return self.solve(b) is not None


def f2_decompose(M: F2Matrix) -> F2Decomposition:
    rows, cols = M.rows, M.cols
    data = list(M.row_vectors())
    trans = [1 << r for r in range(rows)]
    pivots: list[int] = []
    rank = 0
    for c in range(cols):
        bit = 1 << c
        sel = None
        for r in range(rank, rows):
            if data[r] & bit:
                sel = r
                break
        if sel is None:
            continue
        data[rank], data[sel] = data[sel], data[rank]
        trans[rank], trans[sel] = trans[sel], trans[rank]
        pr, pt = data[rank], trans[rank]
        for r in range(rows):
            if r != rank and data[r] & bit:
                data[r] ^= pr
                trans[r] ^= pt
        pivots.append(c)
        rank += 1
        if rank == rows:
            break
    rref = F2Matrix(rows, cols, data)
    pivset = set(pivots)
    kernel = []
    for f in range(cols):
        if f in pivset:
            continue
        v = 1 << f
        for k, c in enumerate(pivots):
            if data[k] >> f & 1:
                v |= 1 << c
        kernel.append(v)
    image = tuple(M.column(c) for c in pivots)
    return F2Decomposition(rank, tuple(pivots), rref, tuple(kernel), image,
                           F2Matrix(rows, rows, trans))


def f2_rank(vectors: Iterable[int]) -> int:
    eb = EchelonBasis()
    for v in vectors:
        eb.add(v)
    return len(eb)


def _as_bits(vectors, dim: int | None) -> tuple[list[int], int | None]:
    out = []
    for v in vectors:
        if isinstance(v, int):
            if dim is not None and v >> dim:
                raise DimensionMismatch(f"vector exceeds ambient dimension {dim}")
            out.append(v)
        else:
            v = list(v)
            if dim is None:
                dim = len(v)
            elif len(v) != dim:
                raise DimensionMismatch(f"vector of length {len(v)} in ambient dimension {dim}")
            out.append(sum(1 << c for c, x in enumerate(v) if x & 1))
    return out, dim


def subspace_intersection(A: Sequence, B: Sequence, dim: int | None = None) -> list[int]:
    """Reduced echelon basis of ``span(A) & span(B)``.

    Vectors may be bit-set ints (pass ``dim`` to have their length checked)
    or 0/1 sequences, which must all share one length.
    """
    a, dim = _as_bits(A, dim)
    b, dim = _as_bits(B, dim)
    ea = EchelonBasis()
    for v in a:
        ea.add(v)
    eb = EchelonBasis()
    for v in b:
        eb.add(v)
    bbasis = eb.basis()
    # reduce B's basis against A, tracking combinations of B's basis
    mixed = EchelonBasis(track=True)
    for v in ea.basis():
        mixed.add(v)
    nA = mixed._count
    out = EchelonBasis()
    for k, v in enumerate(bbasis):
        idx = mixed._count
        y, comb = mixed.reduce(v)
        if y:
            mixed.add(v)
            continue
        mixed._count += 1
        comb ^= 1 << idx
        # comb over B part names a vector in span(A) & span(B)
        w = 0
        for t in range(nA, idx + 1):
            if comb >> t & 1:
                w ^= bbasis[t - nA]
        out.add(w)
    return out.basis()


# ---------------------------------------------------------------- integers

@dataclass(frozen=True)
class ZSparseMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        prev = None
        for r, c, v in self.entries:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise DimensionMismatch(f"entry ({r}, {c}) outside a {self.rows}x{self.cols} matrix")
            if v == 0:
                raise ValueError("explicit zero entry")
            if prev is not None and (r, c) <= prev:
                raise ValueError("entries must be strictly sorted by (row, col)")
            prev = (r, c)

    @classmethod
    def from_dict(cls, rows: int, cols: int, d: dict[tuple[int, int], int]) -> "ZSparseMatrix":
        return cls(rows, cols, tuple((r, c, v) for (r, c), v in sorted(d.items()) if v))

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Iterable[tuple[int, int, int]]) -> "ZSparseMatrix":
        acc: dict[tuple[int, int], int] = {}
        for r, c, v in entries:
            acc[(r, c)] = acc.get((r, c), 0) + v
        return cls.from_dict(rows, cols, acc)

    @classmethod
    def from_dense(cls, mat: Sequence[Sequence[int]]) -> "ZSparseMatrix":
        rows = len(mat)
        cols = len(mat[0]) if rows else 0
        return cls(rows, cols, tuple((r, c, int(v)) for r, row in enumerate(mat)
                                     for c, v in enumerate(row) if v))

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for r, c, v in self.entries:
            out[r][c] = v
        return out


@dataclass(frozen=True)
class SnfResult:
    invariant_factors: tuple[int, ...]
    rank: int
    # P (rows x rows) and Q (cols x cols), unimodular, with P M Q = diag(factors)
    left: tuple[tuple[int, ...], ...] | None = None
    right: tuple[tuple[int, ...], ...] | None = None

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(d for d in self.invariant_factors if d > 1)


def smith_normal_form(M: ZSparseMatrix, transforms: bool = False) -> SnfResult:
    """Invariant factors of a sparse integer matrix.

    Fraction-free elimination: the pivot is always an entry of least absolute
    value (unit pivots first, ties broken by Markowitz cost and position),
    and its row and column are cleared by integer division, repivoting on a
    smaller remainder when one appears.  The resulting diagonal is brought
    into divisibility order by gcd/lcm exchanges.
    """
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, set[int]] = {}
    for r, c, v in M.entries:
        rows.setdefault(r, {})[c] = v
        cols.setdefault(c, set()).add(r)
    P = [{r: 1} for r in range(M.rows)] if transforms else None
    Q = [{c: 1} for c in range(M.cols)] if transforms else None

    def row_axpy(dst: int, src: int, q: int):
        # row dst -= q * row src
        rd = rows.setdefault(dst, {})
        for c, v in rows[src].items():
            nv = rd.get(c, 0) - q * v
            if nv:
                if c not in rd:
                    cols[c].add(dst)
                rd[c] = nv
            elif c in rd:
                del rd[c]
                cols[c].discard(dst)
        if P is not None:
            pd = P[dst]
            for k, v in P[src].items():
                nv = pd.get(k, 0) - q * v
                if nv:
                    pd[k] = nv
                else:
                    pd.pop(k, None)

    def col_axpy(dst: int, src: int, q: int):
        # column dst -= q * column src
        cd = cols.setdefault(dst, set())
        for r in list(cols[src]):
            rr = rows[r]
            nv = rr.get(dst, 0) - q * rr[src]
            if nv:
                if dst not in rr:
                    cd.add(r)
                rr[dst] = nv
            elif dst in rr:
                del rr[dst]
                cd.discard(r)
        if Q is not None:
            qd = Q[dst]
            for k, v in Q[src].items():
                nv = qd.get(k, 0) - q * v
                if nv:
                    qd[k] = nv
                else:
                    qd.pop(k, None)

    def pick_global():
        best = None
        for r in sorted(rows):
            rr = rows[r]
            for c, v in rr.items():
                key = (abs(v), (len(rr) - 1) * (len(cols[c]) - 1), r, c)
                if best is None or key < best:
                    best = key
                    if key[0] == 1 and key[1] == 0:
                        return r, c
        return None if best is None else (best[2], best[3])

    diag: list[tuple[int, int, int]] = []
    while True:
        # drop emptied rows
        for r in [r for r, rr in rows.items() if not rr]:
            del rows[r]
        if not rows:
            break
        rc = pick_global()
        r, c = rc
        while True:
            p = rows[r][c]
            smaller = None
            for r2 in sorted(cols[c] - {r}):
                q = rows[r2][c] // p
                row_axpy(r2, r, q)
                rem = rows[r2].get(c, 0)
                if rem and (smaller is None or abs(rem) < abs(rows[smaller[0]][smaller[1]])):
                    smaller = (r2, c)
            if smaller is None:
                for c2 in sorted(set(rows[r]) - {c}):
                    q = rows[r][c2] // p
                    col_axpy(c2, c, q)
                    rem = rows[r].get(c2, 0)
                    if rem and (smaller is None or abs(rem) < abs(rows[smaller[0]][smaller[1]])):
                        smaller = (r, c2)
            if smaller is None:
                break
            r, c = smaller
        diag.append((r, c, p))
        del rows[r]
        cols[c].discard(r)
        del cols[c]

    # order pivots and normalize signs
    diag.sort(key=lambda t: (abs(t[2]), t[0], t[1]))
    values = [abs(p) for _, _, p in diag]
    k = len(values)
    if P is not None:
        for r, c, p in diag:
            if p < 0:
                P[r] = {key: -v for key, v in P[r].items()}
        used_r = [r for r, _, _ in diag]
        used_c = [c for _, c, _ in diag]
        rperm = used_r + [r for r in range(M.rows) if r not in set(used_r)]
        cperm = used_c + [c for c in range(M.cols) if c not in set(used_c)]
        P = [P[r] for r in rperm]
        Q = [Q[c] for c in cperm]
    # gcd/lcm exchanges until divisibility holds
    for a in range(k):
        for b in range(a + 1, k):
            x, y = values[a], values[b]
            if y % x == 0:
                continue
            g, s, t = _xgcd(x, y)
            values[a], values[b] = g, x // g * y
            if P is not None:
                # rows a, b: [[s, t], [-y/g, x/g]]; columns a, b: [[1, -t y/g], [1, s x/g]]
                ra, rb = P[a], P[b]
                P[a] = _lin(ra, s, rb, t)
                P[b] = _lin(ra, -(y // g), rb, x // g)
                qa, qb = Q[a], Q[b]
                Q[a] = _lin(qa, 1, qb, 1)
                Q[b] = _lin(qa, -t * (y // g), qb, s * (x // g))
    left = right = None
    if P is not None:
        left = tuple(tuple(P[r].get(k2, 0) for k2 in range(M.rows)) for r in range(M.rows))
        right = tuple(tuple(Q[c].get(k2, 0) for c in range(M.cols)) for k2 in range(M.cols))
    return SnfResult(tuple(values), k, left, right)


def _lin(u: dict[int, int], a: int, v: dict[int, int], b: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for key in set(u) | set(v):
        val = a * u.get(key, 0) + b * v.get(key, 0)
        if val:
            out[key] = val
    return out


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """``(g, s, t)`` with ``g = gcd(a, b) = s a + t b``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return a, s0, t0

