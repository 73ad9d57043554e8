"""Sparse exact linear algebra over an arbitrary field.

Entries may be any field elements supporting ``+ - * /`` and truthiness
(QScalar, Fraction, int).  Zero entries are never stored.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Iterator

Vector = dict  # key -> nonzero scalar


class SingularMatrix(ArithmeticError):
    pass


def field_inverse(x):
    """``1/x`` staying exact when ``x`` is a plain int."""
    if isinstance(x, int):
        return Fraction(1, x)
    return 1 / x


def vec_axpy(target: Vector, src: Vector, coeff) -> None:
    """``target += coeff * src`` in place."""
    if not coeff:
        return
    for k, v in src.items():
        nv = target.get(k, 0) + coeff * v
        if nv:
            target[k] = nv
        else:
            target.pop(k, None)


def vec_scale(src: Vector, coeff) -> Vector:
    if not coeff:
        return {}
    return {k: coeff * v for k, v in src.items()}


def vec_sub(a: Vector, b: Vector) -> Vector:
    out = dict(a)
    vec_axpy(out, b, -1)
    return out


class SparseMatrix:
    """Row-major dict-of-dicts matrix of shape ``(nrows, ncols)``."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: dict[int, dict[int, object]] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        self.rows = rows if rows is not None else {}

    # -- construction --------------------------------------------------------

    @classmethod
    def identity(cls, n: int, one=1) -> "SparseMatrix":
        return cls(n, n, {i: {i: one} for i in range(n)})

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseMatrix":
        return cls(nrows, ncols)

    @classmethod
    def from_dense(cls, data: list[list]) -> "SparseMatrix":
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        rows = {}
        for i, row in enumerate(data):
            r = {j: v for j, v in enumerate(row) if v}
            if r:
                rows[i] = r
        return cls(nrows, ncols, rows)

    @classmethod
    def from_entries(cls, nrows: int, ncols: int, entries: Iterable[tuple[int, int, object]]) -> "SparseMatrix":
        m = cls(nrows, ncols)
        for i, j, v in entries:
            m.add_to(i, j, v)
        return m

    @classmethod
    def from_columns(cls, nrows: int, columns: list[Vector]) -> "SparseMatrix":
        m = cls(nrows, len(columns))
        for j, col in enumerate(columns):
            for i, v in col.items():
                m.rows.setdefault(i, {})[j] = v
        return m

    def copy(self) -> "SparseMatrix":
        return SparseMatrix(self.nrows, self.ncols, {i: dict(r) for i, r in self.rows.items()})

    # -- element access ------------------------------------------------------

    def get(self, i: int, j: int):
        return self.rows.get(i, {}).get(j, 0)

    def __getitem__(self, ij):
        return self.get(*ij)

    def add_to(self, i: int, j: int, v) -> None:
        if not v:
            return
        row = self.rows.setdefault(i, {})
        nv = row.get(j, 0) + v
        if nv:
            row[j] = nv
        else:
            del row[j]
            if not row:
                del self.rows[i]

    def set(self, i: int, j: int, v) -> None:
        row = self.rows.setdefault(i, {})
        if v:
            row[j] = v
        else:
            row.pop(j, None)
            if not row:
                del self.rows[i]

    def entries(self) -> Iterator[tuple[int, int, object]]:
        for i in sorted(self.rows):
            row = self.rows[i]
            for j in sorted(row):
                yield i, j, row[j]

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def column(self, j: int) -> Vector:
        return {i: r[j] for i, r in self.rows.items() if j in r}

    def columns(self) -> list[Vector]:
        cols: list[Vector] = [dict() for _ in range(self.ncols)]
        for i, r in self.rows.items():
            for j, v in r.items():
                cols[j][i] = v
        return cols

    def to_dense(self, zero=0) -> list[list]:
        out = [[zero] * self.ncols for _ in range(self.nrows)]
        for i, r in self.rows.items():
            for j, v in r.items():
                out[i][j] = v
        return out

    # -- algebra -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.rows

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and (self - other).is_zero()

    __hash__ = None

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_same(other)
        out = self.copy()
        for i, r in other.rows.items():
            for j, v in r.items():
                out.add_to(i, j, v)
        return out

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_same(other)
        out = self.copy()
        for i, r in other.rows.items():
            for j, v in r.items():
                out.add_to(i, j, -v)
        return out

    def __neg__(self) -> "SparseMatrix":
        return self.scale(-1)

    def scale(self, c) -> "SparseMatrix":
        if not c:
            return SparseMatrix(self.nrows, self.ncols)
        return SparseMatrix(self.nrows, self.ncols,
                            {i: {j: c * v for j, v in r.items()} for i, r in self.rows.items()})

    def __mul__(self, c) -> "SparseMatrix":
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out: dict[int, dict[int, object]] = {}
        orows = other.rows
        for i, r in self.rows.items():
            acc: dict[int, object] = {}
            for k, a in r.items():
                brow = orows.get(k)
                if not brow:
                    continue
                for j, b in brow.items():
                    acc[j] = acc.get(j, 0) + a * b
            acc = {j: v for j, v in acc.items() if v}
            if acc:
                out[i] = acc
        return SparseMatrix(self.nrows, other.ncols, out)

    def apply(self, vec: Vector) -> Vector:
        """Matrix times sparse column vector keyed by column index."""
        out: Vector = {}
        for i, r in self.rows.items():
            acc = 0
            for j, v in r.items():
                x = vec.get(j)
                if x:
                    acc = acc + v * x
            if acc:
                out[i] = acc
        return out

    def transpose(self) -> "SparseMatrix":
        out = SparseMatrix(self.ncols, self.nrows)
        for i, r in self.rows.items():
            for j, v in r.items():
                out.rows.setdefault(j, {})[i] = v
        return out

    def map(self, fn: Callable) -> "SparseMatrix":
        out = SparseMatrix(self.nrows, self.ncols)
        for i, r in self.rows.items():
            for j, v in r.items():
                w = fn(v)
                if w:
                    out.rows.setdefault(i, {})[j] = w
        return out

    def inverse(self) -> "SparseMatrix":
        if self.nrows != self.ncols:
            raise SingularMatrix("non-square matrix")
        n = self.nrows
        aug = [dict(self.rows.get(i, {})) for i in range(n)]
        inv = [{i: 1} for i in range(n)]
        for col in range(n):
            piv = None
            for r in range(col, n):
                if col in aug[r]:
                    if piv is None or len(aug[r]) < len(aug[piv]):
                        piv = r
            if piv is None:
                raise SingularMatrix("matrix is singular")
            aug[col], aug[piv] = aug[piv], aug[col]
            inv[col], inv[piv] = inv[piv], inv[col]
            p = aug[col][col]
            pinv = field_inverse(p)
            aug[col] = vec_scale(aug[col], pinv)
            inv[col] = vec_scale(inv[col], pinv)
            for r in range(n):
                if r != col:
                    f = aug[r].get(col)
                    if f:
                        vec_axpy(aug[r], aug[col], -f)
                        vec_axpy(inv[r], inv[col], -f)
        return SparseMatrix(n, n, {i: r for i, r in enumerate(inv) if r})

    def rank(self) -> int:
        return len(echelon([dict(r) for r in self.rows.values()]))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def _check_same(self, other: "SparseMatrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __repr__(self) -> str:
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"


def kron(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    out = SparseMatrix(a.nrows * b.nrows, a.ncols * b.ncols)
    for i, ra in a.rows.items():
        for k, rb in b.rows.items():
            row = {}
            for j, va in ra.items():
                for l, vb in rb.items():
                    row[j * b.ncols + l] = va * vb
            out.rows[i * b.nrows + k] = row
    return out


def echelon(rows: list[Vector], key: Callable | None = None) -> dict:
    """Reduced row echelon form of the span of ``rows``.

    The leading column of a row is its ``max`` under ``key``.  Returns a dict
    pivot column -> row normalised to 1 at the pivot, fully reduced against all
    other pivots.
    """
    key = key or (lambda c: c)
    pivots: dict = {}
    for row in rows:
        r = dict(row)
        while r:
            lead = max(r, key=key)
            prow = pivots.get(lead)
            if prow is None:
                inv = field_inverse(r[lead])
                pivots[lead] = vec_scale(r, inv)
                break
            vec_axpy(r, prow, -r[lead])
    # back substitution, smallest pivots first
    for p in sorted(pivots, key=key):
        row = pivots[p]
        changed = True
        while changed:
            changed = False
            for c in sorted((c for c in row if c != p and c in pivots), key=key, reverse=True):
                f = row.get(c)
                if f:
                    vec_axpy(row, pivots[c], -f)
                    changed = True
    return pivots


def nullspace(rows: list[Vector], ncols: int) -> list[Vector]:
    """Basis of ``{x : row . x = 0 for all rows}`` in ``ncols`` unknowns."""
    piv = echelon(rows, key=lambda c: -c)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = {f: 1}
        for p, row in piv.items():
            v = row.get(f)
            if v:
                x[p] = -v
        basis.append(x)
    return basis
