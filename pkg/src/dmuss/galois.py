"""Prime-field arithmetic and dense matrix algebra over GF(q).

Matrices are small (tens of rows at most), so everything is exact integer
arithmetic on tuples; no attempt is made at fast algorithms.  All values are
immutable and every operation returns a fresh object.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    DivideByZero,
    IndexOutOfRange,
    NotPrime,
    NotSquare,
    RankDeficientTarget,
    ShapeMismatch,
)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Field:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or isinstance(self.q, bool) or not is_prime(self.q):
            raise NotPrime(f"GF({self.q}) is not a prime field")

    def __repr__(self):
        return f"GF({self.q})"

    def elements(self) -> range:
        return range(self.q)


def make_field(q: int) -> Field:
    return Field(q)


def smallest_prime_greater_than(k: int) -> int:
    n = max(k + 1, 2)
    while not is_prime(n):
        n += 1
    return n


def field_invert(f: Field, a: int) -> int:
    a %= f.q
    if a == 0:
        raise DivideByZero(f"0 has no inverse in {f!r}")
    return pow(a, f.q - 2, f.q)


@dataclass(frozen=True)
class FieldMatrix:
    """Dense row-major matrix with entries reduced into [0, q)."""

    field: Field
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ShapeMismatch(f"negative shape {self.rows}x{self.cols}")
        if len(self.entries) != self.rows * self.cols:
            raise ShapeMismatch(
                f"{len(self.entries)} entries do not fill a {self.rows}x{self.cols} matrix"
            )
        q = self.field.q
        if any(not 0 <= e < q for e in self.entries):
            raise ValueError(f"entries must be canonical residues in [0, {q})")

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence[int]], cols: int | None = None):
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ShapeMismatch("ragged rows")
        q = field.q
        return cls(field, len(rows), cols, tuple(int(e) % q for r in rows for e in r))

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int):
        return cls(field, rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, field: Field, n: int):
        return cls(field, n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexOutOfRange(f"({i}, {j}) outside {self.rows}x{self.cols}")
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> FieldMatrix:
        return FieldMatrix(
            self.field, self.cols, self.rows,
            tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)),
        )

    def replace(self, i: int, j: int, value: int) -> FieldMatrix:
        self[i, j]
        entries = list(self.entries)
        entries[i * self.cols + j] = value % self.field.q
        return FieldMatrix(self.field, self.rows, self.cols, tuple(entries))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __str__(self):
        return "\n".join(" ".join(str(e) for e in self.row(i)) for i in range(self.rows))


def _echelon(rows: list[list[int]], q: int) -> int:
    """Row-reduce in place (forward elimination only); returns the rank."""
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        p = next((i for i in range(r, n_rows) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = pow(rows[r][c], q - 2, q)
        pivot = [(e * inv) % q for e in rows[r]]
        rows[r] = pivot
        for i in range(r + 1, n_rows):
            f = rows[i][c]
            if f:
                rows[i] = [(a - f * b) % q for a, b in zip(rows[i], pivot)]
        r += 1
    return r


def rank(m: FieldMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return _echelon(m.to_rows(), m.field.q)


def determinant(m: FieldMatrix) -> int:
    if m.rows != m.cols:
        raise NotSquare(f"determinant of a {m.rows}x{m.cols} matrix")
    q = m.field.q
    rows = m.to_rows()
    n = m.rows
    det = 1
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c]), None)
        if p is None:
            return 0
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            det = -det
        det = det * rows[c][c] % q
        inv = pow(rows[c][c], q - 2, q)
        for i in range(c + 1, n):
            f = rows[i][c] * inv % q
            if f:
                rows[i] = [(a - f * b) % q for a, b in zip(rows[i], rows[c])]
    return det % q


def pivot_reduce(m: FieldMatrix, target_cols: Sequence[int]) -> FieldMatrix:
    """Row-reduce so the target columns become an identity stacked over zeros.

    Pivots are taken in the order of ``target_cols``.  For each one, among
    the not-yet-used rows with a nonzero entry, the row with the fewest
    nonzero entries is chosen (earliest row on ties) and moved up; unused rows
    keep their relative order.  Preferring sparse pivot rows keeps the
    transformed block sparse.
    """
    q = m.field.q
    for c in target_cols:
        if not 0 <= c < m.cols:
            raise IndexOutOfRange(f"column {c} outside {m.cols} columns")
    if len(set(target_cols)) != len(target_cols):
        raise ValueError("target columns must be distinct")
    rows = m.to_rows()
    for t, c in enumerate(target_cols):
        candidates = [i for i in range(t, m.rows) if rows[i][c]]
        if not candidates:
            raise RankDeficientTarget(
                f"target columns {list(target_cols)} are rank deficient (stuck at column {c})"
            )
        p = min(candidates, key=lambda i: (sum(1 for e in rows[i] if e), i))
        rows.insert(t, rows.pop(p))
        inv = pow(rows[t][c], q - 2, q)
        rows[t] = [(e * inv) % q for e in rows[t]]
        for i in range(m.rows):
            f = rows[i][c]
            if i != t and f:
                rows[i] = [(a - f * b) % q for a, b in zip(rows[i], rows[t])]
    return FieldMatrix.from_rows(m.field, rows, m.cols)


def mat_mul(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    if a.field != b.field:
        raise ShapeMismatch(f"operands over {a.field!r} and {b.field!r}")
    if a.cols != b.rows:
        raise ShapeMismatch(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    q = a.field.q
    bt = [b.entries[j::b.cols] for j in range(b.cols)] if b.cols else []
    out = []
    for i in range(a.rows):
        r = a.row(i)
        out.extend(sum(x * y for x, y in zip(r, col)) % q for col in bt)
    return FieldMatrix(a.field, a.rows, b.cols, tuple(out))


def submatrix(m: FieldMatrix, rows: Iterable[int], cols: Iterable[int]) -> FieldMatrix:
    rows, cols = list(rows), list(cols)
    for i in rows:
        if not 0 <= i < m.rows:
            raise IndexOutOfRange(f"row {i} outside {m.rows} rows")
    for j in cols:
        if not 0 <= j < m.cols:
            raise IndexOutOfRange(f"column {j} outside {m.cols} columns")
    return FieldMatrix(
        m.field, len(rows), len(cols), tuple(m.entries[i * m.cols + j] for i in rows for j in cols)
    )


def hstack(*blocks: FieldMatrix) -> FieldMatrix:
    if not blocks:
        raise ShapeMismatch("nothing to stack")
    n = blocks[0].rows
    if any(b.rows != n for b in blocks) or len({b.field for b in blocks}) != 1:
        raise ShapeMismatch("hstack needs equal row counts over one field")
    rows = [[e for b in blocks for e in b.row(i)] for i in range(n)]
    return FieldMatrix(blocks[0].field, n, sum(b.cols for b in blocks), tuple(e for r in rows for e in r))


def vstack(*blocks: FieldMatrix) -> FieldMatrix:
    if not blocks:
        raise ShapeMismatch("nothing to stack")
    c = blocks[0].cols
    if any(b.cols != c for b in blocks) or len({b.field for b in blocks}) != 1:
        raise ShapeMismatch("vstack needs equal column counts over one field")
    return FieldMatrix(blocks[0].field, sum(b.rows for b in blocks), c,
                       tuple(e for b in blocks for e in b.entries))


def same_row_space(a: FieldMatrix, b: FieldMatrix) -> bool:
    """True when both matrices span the same subspace of GF(q)^cols."""
    r = rank(a)
    return r == rank(b) == rank(vstack(a, b))
