"""Exact rational scalars, vectors, and matrices.

All game state in this package is rational and every operation here is
exact: no floats, no rounding, no tolerance parameters.  Scalars are
``fractions.Fraction`` (always in lowest terms, positive denominator);
``Vector`` and ``Matrix`` are thin immutable containers over them with
the handful of linear-algebra operations the rest of the package needs.

Rationals cross process boundaries as ``"p/q"`` strings (lowest terms,
q > 0), which round-trip bit-exactly.
"""

from __future__ import annotations

import decimal
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

Scalar = Union[int, str, Fraction]


def rational(value: Scalar) -> Fraction:
    """Coerce an int, Fraction, or "p/q" string to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def format_rational(value: Fraction) -> str:
    """Canonical "p/q" form (lowest terms, q > 0); bit-exact round trip."""
    return f"{value.numerator}/{value.denominator}"


def pretty_rational(value: Fraction) -> str:
    """Human form: integers without the "/1" tail, fractions as "p/q"."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def decimal_str(value: Fraction, significant_digits: int = 12) -> str:
    """Decimal rendering, round-half-even at the given significance."""
    with decimal.localcontext() as ctx:
        ctx.prec = significant_digits
        ctx.rounding = decimal.ROUND_HALF_EVEN
        d = decimal.Decimal(value.numerator) / decimal.Decimal(value.denominator)
    return str(d)


class Vector:
    """Immutable fixed-length vector of exact rationals."""

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[Scalar]):
        self.entries: tuple[Fraction, ...] = tuple(rational(e) for e in entries)
        if not self.entries:
            raise ValueError("vector must have at least one entry")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> Fraction:
        return self.entries[i]

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Vector):
            return self.entries == other.entries
        if isinstance(other, (tuple, list)):
            return len(self) == len(other) and all(
                a == rational(b) for a, b in zip(self.entries, other)
            )
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.entries)

    def __add__(self, other: "Vector") -> "Vector":
        self._check_len(other)
        return Vector(a + b for a, b in zip(self, other))

    def __sub__(self, other: "Vector") -> "Vector":
        self._check_len(other)
        return Vector(a - b for a, b in zip(self, other))

    def __neg__(self) -> "Vector":
        return Vector(-a for a in self)

    def __mul__(self, scalar: Scalar) -> "Vector":
        s = rational(scalar)
        return Vector(a * s for a in self)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Vector([{', '.join(pretty_rational(e) for e in self)}])"

    def _check_len(self, other: "Vector") -> None:
        if len(self) != len(other):
            raise ValueError(f"length mismatch: {len(self)} vs {len(other)}")

    def dot(self, other: "Vector") -> Fraction:
        self._check_len(other)
        return sum((a * b for a, b in zip(self, other)), Fraction(0))

    def sum(self) -> Fraction:
        return sum(self.entries, Fraction(0))

    def max(self) -> Fraction:
        return max(self.entries)

    def min(self) -> Fraction:
        return min(self.entries)

    def concat(self, other: "Vector") -> "Vector":
        return Vector(self.entries + other.entries)

    def is_probability(self) -> bool:
        return all(e >= 0 for e in self.entries) and self.sum() == 1

    def normalized(self) -> "Vector":
        """Scale so entries sum to 1 (e.g. action counts -> mixed strategy)."""
        total = self.sum()
        if total <= 0:
            raise ValueError("cannot normalize a vector with nonpositive sum")
        return Vector(e / total for e in self.entries)

    def to_strings(self) -> list[str]:
        return [format_rational(e) for e in self.entries]

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> "Vector":
        return cls(items)

    @classmethod
    def zero(cls, n: int) -> "Vector":
        return cls([0] * n)

    @classmethod
    def ones(cls, n: int) -> "Vector":
        return cls([1] * n)


class Matrix:
    """Immutable rectangular matrix of exact rationals (row-major)."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable[Scalar]]):
        self.rows: tuple[tuple[Fraction, ...], ...] = tuple(
            tuple(rational(e) for e in row) for row in rows
        )
        if not self.rows or not self.rows[0]:
            raise ValueError("matrix must be nonempty")
        width = len(self.rows[0])
        if any(len(r) != width for r in self.rows):
            raise ValueError("matrix rows must all have the same length")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Matrix):
            return self.rows == other.rows
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.rows)

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_shape(other)
        return Matrix(
            (a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.rows, other.rows)
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_shape(other)
        return Matrix(
            (a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.rows, other.rows)
        )

    def __neg__(self) -> "Matrix":
        return Matrix((-a for a in row) for row in self.rows)

    def __mul__(self, scalar: Scalar) -> "Matrix":
        s = rational(scalar)
        return Matrix((a * s for a in row) for row in self.rows)

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix | Vector") -> "Matrix | Vector":
        if isinstance(other, Vector):
            if self.ncols != len(other):
                raise ValueError(
                    f"dimension mismatch: {self.shape} @ vector of length {len(other)}"
                )
            return Vector(
                sum((a * b for a, b in zip(row, other)), Fraction(0))
                for row in self.rows
            )
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise ValueError(f"dimension mismatch: {self.shape} @ {other.shape}")
            cols = other.transpose().rows
            return Matrix(
                (
                    sum((a * b for a, b in zip(row, col)), Fraction(0))
                    for col in cols
                )
                for row in self.rows
            )
        return NotImplemented

    def __pow__(self, n: int) -> "Matrix":
        if self.nrows != self.ncols or n < 0:
            raise ValueError("matrix power needs a square matrix and n >= 0")
        result = Matrix.identity(self.nrows)
        for _ in range(n):
            result = result @ self
        return result

    def __repr__(self) -> str:
        body = "; ".join(
            "[" + ", ".join(pretty_rational(e) for e in row) + "]" for row in self.rows
        )
        return f"Matrix({body})"

    def _check_shape(self, other: "Matrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")

    def row(self, i: int) -> Vector:
        return Vector(self.rows[i])

    def column(self, j: int) -> Vector:
        return Vector(row[j] for row in self.rows)

    def transpose(self) -> "Matrix":
        return Matrix(zip(*self.rows))

    def is_symmetric(self) -> bool:
        return self.nrows == self.ncols and self == self.transpose()

    def is_skew_symmetric(self) -> bool:
        return self.nrows == self.ncols and self.transpose() == -self

    def max_entry(self) -> Fraction:
        return max(e for row in self.rows for e in row)

    def min_entry(self) -> Fraction:
        return min(e for row in self.rows for e in row)

    def to_rows(self) -> list[list[str]]:
        return [[format_rational(e) for e in row] for row in self.rows]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[Scalar]]) -> "Matrix":
        return cls(rows)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "Matrix":
        return cls([[0] * ncols for _ in range(nrows)])

    @classmethod
    def block(cls, grid: Sequence[Sequence["Matrix"]]) -> "Matrix":
        """Assemble a block matrix from a grid of matrices."""
        rows: list[list[Fraction]] = []
        for block_row in grid:
            heights = {b.nrows for b in block_row}
            if len(heights) != 1:
                raise ValueError("blocks in a row must share their height")
            for r in range(heights.pop()):
                rows.append([e for b in block_row for e in b.rows[r]])
        return cls(rows)


def bvec(k: int) -> Vector:
    """Quadratic basis vector [k^2, k, 1] for a nonnegative integer k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return Vector([k * k, k, 1])


def cmat() -> Matrix:
    """Index-shift matrix: cmat() @ bvec(k) == bvec(k + 1)."""
    return Matrix([[1, 2, 1], [0, 1, 1], [0, 0, 1]])


def duality_gap(a: Matrix, x: Vector, y: Vector) -> Fraction:
    """Exact duality gap of mixed strategies (x, y): max(A y) - min(x^T A).

    Zero exactly when (x, y) is a Nash equilibrium of the zero-sum game A.
    """
    if a.nrows != len(x) or a.ncols != len(y):
        raise ValueError(
            f"dimension mismatch: {a.shape} game with strategies "
            f"{len(x)} x {len(y)}"
        )
    if not x.is_probability() or not y.is_probability():
        raise ValueError("strategies must be probability vectors (exact)")
    best_row = (a @ y).max()
    best_col = min(x.dot(a.column(j)) for j in range(a.ncols))
    return best_row - best_col


def sym_gap(a: Matrix, x: Vector) -> Fraction:
    """Duality gap 2 * max(A x) for a skew-symmetric game played symmetrically."""
    if not a.is_skew_symmetric():
        raise ValueError("sym_gap requires a skew-symmetric matrix")
    if not x.is_probability():
        raise ValueError("strategy must be a probability vector (exact)")
    return 2 * (a @ x).max()


class LinearSolution:
    """Exact solution set {particular + span(nullspace)} of A u = b."""

    __slots__ = ("particular", "nullspace", "rank")

    def __init__(self, particular: Vector, nullspace: list[Vector], rank: int):
        self.particular = particular
        self.nullspace = nullspace
        self.rank = rank

    def contains(self, candidate: Vector, matrix: Matrix, rhs: Vector) -> bool:
        """Membership test by residual: A @ candidate == b exactly."""
        return matrix @ candidate == rhs


def solve_linear_system(a: Matrix, b: Vector) -> LinearSolution | None:
    """Solve A u = b exactly by Gauss-Jordan elimination over the rationals.

    Returns the particular solution (free variables set to zero) plus a
    nullspace basis, or None when the system is inconsistent.  Pivots are
    chosen as the first nonzero entry in each column; with exact
    arithmetic any nonzero pivot is as good as another.
    """
    if a.nrows != len(b):
        raise ValueError("right-hand side length must match the row count")
    m, n = a.shape
    rows = [list(row) + [rhs] for row, rhs in zip(a.rows, b)]
    pivot_cols: list[int] = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [e * inv for e in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [e - f * p for e, p in zip(rows[i], rows[r])]
        pivot_cols.append(c)
        r += 1
        if r == m:
            break
    # Inconsistency shows up as a zero row with nonzero right-hand side.
    for i in range(r, m):
        if rows[i][n] != 0:
            return None
    free_cols = [c for c in range(n) if c not in pivot_cols]
    particular = [Fraction(0)] * n
    for i, c in enumerate(pivot_cols):
        particular[c] = rows[i][n]
    basis: list[Vector] = []
    for fc in free_cols:
        direction = [Fraction(0)] * n
        direction[fc] = Fraction(1)
        for i, c in enumerate(pivot_cols):
            direction[c] = -rows[i][fc]
        basis.append(Vector(direction))
    return LinearSolution(Vector(particular), basis, rank=len(pivot_cols))


def matrix_to_json(a: Matrix) -> dict:
    """Game JSON form: {"rows": N, "cols": M, "entries": [["p/q", ...], ...]}."""
    return {"rows": a.nrows, "cols": a.ncols, "entries": a.to_rows()}


def matrix_from_json(obj: dict) -> Matrix:
    if not isinstance(obj, dict) or "entries" not in obj:
        raise ValueError('expected {"rows": N, "cols": M, "entries": [...]}')
    m = Matrix(obj["entries"])
    if "rows" in obj and obj["rows"] != m.nrows:
        raise ValueError(f'declared rows {obj["rows"]} != actual {m.nrows}')
    if "cols" in obj and obj["cols"] != m.ncols:
        raise ValueError(f'declared cols {obj["cols"]} != actual {m.ncols}')
    return m
