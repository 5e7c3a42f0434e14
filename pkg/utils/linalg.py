from __future__ import annotations

from typing import Iterable, Optional, Sequence

import logging
from fractions import Fraction
from dataclasses import dataclass

from .tools import Vector, dot, norm_sq, primitive
from .errors import DimensionError, InconsistentSystem

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Matrix:
    """Dense row-major matrix of exact rationals."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError(
                f"{self.rows}x{self.cols} matrix given {len(self.entries)} entries."
            )

    @classmethod
    def from_rows(
        cls, rows: Iterable[Sequence], cols: Optional[int] = None
    ) -> Matrix:
        rows = [tuple(Fraction(_v) for _v in _row) for _row in rows]

        if cols is None:
            cols = len(rows[0]) if rows else 0

        for i, _row in enumerate(rows):
            if len(_row) != cols:
                raise DimensionError(
                    f"Row {i + 1} has {len(_row)} entries, expected {cols}."
                )

        return cls(len(rows), cols, tuple(_v for _row in rows for _v in _row))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> Matrix:
        return cls.from_rows(
            [[_col[i] for _col in columns] for i in range(rows)], cols=len(columns)
        )

    @classmethod
    def zeros(cls, rows: int, cols: int) -> Matrix:
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> Matrix:
        return cls.from_rows(
            [[Fraction(int(i == j)) for j in range(n)] for i in range(n)], cols=n
        )

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, j = key
        return self.entries[i * self.cols + j]

    def __neg__(self) -> Matrix:
        return Matrix(self.rows, self.cols, tuple(-_v for _v in self.entries))

    def __matmul__(self, other: Matrix) -> Matrix:
        if self.cols != other.rows:
            raise DimensionError(
                f"Cannot multiply {self.rows}x{self.cols} "
                f"by {other.rows}x{other.cols}."
            )

        columns = other.columns()
        return Matrix.from_rows(
            [[dot(self.row(i), _col) for _col in columns] for i in range(self.rows)],
            cols=other.cols,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def column(self, j: int) -> Vector:
        return self.entries[j :: self.cols] if self.cols else ()

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def take_rows(self, indices: Iterable[int]) -> Matrix:
        return Matrix.from_rows([self.row(i) for i in indices], cols=self.cols)

    def take_columns(self, indices: Iterable[int]) -> Matrix:
        indices = tuple(indices)
        return Matrix.from_rows(
            [[self[i, j] for j in indices] for i in range(self.rows)],
            cols=len(indices),
        )

    def stack(self, other: Matrix) -> Matrix:
        """Place ``other`` below ``self``."""
        if self.cols != other.cols:
            raise DimensionError(
                f"Cannot stack {self.cols} columns over {other.cols} columns."
            )

        entries = self.entries + other.entries
        return Matrix(self.rows + other.rows, self.cols, entries)

    def transpose(self) -> Matrix:
        return Matrix.from_rows(self.columns(), cols=self.rows)

    def apply(self, vector: Sequence[Fraction]) -> Vector:
        if len(vector) != self.cols:
            raise DimensionError(
                f"Vector of length {len(vector)} applied to {self.cols} columns."
            )

        return tuple(dot(self.row(i), vector) for i in range(self.rows))

    def is_zero(self) -> bool:
        return all(_v == 0 for _v in self.entries)


def rref(matrix: Matrix) -> tuple[Matrix, tuple[int, ...], int]:
    """Reduced row-echelon form over the rationals.

    Returns the form, the pivot columns and the rank.
    """
    rows = matrix.to_rows()
    pivots: list[int] = []
    lead = 0

    for col in range(matrix.cols):
        candidates = (r for r in range(lead, matrix.rows) if rows[r][col] != 0)
        pivot = next(candidates, None)
        if pivot is None:
            continue

        rows[lead], rows[pivot] = rows[pivot], rows[lead]
        inverse = 1 / rows[lead][col]
        rows[lead] = [_v * inverse for _v in rows[lead]]

        for r in range(matrix.rows):
            factor = rows[r][col]
            if r != lead and factor != 0:
                rows[r] = [_a - factor * _b for _a, _b in zip(rows[r], rows[lead])]

        pivots.append(col)
        lead += 1

        if lead == matrix.rows:
            break

    return Matrix.from_rows(rows, cols=matrix.cols), tuple(pivots), len(pivots)


def rank(matrix: Matrix) -> int:
    return rref(matrix)[2]


def null_space_basis(matrix: Matrix) -> Matrix:
    """Columns form a basis of {v : Mv = 0}.

    Each basis vector is a primitive integer vector whose first nonzero entry
    is positive. A trivial null space gives a matrix with no columns.
    """
    reduced, pivots, _ = rref(matrix)
    free = [j for j in range(matrix.cols) if j not in pivots]

    basis = []
    for f in free:
        vector = [Fraction(0)] * matrix.cols
        vector[f] = Fraction(1)

        for r, p in enumerate(pivots):
            vector[p] = -reduced[r, f]

        basis.append(primitive(vector, positive_lead=True))

    return Matrix.from_columns(basis, rows=matrix.cols)


def solve_linear(matrix: Matrix, rhs: Sequence[Fraction]) -> Optional[Vector]:
    """A particular solution of Mz = rhs (free variables at zero), or None."""
    if len(rhs) != matrix.rows:
        raise DimensionError(
            f"Right-hand side of length {len(rhs)} for {matrix.rows} rows."
        )

    augmented = Matrix.from_rows(
        [list(matrix.row(i)) + [rhs[i]] for i in range(matrix.rows)],
        cols=matrix.cols + 1,
    )
    reduced, pivots, _ = rref(augmented)

    if matrix.cols in pivots:
        return None

    solution = [Fraction(0)] * matrix.cols
    for r, p in enumerate(pivots):
        solution[p] = reduced[r, matrix.cols]

    return tuple(solution)


def _combine(base: Sequence[Fraction], basis: Matrix, coeffs: Sequence) -> Vector:
    shift = basis.apply(coeffs)
    return tuple(_a + _b for _a, _b in zip(base, shift))


def solve_eq_least_squares(
    model: Matrix,
    target: Sequence[Fraction],
    eq_lhs: Matrix,
    eq_rhs: Sequence[Fraction],
) -> tuple[Fraction, Vector]:
    """Minimise ||target - model z||^2 subject to eq_lhs z = eq_rhs.

    Returns the exact minimal squared residual and the minimum-norm minimiser.
    Raises InconsistentSystem when the equality system has no solution.
    """
    if model.cols != eq_lhs.cols:
        raise DimensionError(
            f"Model has {model.cols} columns, equalities have {eq_lhs.cols}."
        )

    if len(target) != model.rows:
        raise DimensionError(
            f"Target of length {len(target)} for a model with {model.rows} rows."
        )

    k = model.cols
    anchor = solve_linear(eq_lhs, eq_rhs)
    if anchor is None:
        raise InconsistentSystem("The equality constraints are inconsistent.")

    # z = anchor + N t parameterises the affine feasible set
    free = null_space_basis(eq_lhs)
    reduced_model = model @ free
    offset = tuple(_v - _w for _v, _w in zip(target, model.apply(anchor)))

    gram = reduced_model.transpose() @ reduced_model
    moment = reduced_model.transpose().apply(offset)
    coeffs = solve_linear(gram, moment)
    point = _combine(anchor, free, coeffs)

    # directions that keep both the constraints and the residual fixed
    flat = free @ null_space_basis(reduced_model)
    if flat.cols:
        gram = flat.transpose() @ flat
        shift = solve_linear(gram, flat.transpose().apply(point))
        point = tuple(_p - _s for _p, _s in zip(point, flat.apply(shift)))

    residual = tuple(_v - _w for _v, _w in zip(target, model.apply(point)))
    qstar = norm_sq(residual)
    log.debug(f"Equality least squares on {k} unknowns: residual {qstar}.")

    return qstar, point
