from __future__ import annotations

from typing import Any, Callable, Sequence

import json
import logging
from fractions import Fraction
from dataclasses import dataclass

from utils.tools import (
    Vector,
    dot,
    norm_sq,
    support_of,
    parse_rational,
    format_rational,
)
from utils.errors import (
    ParseError,
    UsageError,
    DimensionError,
    InvalidEpsilon,
    InfeasiblePoint,
)
from utils.linalg import Matrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProblemInstance:
    """min ||x||_0  s.t.  ||y - Ax||_2 <= epsilon,  Bx <= b."""

    A: Matrix
    B: Matrix
    y: Vector
    b: Vector
    epsilon: Fraction

    def __post_init__(self):
        if self.A.rows < 1 or self.A.cols < 1:
            raise DimensionError(f"A must be at least 1x1, got {self.A.shape}.")

        if self.B.cols != self.A.cols:
            raise DimensionError(
                f"B has {self.B.cols} columns but A has {self.A.cols}."
            )

        if len(self.y) != self.A.rows:
            raise DimensionError(f"y has {len(self.y)} entries, expected {self.m}.")

        if len(self.b) != self.B.rows:
            raise DimensionError(f"b has {len(self.b)} entries, expected {self.l}.")

        if self.epsilon < 0:
            raise InvalidEpsilon(f"epsilon must be nonnegative, got {self.epsilon}.")

    @property
    def m(self) -> int:
        return self.A.rows

    @property
    def n(self) -> int:
        return self.A.cols

    @property
    def l(self) -> int:  # noqa: E743
        return self.B.rows

    @property
    def epsilon_sq(self) -> Fraction:
        return self.epsilon * self.epsilon

    def residual(self, x: Sequence[Fraction]) -> Vector:
        return tuple(_y - _ax for _y, _ax in zip(self.y, self.A.apply(x)))


@dataclass(frozen=True)
class SolutionRecord:
    x: Vector
    support: tuple[int, ...]
    active_set: tuple[int, ...]
    inactive_set: tuple[int, ...]
    residual_sq: Fraction
    strict_interior: bool


def _count(data: dict, key: str, default: Any = None) -> int:
    value = data.get(key, default)
    if value is None:
        raise ParseError(f"Missing key {key!r}.")

    try:
        return int(str(value))

    except ValueError:
        raise ParseError(f"{key!r} must be an integer, got {value!r}.") from None


def _vector(data: dict, key: str, length: int, required: bool = True) -> Vector:
    values = data.get(key)
    if values is None:
        if required or length:
            raise ParseError(f"Missing key {key!r}.")

        return ()

    if not isinstance(values, list):
        raise ParseError(f"{key!r} must be an array.")

    if len(values) != length:
        raise DimensionError(
            f"{key!r} has {len(values)} entries, expected {length}."
        )

    return tuple(parse_rational(_v) for _v in values)


def _matrix(
    data: dict, key: str, rows: int, cols: int, required: bool = True
) -> Matrix:
    values = data.get(key)
    if values is None:
        if required or rows:
            raise ParseError(f"Missing key {key!r}.")

        return Matrix.zeros(0, cols)

    if not isinstance(values, list) or any(type(_r) is not list for _r in values):
        raise ParseError(f"{key!r} must be an array of rows.")

    if len(values) != rows:
        raise DimensionError(f"{key!r} has {len(values)} rows, expected {rows}.")

    for i, _row in enumerate(values):
        if len(_row) != cols:
            raise DimensionError(
                f"Row {i + 1} of {key!r} has {len(_row)} entries, expected {cols}."
            )

    return Matrix.from_rows(
        [[parse_rational(_v) for _v in _row] for _row in values], cols=cols
    )


def parse_instance(text: str) -> ProblemInstance:
    """Parse an instance document.

    Numbers may be given as strings ("-2.5", "1/10") or as JSON numbers; both
    are read from their decimal text, never through a float.
    """
    try:
        data = json.loads(text, parse_float=str, parse_int=str)

    except json.JSONDecodeError as e:
        raise ParseError(f"Invalid instance document: {e}.") from None

    if not isinstance(data, dict):
        raise ParseError("The instance document must be a JSON object.")

    m, n = _count(data, "m"), _count(data, "n")
    l = _count(data, "l", 0)  # noqa: E741
    if m < 1 or n < 1 or l < 0:
        raise DimensionError(f"Need m >= 1, n >= 1, l >= 0; got {m}, {n}, {l}.")

    if "epsilon" not in data:
        raise ParseError("Missing key 'epsilon'.")

    instance = ProblemInstance(
        A=_matrix(data, "A", m, n),
        B=_matrix(data, "B", l, n, required=False),
        y=_vector(data, "y", m),
        b=_vector(data, "b", l, required=False),
        epsilon=parse_rational(data["epsilon"]),
    )
    log.debug(f"Parsed instance with m={m}, n={n}, l={l}.")

    return instance


def load_instance(path: str) -> ProblemInstance:
    with open(path, encoding="utf-8") as f:
        return parse_instance(f.read())


def serialize_instance(inst: ProblemInstance) -> str:
    def rows(matrix: Matrix) -> list[list[str]]:
        return [[format_rational(_v) for _v in _row] for _row in matrix.to_rows()]

    document = {
        "m": inst.m,
        "n": inst.n,
        "l": inst.l,
        "A": rows(inst.A),
        "B": rows(inst.B),
        "y": [format_rational(_v) for _v in inst.y],
        "b": [format_rational(_v) for _v in inst.b],
        "epsilon": format_rational(inst.epsilon),
    }
    return json.dumps(document, indent=2) + "\n"


def is_feasible(inst: ProblemInstance, x: Sequence[Fraction]) -> bool:
    if len(x) != inst.n:
        raise DimensionError(f"Point has {len(x)} entries, expected {inst.n}.")

    if norm_sq(inst.residual(x)) > inst.epsilon_sq:
        return False

    return all(dot(inst.B.row(j), x) <= inst.b[j] for j in range(inst.l))


def make_record(inst: ProblemInstance, x: Sequence[Fraction]) -> SolutionRecord:
    x = tuple(Fraction(_v) for _v in x)
    if not is_feasible(inst, x):
        raise InfeasiblePoint("The point is not feasible for this instance.")

    active = tuple(j for j in range(inst.l) if dot(inst.B.row(j), x) == inst.b[j])
    residual_sq = norm_sq(inst.residual(x))

    return SolutionRecord(
        x=x,
        support=support_of(x),
        active_set=active,
        inactive_set=tuple(j for j in range(inst.l) if j not in active),
        residual_sq=residual_sq,
        strict_interior=residual_sq < inst.epsilon_sq,
    )


def _nonnegative(n: int) -> list[list[int]]:
    return [[-int(i == j) for j in range(n)] for i in range(n)]


def _monotone(n: int) -> list[list[int]]:
    return [
        [1 if j == i else -1 if j == i + 1 else 0 for j in range(n)]
        for i in range(n - 1)
    ]


STRUCTURES: dict[str, Callable[[int], list[list[int]]]] = {
    "nonnegative": _nonnegative,
    "monotone": _monotone,
}


def impose_structure(inst: ProblemInstance, model: str) -> ProblemInstance:
    """Append the homogeneous rows of a structured sparsity model to Bx <= b.

    ``nonnegative`` adds -x <= 0 and ``monotone`` adds x_i - x_{i+1} <= 0.
    """
    try:
        rows = STRUCTURES[model](inst.n)

    except KeyError:
        raise UsageError(
            f"Unknown structure {model!r}; choose from {', '.join(STRUCTURES)}."
        ) from None

    extra = Matrix.from_rows(rows, cols=inst.n)
    return ProblemInstance(
        A=inst.A,
        B=inst.B.stack(extra),
        y=inst.y,
        b=inst.b + (Fraction(0),) * extra.rows,
        epsilon=inst.epsilon,
    )
