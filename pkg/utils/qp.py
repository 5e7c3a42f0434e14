from __future__ import annotations

from typing import TYPE_CHECKING, Optional, Sequence

import logging
from fractions import Fraction
from itertools import combinations
from dataclasses import dataclass

from .tools import Vector, dot
from .errors import EmptyPolyhedron, WorkCapExceeded, InconsistentSystem
from .linalg import solve_eq_least_squares

import config

if TYPE_CHECKING:
    from analysis.problem import ProblemInstance

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RestrictedProblem:
    instance: ProblemInstance
    support: tuple[int, ...]
    forced_active: tuple[int, ...] = ()


@dataclass(frozen=True)
class RestrictedResult:
    qstar: Fraction
    witness: Vector
    active_rows_at_witness: tuple[int, ...]


def embed(support: Sequence[int], values: Sequence[Fraction], n: int) -> Vector:
    """Place ``values`` on ``support`` inside a zero vector of length ``n``."""
    point = [Fraction(0)] * n
    for i, _value in zip(support, values):
        point[i] = _value

    return tuple(point)


def min_residual(problem: RestrictedProblem) -> RestrictedResult:
    """Minimise ||y - A_S z||^2 over B_S z <= b with rows I held at equality.

    Every set W of inequality rows containing I is tried as an equality set;
    the candidates that respect the remaining rows are compared by residual,
    ties going to the lexicographically smallest W.
    """
    inst = problem.instance
    forced = tuple(sorted(problem.forced_active))
    model = inst.A.take_columns(problem.support)
    rows = inst.B.take_columns(problem.support)

    free = [j for j in range(inst.l) if j not in forced]
    if len(free) > config.MAX_INEQUALITY_ROWS:
        raise WorkCapExceeded(
            f"{len(free)} free inequality rows exceed the cap of "
            f"{config.MAX_INEQUALITY_ROWS}."
        )

    best: Optional[tuple[tuple[Fraction, tuple[int, ...]], Vector]] = None

    for size in range(len(free) + 1):
        for _extra in combinations(free, size):
            active = tuple(sorted(forced + _extra))

            try:
                qstar, z = solve_eq_least_squares(
                    model,
                    inst.y,
                    rows.take_rows(active),
                    [inst.b[j] for j in active],
                )

            except InconsistentSystem:
                continue

            if any(dot(rows.row(j), z) > inst.b[j] for j in range(inst.l)):
                continue

            key = (qstar, active)
            if best is None or key < best[0]:
                best = (key, z)

    if best is None:
        raise EmptyPolyhedron(
            f"No point on support {list(problem.support)} satisfies the "
            f"inequalities with rows {list(forced)} active."
        )

    (qstar, _), witness = best
    active_rows = tuple(
        j for j in range(inst.l) if dot(rows.row(j), witness) == inst.b[j]
    )
    return RestrictedResult(qstar, witness, active_rows)


def support_feasible(
    inst: ProblemInstance, support: Sequence[int]
) -> tuple[bool, Optional[Vector]]:
    """Whether some feasible point is supported within ``support``.

    The witness is the restricted minimiser embedded into R^n.
    """
    try:
        result = min_residual(RestrictedProblem(inst, tuple(support)))

    except EmptyPolyhedron:
        log.debug(f"Support {list(support)}: empty polyhedron.")
        return False, None

    feasible = result.qstar <= inst.epsilon_sq
    log.debug(f"Support {list(support)}: qstar {result.qstar}, feasible {feasible}.")

    if not feasible:
        return False, None

    return True, embed(support, result.witness, inst.n)


def region_nonempty(
    inst: ProblemInstance,
    support: Sequence[int],
    forced_active: Sequence[int],
) -> tuple[bool, Optional[Vector]]:
    """Whether the ε-ball meets the polyhedron with rows I held at equality."""
    try:
        result = min_residual(
            RestrictedProblem(inst, tuple(support), tuple(forced_active))
        )

    except EmptyPolyhedron:
        return False, None

    if result.qstar > inst.epsilon_sq:
        return False, None

    return True, embed(support, result.witness, inst.n)
