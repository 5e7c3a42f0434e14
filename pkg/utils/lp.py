from __future__ import annotations

from typing import Iterable, Optional, Sequence

import enum
import logging
from fractions import Fraction
from dataclasses import dataclass

from .tools import Vector, dot, primitive
from .errors import DimensionError, VerificationFailure
from .linalg import Matrix, null_space_basis

log = logging.getLogger(__name__)


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LPProblem:
    """max objective·x  s.t.  ineq_lhs x <= ineq_rhs, eq_lhs x = eq_rhs, x free."""

    objective: Vector
    ineq_lhs: Matrix
    ineq_rhs: Vector
    eq_lhs: Matrix
    eq_rhs: Vector

    def __post_init__(self):
        k = len(self.objective)
        if self.ineq_lhs.cols != k or self.eq_lhs.cols != k:
            raise DimensionError(
                f"Objective has {k} entries, constraints have "
                f"{self.ineq_lhs.cols} and {self.eq_lhs.cols} columns."
            )

        if len(self.ineq_rhs) != self.ineq_lhs.rows:
            raise DimensionError("Inequality right-hand side length mismatch.")

        if len(self.eq_rhs) != self.eq_lhs.rows:
            raise DimensionError("Equality right-hand side length mismatch.")

    @classmethod
    def build(
        cls,
        objective: Sequence,
        ineq_lhs: Optional[Matrix] = None,
        ineq_rhs: Sequence = (),
        eq_lhs: Optional[Matrix] = None,
        eq_rhs: Sequence = (),
    ) -> LPProblem:
        k = len(objective)
        return cls(
            objective=tuple(Fraction(_c) for _c in objective),
            ineq_lhs=ineq_lhs if ineq_lhs is not None else Matrix.zeros(0, k),
            ineq_rhs=tuple(Fraction(_v) for _v in ineq_rhs),
            eq_lhs=eq_lhs if eq_lhs is not None else Matrix.zeros(0, k),
            eq_rhs=tuple(Fraction(_v) for _v in eq_rhs),
        )


@dataclass(frozen=True)
class LPOutcome:
    status: LPStatus
    value: Optional[Fraction] = None
    point: Optional[Vector] = None
    ray: Optional[Vector] = None


def _pivot(tableau: list[list[Fraction]], row: int, col: int) -> None:
    inverse = 1 / tableau[row][col]
    tableau[row] = [_v * inverse for _v in tableau[row]]

    for r, _line in enumerate(tableau):
        factor = _line[col]
        if r != row and factor != 0:
            tableau[r] = [_a - factor * _b for _a, _b in zip(_line, tableau[row])]


def _run_simplex(
    tableau: list[list[Fraction]],
    basis: list[int],
    cost: Sequence[Fraction],
    allowed: Iterable[int],
) -> Optional[int]:
    """Bland's rule primal simplex maximising cost·z over the tableau.

    Returns None at an optimum, or the entering column that proved the
    problem unbounded.
    """
    allowed = sorted(allowed)

    while True:
        in_basis = set(basis)
        entering = None

        for j in allowed:
            if j in in_basis:
                continue

            reduced = cost[j] - sum(
                (cost[_b] * tableau[i][j] for i, _b in enumerate(basis)), Fraction(0)
            )
            if reduced > 0:
                entering = j
                break

        if entering is None:
            return None

        ratios = [
            (tableau[i][-1] / tableau[i][entering], basis[i], i)
            for i in range(len(basis))
            if tableau[i][entering] > 0
        ]
        if not ratios:
            return entering

        _, _, leaving = min(ratios)
        _pivot(tableau, leaving, entering)
        basis[leaving] = entering


def lp_max(problem: LPProblem) -> LPOutcome:
    """Solve the LP exactly with a two-phase simplex.

    Free variables are split as x = u - w; every inequality gets a slack and
    every row an artificial variable for phase one.
    """
    k = len(problem.objective)
    p = problem.ineq_lhs.rows
    width = 2 * k + p
    zero, one = Fraction(0), Fraction(1)

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []

    for i in range(p):
        g = problem.ineq_lhs.row(i)
        slack = [one if j == i else zero for j in range(p)]
        rows.append(list(g) + [-_v for _v in g] + slack)
        rhs.append(problem.ineq_rhs[i])

    for i in range(problem.eq_lhs.rows):
        e = problem.eq_lhs.row(i)
        rows.append(list(e) + [-_v for _v in e] + [zero] * p)
        rhs.append(problem.eq_rhs[i])

    for i, _value in enumerate(rhs):
        if _value < 0:
            rows[i] = [-_v for _v in rows[i]]
            rhs[i] = -_value

    height = len(rows)
    tableau = [
        rows[i] + [one if j == i else zero for j in range(height)] + [rhs[i]]
        for i in range(height)
    ]
    basis = [width + i for i in range(height)]

    phase_one = [zero] * width + [-one] * height
    if _run_simplex(tableau, basis, phase_one, range(width + height)) is not None:
        raise VerificationFailure("Phase one of the simplex reported unboundedness.")

    if any(tableau[i][-1] != 0 for i, _b in enumerate(basis) if _b >= width):
        log.debug("LP infeasible after phase one.")
        return LPOutcome(LPStatus.INFEASIBLE)

    i = 0
    while i < len(basis):
        if basis[i] >= width:
            col = next((j for j in range(width) if tableau[i][j] != 0), None)

            if col is None:
                # redundant equality
                del tableau[i]
                del basis[i]
                continue

            _pivot(tableau, i, col)
            basis[i] = col

        i += 1

    cost = (
        list(problem.objective)
        + [-_c for _c in problem.objective]
        + [zero] * (p + height)
    )
    entering = _run_simplex(tableau, basis, cost, range(width))

    if entering is not None:
        direction = [zero] * width
        direction[entering] = one
        for r, _b in enumerate(basis):
            direction[_b] = -tableau[r][entering]

        ray = tuple(direction[j] - direction[k + j] for j in range(k))
        log.debug(f"LP unbounded along {ray}.")
        return LPOutcome(LPStatus.UNBOUNDED, ray=ray)

    values = [zero] * width
    for r, _b in enumerate(basis):
        values[_b] = tableau[r][-1]

    point = tuple(values[j] - values[k + j] for j in range(k))
    value = dot(problem.objective, point)
    return LPOutcome(LPStatus.OPTIMAL, value=value, point=point)


def cone_is_trivial(cone: Matrix) -> tuple[bool, Optional[Vector]]:
    """Decide whether {t : Ct <= 0} = {0}.

    Maximises each of ±t_j over the cone cut by the box -1 <= t <= 1; the
    witness is taken from the first (coordinate, sign) pair with a positive
    optimum.
    """
    k = cone.cols
    box = Matrix.identity(k).stack(-Matrix.identity(k))
    lhs = cone.stack(box)
    rhs = (Fraction(0),) * cone.rows + (Fraction(1),) * (2 * k)

    for j in range(k):
        for _sign in (1, -1):
            objective = [Fraction(_sign if i == j else 0) for i in range(k)]
            outcome = lp_max(LPProblem.build(objective, lhs, rhs))

            if outcome.value > 0:
                return False, primitive(outcome.point)

    return True, None


def strict_cone_feasible(
    strict: Matrix, kernel: Matrix
) -> tuple[bool, Optional[Vector]]:
    """Decide whether some nonzero d has strict·d > 0 and kernel·d = 0.

    By homogeneity the strict system is replaced with strict·d >= 1.
    """
    if strict.cols != kernel.cols:
        raise DimensionError(
            f"Strict rows have {strict.cols} columns, kernel rows {kernel.cols}."
        )

    if strict.rows == 0:
        basis = null_space_basis(kernel)
        if basis.cols == 0:
            return False, None

        return True, basis.column(0)

    outcome = lp_max(
        LPProblem.build(
            [0] * strict.cols,
            -strict,
            [-1] * strict.rows,
            kernel,
            [0] * kernel.rows,
        )
    )

    if outcome.status is LPStatus.INFEASIBLE:
        return False, None

    return True, primitive(outcome.point)


def _nonkernel_witness(
    strict: Matrix, model: Matrix, zeroed: Sequence[int]
) -> Optional[Vector]:
    """A d with strict·d >= 1 and model·d != 0, zero on the ``zeroed`` rows."""
    k = strict.cols
    lhs, rhs = -strict, [-1] * strict.rows
    eq, eq_rhs = model.take_rows(zeroed), [0] * len(zeroed)

    anchor = lp_max(LPProblem.build([0] * k, lhs, rhs, eq, eq_rhs))
    if anchor.status is LPStatus.INFEASIBLE:
        return None

    for i in range(model.rows):
        row = model.row(i)
        if i in zeroed or all(_v == 0 for _v in row):
            continue

        for _sign in (1, -1):
            objective = tuple(_sign * _v for _v in row)
            outcome = lp_max(LPProblem.build(objective, lhs, rhs, eq, eq_rhs))

            if outcome.status is LPStatus.OPTIMAL and outcome.value > 0:
                return primitive(outcome.point)

            if outcome.status is LPStatus.UNBOUNDED:
                gain = dot(objective, outcome.ray)
                step = max(Fraction(0), -dot(objective, anchor.point) / gain) + 1
                point = [_a + step * _r for _a, _r in zip(anchor.point, outcome.ray)]
                return primitive(point)

    return None


def exists_nonkernel_point(
    strict: Matrix, model: Matrix
) -> tuple[bool, Optional[Vector]]:
    """Decide whether some d has strict·d > 0 and model·d != 0.

    The witness keeps as many rows of model·d at zero as it can, trying the
    last rows first, so the image it moves along is as sparse as possible.
    """
    if strict.cols != model.cols:
        raise DimensionError(
            f"Strict rows have {strict.cols} columns, model rows {model.cols}."
        )

    witness = _nonkernel_witness(strict, model, ())
    if witness is None:
        return False, None

    zeroed: tuple[int, ...] = ()
    for i in reversed(range(model.rows)):
        candidate = _nonkernel_witness(strict, model, tuple(sorted(zeroed + (i,))))

        if candidate is not None:
            zeroed, witness = tuple(sorted(zeroed + (i,))), candidate

    log.debug(f"Nonkernel witness {witness} with model rows {zeroed} at zero.")
    return True, witness
