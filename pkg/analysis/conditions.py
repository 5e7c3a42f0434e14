from __future__ import annotations

from typing import Optional

import enum
import math
import logging
from fractions import Fraction
from itertools import combinations
from dataclasses import field, dataclass

from utils.lp import cone_is_trivial, strict_cone_feasible, exists_nonkernel_point
from utils.qp import embed
from utils.caps import SUBSETS, WorkBudget
from utils.tools import Vector, primitive
from utils.errors import NotSparsestPoint, VerificationFailure
from utils.linalg import Matrix, rank, null_space_basis

from .problem import SolutionRecord, ProblemInstance, make_record
from .enumerator import EnumerationResult

log = logging.getLogger(__name__)

SAME_SUPPORT_CONDITIONS = ("C1", "C2", "C3", "C4")
INJECTIVE_CONDITIONS = ("D1", "D2", "D3", "D4", "D5")
CONDITIONS = SAME_SUPPORT_CONDITIONS + INJECTIVE_CONDITIONS

# conditions whose families move the residual and so need ||e*|| < epsilon
NEEDS_STRICT_INTERIOR = ("C2", "C3", "C4", "D3", "D4", "D5")

MIRRORED_PAIRS = (("C3", "C4"), ("D1", "D2"), ("D4", "D5"))


class Status(enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class ConditionContext:
    """Submatrices of a feasible point's support, split by active rows."""

    instance: ProblemInstance
    record: SolutionRecord
    A_S: Matrix
    B_S: Matrix
    B_IS: Matrix
    B_IbarS: Matrix
    Mstar: Matrix
    mstar_nullity: int

    @property
    def x_S(self) -> Vector:
        return tuple(self.record.x[i] for i in self.record.support)

    @property
    def slack(self) -> Vector:
        """b_j - (B x)_j over the inactive rows, all positive."""
        moved = self.B_IbarS.apply(self.x_S)
        inactive = self.record.inactive_set
        return tuple(self.instance.b[j] - _v for j, _v in zip(inactive, moved))

    def embed(self, direction: Vector) -> Vector:
        return embed(self.record.support, direction, self.instance.n)


@dataclass(frozen=True)
class ConditionOutcome:
    label: str
    status: Status
    directions: tuple[Vector, ...] = ()
    notes: str = ""

    @property
    def witness_direction(self) -> Optional[Vector]:
        return self.directions[0] if self.directions else None


@dataclass(frozen=True)
class MultiplicityReport:
    outcomes: dict[str, ConditionOutcome] = field(compare=False)
    strict_interior: bool

    def holding(self) -> list[ConditionOutcome]:
        return [_o for _o in self.outcomes.values() if _o.status is Status.HOLDS]


@dataclass(frozen=True)
class BoundednessReport:
    E1: bool
    E2: bool
    E3: bool
    spark: int
    empirical_gamma: Optional[Fraction] = None
    cone_failure: Optional[tuple[tuple[int, ...], Vector]] = None
    dependent_subset: Optional[tuple[int, ...]] = None

    @property
    def bounded_certified(self) -> bool:
        return self.E1 or self.E2 or self.E3

    @property
    def verdict(self) -> str:
        return "bounded" if self.bounded_certified else "boundedness undetermined"


def build_context(inst: ProblemInstance, record: SolutionRecord) -> ConditionContext:
    support = record.support
    A_S = inst.A.take_columns(support)
    B_S = inst.B.take_columns(support)
    B_IS = B_S.take_rows(record.active_set)
    Mstar = A_S.stack(B_IS)

    return ConditionContext(
        instance=inst,
        record=record,
        A_S=A_S,
        B_S=B_S,
        B_IS=B_IS,
        B_IbarS=B_S.take_rows(record.inactive_set),
        Mstar=Mstar,
        mstar_nullity=len(support) - rank(Mstar),
    )


def check_necessary(ctx: ConditionContext) -> tuple[bool, Optional[Vector]]:
    """Whether [A_S; B_S] has full column rank.

    The violation direction, over S, is a common null vector of A_S and B_S.
    Stacking the rows as [A_S; B_IbarS; B_IS], [A_S; B_IS; B_IbarS] or
    A_S, B_IS and B_IbarS separately gives the same null space, so the
    one test decides every stacked form.
    """
    basis = null_space_basis(ctx.A_S.stack(ctx.B_S))
    if basis.cols == 0:
        return True, None

    return False, basis.column(0)


def check_mstar(ctx: ConditionContext) -> bool:
    return ctx.mstar_nullity == 0


def sparsify(inst: ProblemInstance, record: SolutionRecord) -> SolutionRecord:
    """Remove support entries along common null vectors of A_S and B_S.

    Each step keeps Ax and Bx unchanged and zeroes at least one entry, so
    the result is feasible and satisfies the stacked rank test.
    """
    ctx = build_context(inst, record)

    while True:
        holds, delta = check_necessary(ctx)
        if holds:
            return ctx.record

        support = ctx.record.support
        pos = next(k for k, _v in enumerate(delta) if _v != 0)
        ratio = ctx.record.x[support[pos]] / delta[pos]

        x = list(ctx.record.x)
        for k, i in enumerate(support):
            x[i] -= ratio * delta[k]

        shrunk = make_record(inst, x)
        if len(shrunk.support) >= len(support):
            raise VerificationFailure("Sparsifying step did not shrink the support.")

        log.debug(f"Support shrunk from {len(support)} to {len(shrunk.support)}.")
        ctx = build_context(inst, shrunk)


def _outcome(
    label: str, found: bool, direction: Optional[Vector], ctx: ConditionContext
) -> ConditionOutcome:
    if not found:
        return ConditionOutcome(label, Status.FAILS)

    return ConditionOutcome(label, Status.HOLDS, (ctx.embed(direction),))


def _first_null_vector(matrix: Matrix) -> tuple[bool, Optional[Vector]]:
    basis = null_space_basis(matrix)
    if basis.cols == 0:
        return False, None

    return True, basis.column(0)


def classify_multiplicity(
    ctx: ConditionContext, result: EnumerationResult
) -> MultiplicityReport:
    """Decide every same-support multiplicity condition at a sparsest point."""
    record = ctx.record
    if len(record.support) != result.kstar:
        raise NotSparsestPoint(
            f"The point has {len(record.support)} nonzeros; the optimal value "
            f"is {result.kstar}."
        )

    outcomes: dict[str, ConditionOutcome] = {}
    strict = record.strict_interior
    NA = Status.NOT_APPLICABLE

    if ctx.mstar_nullity == 0:
        outcomes["C1"] = ConditionOutcome("C1", NA, notes="Null(M*) = {0}")

    elif len(record.active_set) < result.max_active_cardinality:
        basis = null_space_basis(ctx.Mstar)
        outcomes["C1"] = ConditionOutcome(
            "C1",
            Status.HOLDS,
            tuple(ctx.embed(_c) for _c in basis.columns()),
            notes=f"one family per Null(M*) basis vector ({basis.cols})",
        )

    else:
        outcomes["C1"] = ConditionOutcome(
            "C1", Status.FAILS, notes="|I(x*)| is the maximum over sparsest points"
        )

    if ctx.mstar_nullity > 0:
        for _label in ("C2", "C3", "C4"):
            outcomes[_label] = ConditionOutcome(_label, NA, notes="Null(M*) != {0}")

    elif not strict:
        for _label in ("C2", "C3", "C4"):
            outcomes[_label] = ConditionOutcome(_label, NA, notes="||e*|| = epsilon")

    else:
        outcomes["C2"] = _outcome("C2", *_first_null_vector(ctx.B_S), ctx)
        outcomes["C3"] = _outcome(
            "C3", *strict_cone_feasible(ctx.B_IS, ctx.B_IbarS), ctx
        )
        outcomes["C4"] = _outcome(
            "C4", *strict_cone_feasible(-ctx.B_IS, ctx.B_IbarS), ctx
        )

    ibar_nullity = null_space_basis(ctx.B_IbarS).cols
    if ctx.mstar_nullity > 0 or ibar_nullity > 0:
        note = "Null(M*) != {0}" if ctx.mstar_nullity else "Null(B_IbarS) != {0}"
        for _label in INJECTIVE_CONDITIONS:
            outcomes[_label] = ConditionOutcome(_label, NA, notes=note)

    else:
        outcomes["D1"] = _outcome(
            "D1", *strict_cone_feasible(ctx.B_IS, ctx.A_S), ctx
        )
        outcomes["D2"] = _outcome(
            "D2", *strict_cone_feasible(-ctx.B_IS, ctx.A_S), ctx
        )

        if not strict:
            for _label in ("D3", "D4", "D5"):
                outcomes[_label] = ConditionOutcome(
                    _label, NA, notes="||e*|| = epsilon"
                )

        else:
            outcomes["D3"] = _outcome("D3", *_first_null_vector(ctx.B_IS), ctx)
            outcomes["D4"] = _outcome(
                "D4", *exists_nonkernel_point(ctx.B_IS, ctx.A_S), ctx
            )
            outcomes["D5"] = _outcome(
                "D5", *exists_nonkernel_point(-ctx.B_IS, ctx.A_S), ctx
            )

    for _left, _right in MIRRORED_PAIRS:
        if outcomes[_left].status is not outcomes[_right].status:
            raise VerificationFailure(
                f"Mirrored conditions {_left} and {_right} disagree: "
                f"{outcomes[_left].status.value} vs {outcomes[_right].status.value}."
            )

    log.debug(
        "Multiplicity: "
        + ", ".join(f"{_l}={outcomes[_l].status.value}" for _l in CONDITIONS)
    )
    return MultiplicityReport(
        outcomes={_l: outcomes[_l] for _l in CONDITIONS}, strict_interior=strict
    )


def spark(A: Matrix, budget: Optional[WorkBudget] = None) -> int:
    """Smallest number of linearly dependent columns; n + 1 if there are none."""
    budget = budget or WorkBudget.from_config()

    for size in range(1, A.cols + 1):
        budget.charge(SUBSETS, math.comb(A.cols, size))

        for _cols in combinations(range(A.cols), size):
            if rank(A.take_columns(_cols)) < size:
                return size

    return A.cols + 1


def check_boundedness(
    inst: ProblemInstance,
    kstar: int,
    budget: Optional[WorkBudget] = None,
    gamma: Optional[Fraction] = None,
) -> BoundednessReport:
    """Decide the three sufficient conditions for a bounded sparsest set.

    E1 asks that {eta : A_P eta = 0, B_P eta <= 0} = {0} for every column set
    P of size k*; E2 that every k* columns of A are independent; E3 that
    k* < spark(A).
    """
    budget = budget or WorkBudget.from_config()
    budget.charge(SUBSETS, math.comb(inst.n, kstar))

    value = spark(inst.A, budget)

    dependent: Optional[tuple[int, ...]] = None
    cone_failure: Optional[tuple[tuple[int, ...], Vector]] = None

    for _cols in combinations(range(inst.n), kstar):
        A_P = inst.A.take_columns(_cols)
        kernel = null_space_basis(A_P)
        if kernel.cols == 0:
            continue

        if dependent is None:
            dependent = _cols

        if cone_failure is None:
            cone = inst.B.take_columns(_cols) @ kernel
            trivial, t = cone_is_trivial(cone)
            if not trivial:
                eta = primitive(kernel.apply(t))
                cone_failure = (_cols, embed(_cols, eta, inst.n))

        if cone_failure is not None:
            break

    report = BoundednessReport(
        E1=cone_failure is None,
        E2=dependent is None,
        E3=kstar < value,
        spark=value,
        empirical_gamma=gamma,
        cone_failure=cone_failure,
        dependent_subset=dependent,
    )

    if report.E2 != report.E3 or (report.E2 and not report.E1):
        raise VerificationFailure(
            f"Inconsistent boundedness report: E1={report.E1}, E2={report.E2}, "
            f"E3={report.E3}."
        )

    log.debug(f"Boundedness: E1={report.E1}, E2={report.E2}, E3={report.E3}.")
    return report
