from __future__ import annotations

from typing import Optional

import math
import logging
from fractions import Fraction
from itertools import combinations
from dataclasses import field, replace, dataclass

from utils.qp import region_nonempty, support_feasible
from utils.caps import SUPPORTS, ACTIVE_SUBSETS, WorkBudget
from utils.errors import UsageError, NoSolutionWithinCap, VerificationFailure

from .problem import SolutionRecord, ProblemInstance, make_record

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnumerationResult:
    kstar: int
    optimal_supports: tuple[tuple[int, ...], ...]
    witnesses: dict[tuple[int, ...], SolutionRecord] = field(compare=False)
    max_active_cardinality: int = 0
    max_active_witness: Optional[SolutionRecord] = None
    empirical_gamma: Optional[Fraction] = None


def enumerate_sparsest(
    inst: ProblemInstance,
    kcap: Optional[int] = None,
    budget: Optional[WorkBudget] = None,
) -> EnumerationResult:
    """Find the optimal value k* and every feasible support of that size.

    Supports are scanned by size, then lexicographically; the scan stops at
    the first size with a feasible support.
    """
    kcap = inst.n if kcap is None else kcap
    if not 0 <= kcap <= inst.n:
        raise UsageError(f"kcap must lie between 0 and n = {inst.n}, got {kcap}.")

    budget = budget or WorkBudget.from_config()

    for k in range(kcap + 1):
        budget.charge(SUPPORTS, math.comb(inst.n, k) * 2**inst.l)

        witnesses: dict[tuple[int, ...], SolutionRecord] = {}
        for _support in combinations(range(inst.n), k):
            feasible, point = support_feasible(inst, _support)
            if not feasible:
                continue

            record = make_record(inst, point)
            # a smaller support would have been found at an earlier k
            if record.support != _support:
                raise VerificationFailure(
                    f"Witness for support {list(_support)} has support "
                    f"{list(record.support)}."
                )

            witnesses[_support] = record

        if witnesses:
            log.debug(f"Optimal value {k} with {len(witnesses)} supports.")
            result = EnumerationResult(
                kstar=k,
                optimal_supports=tuple(sorted(witnesses)),
                witnesses=witnesses,
            )
            count, record = max_active_cardinality(inst, result, budget)

            return replace(
                result,
                max_active_cardinality=count,
                max_active_witness=record,
                empirical_gamma=empirical_gamma(result),
            )

    raise NoSolutionWithinCap(
        f"No feasible support of size at most {kcap}; raise --kcap or check "
        "that the feasible set is nonempty."
    )


def max_active_cardinality(
    inst: ProblemInstance,
    result: EnumerationResult,
    budget: Optional[WorkBudget] = None,
) -> tuple[int, SolutionRecord]:
    """Largest |I| such that some optimal support S has a nonempty (S, I) region.

    Sizes are tried from l downwards; within a size, supports and then row
    sets are taken in lexicographic order, so the witness is deterministic.
    """
    if not result.optimal_supports:
        raise UsageError("The enumeration holds no optimal support.")

    if inst.l == 0:
        return 0, result.witnesses[result.optimal_supports[0]]

    budget = budget or WorkBudget.from_config()

    for size in range(inst.l, -1, -1):
        for _support in result.optimal_supports:
            for _active in combinations(range(inst.l), size):
                budget.charge(ACTIVE_SUBSETS)

                nonempty, point = region_nonempty(inst, _support, _active)
                if nonempty:
                    record = make_record(inst, point)
                    log.debug(
                        f"Maximum active cardinality {size} on support "
                        f"{list(_support)}."
                    )
                    return size, record

    raise VerificationFailure("No optimal support admits a nonempty region.")


def empirical_gamma(result: EnumerationResult) -> Optional[Fraction]:
    """Smallest nonzero magnitude over the enumerated witnesses.

    This bounds the stored witnesses only, not every sparsest solution.
    """
    if result.kstar == 0:
        return None

    return min(
        abs(_record.x[i])
        for _record in result.witnesses.values()
        for i in _record.support
    )
