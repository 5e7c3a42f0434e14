from __future__ import annotations

from typing import Optional

from collections import Counter
from dataclasses import field, dataclass

from .errors import WorkCapExceeded

import config

# counter kinds and the cap each one is charged against
SUPPORTS = "supports"
ACTIVE_SUBSETS = "active_subsets"
SUBSETS = "subsets"


@dataclass
class WorkBudget:
    """Work-unit counters with hard caps.

    Parameters
    ----------
    max_supports: int
        Cap on support tests, counted as C(n, k) * 2^l per support size.
    max_active_subsets: int
        Cap on (S, I) region tests and on column subsets in the spark and
        boundedness checks.
    """

    max_supports: int = config.MAX_SUPPORTS
    max_active_subsets: int = config.MAX_ACTIVE_SUBSETS
    counters: Counter = field(default_factory=Counter)

    @classmethod
    def from_config(
        cls,
        max_supports: Optional[int] = None,
        max_active_subsets: Optional[int] = None,
    ) -> WorkBudget:
        return cls(
            max_supports=max_supports or config.MAX_SUPPORTS,
            max_active_subsets=max_active_subsets or config.MAX_ACTIVE_SUBSETS,
        )

    def limit(self, kind: str) -> int:
        if kind == SUPPORTS:
            return self.max_supports

        return self.max_active_subsets

    def would_exceed(self, kind: str, units: int) -> bool:
        return self.counters[kind] + units > self.limit(kind)

    def charge(self, kind: str, units: int = 1) -> None:
        if self.would_exceed(kind, units):
            raise WorkCapExceeded(
                f"Work cap for {kind.replace('_', ' ')} exceeded: "
                f"{self.counters[kind] + units} > {self.limit(kind)}."
            )

        self.counters[kind] += units

    def snapshot(self) -> dict[str, int]:
        kinds = (SUPPORTS, ACTIVE_SUBSETS, SUBSETS)
        return {_kind: self.counters[_kind] for _kind in kinds}
