from __future__ import annotations

from typing import Union, Callable, Optional, Sequence

import math
import logging
from fractions import Fraction
from dataclasses import dataclass

from utils.tools import Vector, norm_inf, primitive, sqrt_bounds
from utils.errors import InvalidDirection, VerificationFailure
from utils.linalg import null_space_basis

from .problem import SolutionRecord, ProblemInstance, is_feasible, make_record
from .conditions import NEEDS_STRICT_INTERIOR, ConditionContext, build_context

import config

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Radical:
    """sign * (epsilon - sqrt(residual_sq)) / (scale * sqrt(m)), with scale > 0."""

    sign: int
    epsilon: Fraction
    residual_sq: Fraction
    scale: Fraction
    m: int

    def __neg__(self) -> Radical:
        return Radical(
            -self.sign, self.epsilon, self.residual_sq, self.scale, self.m
        )

    def __float__(self) -> float:
        magnitude = (float(self.epsilon) - math.sqrt(self.residual_sq)) / (
            float(self.scale) * math.sqrt(self.m)
        )
        return self.sign * magnitude

    def __str__(self) -> str:
        sign = "-" if self.sign < 0 else ""
        root = "" if self.residual_sq == 0 else f" - sqrt({self.residual_sq})"
        return f"{sign}({self.epsilon}{root})/({self.scale}*sqrt({self.m}))"

    def _magnitude_minus(self, q: Fraction) -> int:
        """Sign of q - |value| for a rational q."""
        if q <= 0:
            return -1

        # q c sqrt(m) + sqrt(r) against epsilon, squared on both sides
        a = q * self.scale
        r, m = self.residual_sq, self.m
        k = a * a * m + r - self.epsilon * self.epsilon

        if a == 0 or r == 0:
            return (k > 0) - (k < 0)

        if k >= 0:
            return 1

        cross = 4 * a * a * m * r - k * k
        return (cross > 0) - (cross < 0)

    def compare(self, q: Fraction) -> int:
        """Sign of q - value, decided exactly."""
        if self.sign > 0:
            return self._magnitude_minus(q)

        return -self._magnitude_minus(-q)

    def inner(self) -> Fraction:
        """A rational between 0 and the value, as close as the config allows."""
        denominator = config.SQRT_DENOMINATOR

        for _ in range(config.SQRT_REFINEMENTS + 1):
            _, root_r = sqrt_bounds(self.residual_sq, denominator)
            _, root_m = sqrt_bounds(Fraction(self.m), denominator)
            bound = (self.epsilon - root_r) / (self.scale * root_m)

            if bound > 0:
                return self.sign * bound

            denominator *= 1000

        return Fraction(0)


Bound = Union[Fraction, Radical]


def _less(a: Bound, b: Bound) -> bool:
    if isinstance(b, Radical):
        return b.compare(a) < 0

    if isinstance(a, Radical):
        return a.compare(b) > 0

    return a < b


def _inner(bound: Optional[Bound]) -> Optional[Fraction]:
    if bound is None or isinstance(bound, Fraction):
        return bound

    return bound.inner()


@dataclass(frozen=True)
class LambdaInterval:
    """Step sizes along a direction; a None side is unbounded.

    An unbounded side is always open. A finite side is open when its endpoint
    is excluded, as lambda = 0 is for the one-sided conditions.
    """

    lower: Optional[Bound]
    upper: Optional[Bound]
    rational_inner_lower: Optional[Fraction]
    rational_inner_upper: Optional[Fraction]
    lower_open: bool = False
    upper_open: bool = False

    @classmethod
    def between(
        cls,
        lower: Optional[Bound],
        upper: Optional[Bound],
        *,
        lower_open: bool = False,
        upper_open: bool = False,
    ) -> LambdaInterval:
        return cls(
            lower,
            upper,
            _inner(lower),
            _inner(upper),
            lower_open=lower_open or lower is None,
            upper_open=upper_open or upper is None,
        )

    def __neg__(self) -> LambdaInterval:
        return LambdaInterval(
            _negated(self.upper),
            _negated(self.lower),
            _negated(self.rational_inner_upper),
            _negated(self.rational_inner_lower),
            lower_open=self.upper_open,
            upper_open=self.lower_open,
        )


@dataclass(frozen=True)
class SolutionFamily:
    base: SolutionRecord
    direction: Vector
    interval: LambdaInterval
    condition_label: str

    def point(self, step: Fraction) -> Vector:
        return tuple(_x + step * _d for _x, _d in zip(self.base.x, self.direction))


@dataclass(frozen=True)
class SignPartition:
    """Inactive rows split by the sign of (B_IbarS d)_j, with their step ratios."""

    Jplus: tuple[int, ...]
    Jminus: tuple[int, ...]
    Jzero: tuple[int, ...]
    ratios: dict[int, Fraction]

    @classmethod
    def of(cls, ctx: ConditionContext, d: Vector) -> SignPartition:
        moves = ctx.B_IbarS.apply(d)
        rows = ctx.record.inactive_set
        ratios = {
            j: _slack / _move
            for j, _slack, _move in zip(rows, ctx.slack, moves)
            if _move != 0
        }
        return cls(
            Jplus=tuple(j for j, _v in zip(rows, moves) if _v > 0),
            Jminus=tuple(j for j, _v in zip(rows, moves) if _v < 0),
            Jzero=tuple(j for j, _v in zip(rows, moves) if _v == 0),
            ratios=ratios,
        )

    def max_step(self) -> Optional[Fraction]:
        """Largest step keeping the J+ rows feasible; None when J+ is empty."""
        return min((self.ratios[j] for j in self.Jplus), default=None)

    def min_step(self) -> Optional[Fraction]:
        """Most negative step keeping the J- rows feasible; None when J- is empty."""
        return max((self.ratios[j] for j in self.Jminus), default=None)

    def symmetric_step(self) -> Optional[Fraction]:
        return min((abs(_r) for _r in self.ratios.values()), default=None)


def _ball_step(ctx: ConditionContext, d: Vector) -> Optional[Radical]:
    """Step size keeping ||y - A_S z|| <= epsilon; None when A_S d = 0."""
    scale = norm_inf(ctx.A_S.apply(d))
    if scale == 0:
        return None

    inst = ctx.instance
    return Radical(1, inst.epsilon, ctx.record.residual_sq, scale, inst.m)


def _tighter_upper(a: Optional[Bound], b: Optional[Bound]) -> Optional[Bound]:
    if a is None or b is None:
        return b if a is None else a

    return a if _less(a, b) else b


def _tighter_lower(a: Optional[Bound], b: Optional[Bound]) -> Optional[Bound]:
    if a is None or b is None:
        return b if a is None else a

    return b if _less(a, b) else a


def _negated(bound: Optional[Bound]) -> Optional[Bound]:
    return None if bound is None else -bound


ZERO = Fraction(0)


def _interval_c1(ctx: ConditionContext, d: Vector) -> LambdaInterval:
    signs = SignPartition.of(ctx, d)
    return LambdaInterval.between(signs.min_step(), signs.max_step())


def _interval_c2(ctx: ConditionContext, d: Vector) -> LambdaInterval:
    step = _ball_step(ctx, d)
    return LambdaInterval.between(_negated(step), step)


def _interval_c3(ctx: ConditionContext, d: Vector) -> LambdaInterval:
    return LambdaInterval.between(
        _negated(_ball_step(ctx, d)), ZERO, upper_open=True
    )


def _interval_c4(ctx: ConditionContext, d: Vector) -> LambdaInterval:
    return LambdaInterval.between(ZERO, _ball_step(ctx, d), lower_open=True)


def _interval_d1(ctx: ConditionContext, d: Vector) -> LambdaInterval:
    return LambdaInterval.between(
        SignPartition.of(ctx, d).min_step(), ZERO, upper_open=True
    )


def _interval_d2(ctx: ConditionContext, d: Vector) -> LambdaInterval:
    return LambdaInterval.between(
        ZERO, SignPartition.of(ctx, d).max_step(), lower_open=True
    )


def _interval_d3(ctx: ConditionContext, d: Vector) -> LambdaInterval:
    signs = SignPartition.of(ctx, d)
    step = _tighter_upper(signs.symmetric_step(), _ball_step(ctx, d))
    return LambdaInterval.between(_negated(step), step)


def _interval_d4(ctx: ConditionContext, d: Vector) -> LambdaInterval:
    lower = _tighter_lower(
        SignPartition.of(ctx, d).min_step(), _negated(_ball_step(ctx, d))
    )
    return LambdaInterval.between(lower, ZERO, upper_open=True)


def _interval_d5(ctx: ConditionContext, d: Vector) -> LambdaInterval:
    upper = _tighter_upper(SignPartition.of(ctx, d).max_step(), _ball_step(ctx, d))
    return LambdaInterval.between(ZERO, upper, lower_open=True)


INTERVALS: dict[str, Callable[[ConditionContext, Vector], LambdaInterval]] = {
    "C1": _interval_c1,
    "C2": _interval_c2,
    "C3": _interval_c3,
    "C4": _interval_c4,
    "D1": _interval_d1,
    "D2": _interval_d2,
    "D3": _interval_d3,
    "D4": _interval_d4,
    "D5": _interval_d5,
}


def _all(values: Sequence[Fraction], test: Callable[[Fraction], bool]) -> bool:
    return all(test(_v) for _v in values)


def _verify_membership(ctx: ConditionContext, label: str, d: Vector) -> None:
    """Raise InvalidDirection unless d meets the label's defining memberships."""
    image = ctx.A_S.apply(d)
    active = ctx.B_IS.apply(d)
    inactive = ctx.B_IbarS.apply(d)

    def zero(_v):
        return _v == 0

    checks = {
        "C1": _all(image, zero) and _all(active, zero),
        "C2": _all(ctx.B_S.apply(d), zero),
        "C3": _all(active, lambda _v: _v > 0) and _all(inactive, zero),
        "C4": _all(active, lambda _v: _v < 0) and _all(inactive, zero),
        "D1": _all(active, lambda _v: _v > 0) and _all(image, zero),
        "D2": _all(active, lambda _v: _v < 0) and _all(image, zero),
        "D3": _all(active, zero),
        "D4": _all(active, lambda _v: _v > 0) and not _all(image, zero),
        "D5": _all(active, lambda _v: _v < 0) and not _all(image, zero),
    }

    if not checks[label]:
        raise InvalidDirection(f"The direction does not satisfy {label}.")

    if label in NEEDS_STRICT_INTERIOR and not _all(image, zero):
        if not ctx.record.strict_interior:
            raise InvalidDirection(
                f"{label} moves the residual but the point has ||e*|| = epsilon."
            )


def build_family(
    ctx: ConditionContext, label: str, direction: Sequence[Fraction]
) -> SolutionFamily:
    """The segment x* + lambda d of same-support solutions for one condition.

    ``direction`` is n-dimensional and zero off the support; it is scaled to
    a primitive integer vector before the interval is computed.
    """
    if label not in INTERVALS:
        raise InvalidDirection(f"Unknown condition {label!r}.")

    inst, support = ctx.instance, ctx.record.support
    if len(direction) != inst.n:
        raise InvalidDirection(
            f"Direction has {len(direction)} entries, expected {inst.n}."
        )

    if any(_v != 0 for i, _v in enumerate(direction) if i not in support):
        raise InvalidDirection("The direction must vanish off the support.")

    full = primitive([Fraction(_v) for _v in direction])
    d = tuple(full[i] for i in support)
    if not any(d):
        raise InvalidDirection("The direction is zero on the support.")

    _verify_membership(ctx, label, d)
    interval = INTERVALS[label](ctx, d)

    log.debug(
        f"{label} family along {d}: [{interval.lower}, {interval.upper}], inner "
        f"[{interval.rational_inner_lower}, {interval.rational_inner_upper}]."
    )
    return SolutionFamily(ctx.record, full, interval, label)


def sample_steps(interval: LambdaInterval, count: int) -> list[Fraction]:
    lo, hi = interval.rational_inner_lower, interval.rational_inner_upper

    if lo is not None and hi is not None:
        if lo >= hi:
            raise VerificationFailure(f"Degenerate enclosure [{lo}, {hi}].")

        width = hi - lo
        return [lo + width * Fraction(j, count + 1) for j in range(1, count + 1)]

    if lo is not None:
        return [Fraction(2) ** j for j in range(count)]

    if hi is not None:
        return [-(Fraction(2) ** j) for j in range(count)]

    return [
        (1 if j % 2 == 0 else -1) * Fraction(2) ** (j // 2) for j in range(count)
    ]


def sample_and_verify(
    inst: ProblemInstance, fam: SolutionFamily, count: int
) -> list[SolutionRecord]:
    """Sample ``count`` members of the family and re-check each exactly.

    Parameters
    ----------
    inst: ProblemInstance
        The instance the family belongs to.
    fam: SolutionFamily
        A family built by ``build_family``.
    count: int
        Number of distinct step sizes, spread uniformly over the certified
        enclosure, or along powers of two on an unbounded side.
    """
    if count < 1:
        raise ValueError("count must be at least 1")

    members = []
    for _step in sorted(sample_steps(fam.interval, count)):
        point = fam.point(_step)

        if not is_feasible(inst, point):
            raise VerificationFailure(
                f"{fam.condition_label} member at lambda = {_step} is infeasible."
            )

        record = make_record(inst, point)
        if record.support != fam.base.support:
            raise VerificationFailure(
                f"{fam.condition_label} member at lambda = {_step} changed support."
            )

        members.append(record)

    return members


def raise_activity(ctx: ConditionContext) -> SolutionRecord:
    """Walk along a Null(M*) vector to the nearer finite end of its interval.

    The endpoint makes at least one more inequality active.
    """
    basis = null_space_basis(ctx.Mstar)
    if basis.cols == 0:
        return ctx.record

    d = basis.column(0)
    interval = _interval_c1(ctx, d)
    ends = [_b for _b in (interval.upper, interval.lower) if _b is not None]
    if not ends:
        raise VerificationFailure("Null(M*) direction never meets an inequality.")

    step = min(ends, key=abs)
    point = [_x + step * _d for _x, _d in zip(ctx.record.x, ctx.embed(d))]
    record = make_record(ctx.instance, point)

    if not set(ctx.record.active_set) < set(record.active_set):
        raise VerificationFailure("Active set did not grow along Null(M*).")

    log.debug(
        f"Active set grew from {len(ctx.record.active_set)} to "
        f"{len(record.active_set)} rows."
    )
    return record


def raise_activity_fully(
    inst: ProblemInstance, record: SolutionRecord
) -> SolutionRecord:
    """Repeat ``raise_activity`` until M* has full column rank."""
    ctx = build_context(inst, record)

    while ctx.mstar_nullity > 0:
        ctx = build_context(inst, raise_activity(ctx))

    return ctx.record
