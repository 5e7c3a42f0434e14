from __future__ import annotations

from typing import Optional, Sequence

import time
import logging
import contextlib
from fractions import Fraction
from functools import cached_property

from analysis.report import (
    Payload,
    indices,
    envelope,
    family_payload,
    record_payload,
    instance_payload,
    necessary_payload,
    boundedness_payload,
    enumeration_payload,
    multiplicity_payload,
)
from analysis.problem import (
    SolutionRecord,
    ProblemInstance,
    make_record,
    impose_structure,
    serialize_instance,
)
from analysis.families import (
    SolutionFamily,
    build_family,
    sample_steps,
    raise_activity,
    sample_and_verify,
)
from analysis.conditions import (
    Status,
    ConditionContext,
    MultiplicityReport,
    spark,
    sparsify,
    check_mstar,
    build_context,
    check_necessary,
    check_boundedness,
    classify_multiplicity,
)
from analysis.enumerator import EnumerationResult, enumerate_sparsest
from utils.caps import WorkBudget
from utils.errors import InvalidDirection


class SparseTool:
    """Runs the analysis pipeline on one instance and assembles the reports."""

    instance: ProblemInstance
    budget: WorkBudget
    log: logging.Logger

    def __init__(
        self,
        instance: ProblemInstance,
        *,
        kcap: Optional[int] = None,
        samples: Optional[int] = None,
        max_supports: Optional[int] = None,
        max_active_subsets: Optional[int] = None,
        timings: bool = False,
    ):
        self.instance = instance
        self.kcap = kcap
        self.samples = samples or self.config.DEFAULT_SAMPLES
        self.budget = WorkBudget.from_config(max_supports, max_active_subsets)
        self.log = logging.getLogger(__name__)

        self._timings: Optional[dict[str, float]] = {} if timings else None

    @property
    def config(self):
        return __import__("config")

    @contextlib.contextmanager
    def stage(self, name: str):
        self.log.info(f"Stage {name} started.")
        start = time.perf_counter()

        try:
            yield

        finally:
            elapsed = time.perf_counter() - start
            self.log.info(f"Stage {name} finished in {elapsed:.3f}s.")

            if self._timings is not None:
                self._timings[name] = self._timings.get(name, 0.0) + elapsed

    @cached_property
    def enumeration(self) -> EnumerationResult:
        with self.stage("enumerate"):
            return enumerate_sparsest(self.instance, self.kcap, self.budget)

    def _finish(self, command: str, **sections) -> Payload:
        if self._timings is not None:
            timings = self._timings.items()
            sections["timings"] = {_name: round(_t, 6) for _name, _t in timings}

        return envelope(command, **sections)

    def _necessary(self, ctx: ConditionContext) -> Payload:
        holds, delta = check_necessary(ctx)
        return necessary_payload(holds, None if delta is None else ctx.embed(delta))

    def _families(
        self, ctx: ConditionContext, report: MultiplicityReport
    ) -> list[Payload]:
        families = []

        for _outcome in report.holding():
            for _direction in _outcome.directions:
                family = build_family(ctx, _outcome.label, _direction)
                families.append(self._verified(family))

        return families

    def _verified(self, family: SolutionFamily) -> Payload:
        steps = sorted(sample_steps(family.interval, self.samples))
        samples = sample_and_verify(self.instance, family, self.samples)

        return family_payload(family, steps, samples)

    def _witness(self, record: SolutionRecord) -> Payload:
        ctx = build_context(self.instance, record)

        with self.stage("classify"):
            report = classify_multiplicity(ctx, self.enumeration)

        with self.stage("families"):
            families = self._families(ctx, report)

        payload = {
            "record": record_payload(record),
            "necessary": self._necessary(ctx),
            "mstar_full_rank": check_mstar(ctx),
            "multiplicity": multiplicity_payload(report),
            "families": families,
        }

        if report.outcomes["C1"].status is Status.HOLDS:
            payload["raised_activity"] = record_payload(raise_activity(ctx))

        return payload

    def analyze(self) -> Payload:
        result = self.enumeration
        witnesses = [
            self._witness(result.witnesses[_s]) for _s in result.optimal_supports
        ]

        with self.stage("boundedness"):
            bounded = check_boundedness(
                self.instance, result.kstar, self.budget, result.empirical_gamma
            )

        return self._finish(
            "analyze",
            instance=instance_payload(self.instance),
            enumeration=enumeration_payload(result),
            witnesses=witnesses,
            boundedness=boundedness_payload(bounded),
            work=self.budget.snapshot(),
        )

    def enumerate(self) -> Payload:
        return self._finish(
            "enumerate",
            instance=instance_payload(self.instance),
            enumeration=enumeration_payload(self.enumeration),
            work=self.budget.snapshot(),
        )

    def classify(self, point: Sequence[Fraction]) -> Payload:
        record = make_record(self.instance, point)
        ctx = build_context(self.instance, record)

        with self.stage("classify"):
            report = classify_multiplicity(ctx, self.enumeration)

        return self._finish(
            "classify",
            record=record_payload(record),
            kstar=self.enumeration.kstar,
            necessary=self._necessary(ctx),
            mstar_full_rank=check_mstar(ctx),
            multiplicity=multiplicity_payload(report),
        )

    def family(
        self,
        point: Sequence[Fraction],
        label: str,
        direction: Optional[Sequence[Fraction]] = None,
    ) -> Payload:
        """Families for one condition at a sparsest point.

        Without ``direction`` every witness direction of the condition is
        used; a given direction must satisfy the condition's memberships.
        """
        record = make_record(self.instance, point)
        ctx = build_context(self.instance, record)
        outcome = classify_multiplicity(ctx, self.enumeration).outcomes[label]

        if outcome.status is not Status.HOLDS:
            raise InvalidDirection(
                f"{label} is {outcome.status.value} at this point; no family."
            )

        directions = outcome.directions if direction is None else (direction,)
        with self.stage("families"):
            families = [
                self._verified(build_family(ctx, label, _d)) for _d in directions
            ]

        return self._finish(
            "family",
            record=record_payload(record),
            families=families,
        )

    def boundedness(self) -> Payload:
        result = self.enumeration

        with self.stage("boundedness"):
            report = check_boundedness(
                self.instance, result.kstar, self.budget, result.empirical_gamma
            )

        return self._finish(
            "boundedness",
            kstar=result.kstar,
            boundedness=boundedness_payload(report),
            work=self.budget.snapshot(),
        )

    def spark(self) -> Payload:
        with self.stage("spark"):
            value = spark(self.instance.A, self.budget)

        return self._finish("spark", spark=value)

    def check(self, point: Sequence[Fraction]) -> Payload:
        record = make_record(self.instance, point)
        ctx = build_context(self.instance, record)
        payload = {
            "feasible": True,
            "record": record_payload(record),
            "inactive_set": indices(record.inactive_set),
            "necessary": self._necessary(ctx),
        }

        if not payload["necessary"]["holds"]:
            sparser = sparsify(self.instance, record)
            payload["sparser_point"] = record_payload(sparser)

        return self._finish("check", **payload)

    def structure(self, model: str) -> str:
        return serialize_instance(impose_structure(self.instance, model))
