from __future__ import annotations

from fractions import Fraction

import pytest

from utils.errors import InvalidDirection, VerificationFailure
from utils.linalg import Matrix
from analysis.problem import ProblemInstance, is_feasible, make_record
from analysis.families import (
    Radical,
    LambdaInterval,
    build_family,
    sample_steps,
    raise_activity,
    sample_and_verify,
    raise_activity_fully,
)
from analysis.conditions import Status, build_context, classify_multiplicity
from analysis.enumerator import enumerate_sparsest

from conftest import vec

ROOT3_OVER_30 = 0.057735026919
ROOT3_OVER_60 = 0.028867513459


@pytest.fixture
def null_mstar_instance() -> ProblemInstance:
    # x1 + x2 = 2 exactly, with |x1 - x2| <= 1
    return ProblemInstance(
        A=Matrix.from_rows([[1, 1]]),
        B=Matrix.from_rows([[1, -1], [-1, 1]]),
        y=vec(2),
        b=vec(1, 1),
        epsilon=Fraction(0),
    )


def center(inst: ProblemInstance):
    return build_context(inst, make_record(inst, vec(1, 1)))


class TestRadical:
    def test_float(self):
        assert float(Radical(1, Fraction(1, 10), Fraction(0), Fraction(1), 3)) == (
            pytest.approx(ROOT3_OVER_30, abs=1e-12)
        )

    def test_compare_without_residual(self):
        value = Radical(1, Fraction(1, 10), Fraction(0), Fraction(1), 3)

        assert value.compare(Fraction(1, 17)) == 1
        assert value.compare(Fraction(1, 18)) == -1
        assert value.compare(Fraction(0)) == -1

    def test_compare_with_residual(self):
        # (1 - sqrt(1/4)) / 1 = 1/2 exactly
        half = Radical(1, Fraction(1), Fraction(1, 4), Fraction(1), 1)

        assert half.compare(Fraction(1, 2)) == 0
        assert half.compare(Fraction(1, 3)) == -1
        assert half.compare(Fraction(2, 3)) == 1

    def test_negation(self):
        half = -Radical(1, Fraction(1), Fraction(1, 4), Fraction(1), 1)

        assert half.compare(Fraction(-1, 2)) == 0
        assert half.compare(Fraction(-1, 3)) == 1
        assert half.compare(Fraction(-2, 3)) == -1
        assert float(half) == -0.5

    def test_inner(self):
        exact = Radical(1, Fraction(1), Fraction(1, 4), Fraction(1), 1)
        assert exact.inner() == Fraction(1, 2)

        value = Radical(1, Fraction(1, 10), Fraction(0), Fraction(1), 3)
        inner = value.inner()
        assert inner > 0
        assert value.compare(inner) == -1
        assert float(inner) == pytest.approx(ROOT3_OVER_30, abs=1e-6)

        assert (-value).inner() == -inner

    def test_str(self):
        assert str(Radical(-1, Fraction(1, 10), Fraction(0), Fraction(2), 3)) == (
            "-(1/10)/(2*sqrt(3))"
        )


class TestBuildFamily:
    def test_c4_interval(self, example):
        ctx = build_context(example, make_record(example, vec(0, 0, 2, 1)))
        family = build_family(ctx, "C4", vec(0, 0, 2, 1))

        assert family.interval.lower == 0
        assert isinstance(family.interval.upper, Radical)
        upper = float(family.interval.upper)
        assert upper == pytest.approx(ROOT3_OVER_30, abs=1e-9)
        assert family.interval.rational_inner_lower == 0

    def test_c3_mirrors_c4(self, example):
        ctx = build_context(example, make_record(example, vec(0, 0, 2, 1)))
        family = build_family(ctx, "C3", vec(0, 0, -2, -1))

        assert family.interval.upper == 0
        assert float(family.interval.lower) == pytest.approx(
            -ROOT3_OVER_30, abs=1e-9
        )

    def test_direction_is_made_primitive(self, example):
        ctx = build_context(example, make_record(example, vec(0, 0, 2, 1)))
        family = build_family(ctx, "C4", vec(0, 0, "2/3", "1/3"))

        assert family.direction == vec(0, 0, 2, 1)

    def test_d3_interval(self, example):
        ctx = build_context(example, make_record(example, vec(0, 1, "-1/2", 0)))
        interval = build_family(ctx, "D3", vec(0, 1, 0, 0)).interval

        # the ball binds before any inactive row
        assert float(interval.upper) == pytest.approx(ROOT3_OVER_30, abs=1e-9)
        assert float(interval.lower) == pytest.approx(-ROOT3_OVER_30, abs=1e-9)
        assert interval.rational_inner_lower == -interval.rational_inner_upper

    def test_d4_interval(self, example):
        ctx = build_context(example, make_record(example, vec(0, 1, "-1/2", 0)))
        interval = build_family(ctx, "D4", vec(0, -4, 1, 0)).interval

        assert interval.upper == 0
        assert float(interval.lower) == pytest.approx(-ROOT3_OVER_60, abs=1e-9)

    def test_c1_interval(self, null_mstar_instance):
        ctx = center(null_mstar_instance)
        interval = build_family(ctx, "C1", vec(1, -1)).interval

        assert (interval.lower, interval.upper) == (Fraction(-1, 2), Fraction(1, 2))

    def test_open_ends(self, example):
        ctx = build_context(example, make_record(example, vec(0, 0, 2, 1)))
        c4 = build_family(ctx, "C4", vec(0, 0, 2, 1)).interval
        c3 = build_family(ctx, "C3", vec(0, 0, -2, -1)).interval

        assert (c4.lower_open, c4.upper_open) == (True, False)
        assert (c3.lower_open, c3.upper_open) == (False, True)
        assert ((-c4).lower_open, (-c4).upper_open) == (False, True)

        ctx = build_context(example, make_record(example, vec(0, 1, "-1/2", 0)))
        d3 = build_family(ctx, "D3", vec(0, 1, 0, 0)).interval
        assert not d3.lower_open and not d3.upper_open

    def test_c1_endpoints_are_tight(self, null_mstar_instance):
        family = build_family(center(null_mstar_instance), "C1", vec(1, -1))
        interval, nudge = family.interval, Fraction(1, 1000)

        for _end, _past in (
            (interval.upper, interval.upper + nudge),
            (interval.lower, interval.lower - nudge),
        ):
            assert is_feasible(null_mstar_instance, family.point(_end))
            assert not is_feasible(null_mstar_instance, family.point(_past))

    def test_invalid_directions(self, example):
        ctx = build_context(example, make_record(example, vec(0, 0, 2, 1)))

        with pytest.raises(InvalidDirection):
            build_family(ctx, "C4", vec(0, 0, -2, -1))

        with pytest.raises(InvalidDirection):
            build_family(ctx, "C4", vec(1, 0, 2, 1))

        with pytest.raises(InvalidDirection):
            build_family(ctx, "C4", vec(0, 0, 2))

        with pytest.raises(InvalidDirection):
            build_family(ctx, "C4", vec(0, 0, 0, 0))

        with pytest.raises(InvalidDirection):
            build_family(ctx, "E1", vec(0, 0, 2, 1))

    def test_residual_move_on_the_sphere(self, line_instance):
        # (1, 1) fits y exactly but epsilon = 0 leaves no room to move
        ctx = build_context(line_instance, make_record(line_instance, vec(1, 1)))

        with pytest.raises(InvalidDirection):
            build_family(ctx, "D3", vec(1, 0))


class TestSampleSteps:
    def test_bounded(self):
        steps = sample_steps(LambdaInterval.between(Fraction(0), Fraction(1)), 3)

        assert steps == [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]

    def test_open_sides(self):
        upward = LambdaInterval.between(Fraction(0), None)
        downward = LambdaInterval.between(None, Fraction(0))
        line = LambdaInterval.between(None, None)

        assert upward.upper_open and not upward.lower_open
        assert sample_steps(upward, 3) == list(vec(1, 2, 4))
        assert sample_steps(downward, 2) == list(vec(-1, -2))
        assert sample_steps(line, 4) == list(vec(1, -1, 2, -2))

    def test_degenerate(self):
        with pytest.raises(VerificationFailure):
            sample_steps(LambdaInterval.between(Fraction(1), Fraction(1)), 3)


class TestSampleAndVerify:
    def test_every_example_family(self, example, example_result):
        checked = 0

        for _record in example_result.witnesses.values():
            ctx = build_context(example, _record)
            report = classify_multiplicity(ctx, example_result)

            for _outcome in report.holding():
                label, direction = _outcome.label, _outcome.witness_direction
                family = build_family(ctx, label, direction)
                members = sample_and_verify(example, family, 100)

                assert len({_m.x for _m in members}) == 100
                assert all(_m.support == _record.support for _m in members)
                checked += 1

        assert checked > 0

    def test_c1_family(self, null_mstar_instance):
        ctx = center(null_mstar_instance)
        family = build_family(ctx, "C1", vec(1, -1))
        members = sample_and_verify(null_mstar_instance, family, 100)

        assert all(null_mstar_instance.A.apply(_m.x) == vec(2) for _m in members)
        assert members[0].x < members[-1].x

    def test_count(self, example):
        ctx = build_context(example, make_record(example, vec(0, 0, 2, 1)))
        family = build_family(ctx, "C4", vec(0, 0, 2, 1))

        with pytest.raises(ValueError):
            sample_and_verify(example, family, 0)


class TestRaiseActivity:
    def test_active_set_grows(self, null_mstar_instance):
        ctx = center(null_mstar_instance)
        record = raise_activity(ctx)

        assert record.x == vec("3/2", "1/2")
        assert record.active_set == (0,)

    def test_until_full_rank(self, null_mstar_instance):
        record = raise_activity_fully(
            null_mstar_instance, make_record(null_mstar_instance, vec(1, 1))
        )

        assert build_context(null_mstar_instance, record).mstar_nullity == 0
        assert record.support == (0, 1)

    def test_full_rank_is_untouched(self, example):
        ctx = build_context(example, make_record(example, vec(0, 0, 2, 1)))

        assert raise_activity(ctx) == ctx.record

    def test_raised_point_has_full_rank(self, null_mstar_instance):
        result = enumerate_sparsest(null_mstar_instance)
        raised = make_record(null_mstar_instance, vec("3/2", "1/2"))
        report = classify_multiplicity(
            build_context(null_mstar_instance, raised), result
        )

        assert report.outcomes["C1"].status is Status.NOT_APPLICABLE
