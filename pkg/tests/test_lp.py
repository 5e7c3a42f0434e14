from __future__ import annotations

from typing import Optional, Sequence

import random
from fractions import Fraction
from itertools import combinations

import pytest
from scipy.optimize import linprog

from utils.lp import (
    LPStatus,
    LPProblem,
    lp_max,
    cone_is_trivial,
    strict_cone_feasible,
    exists_nonkernel_point,
)
from utils.linalg import Matrix

from conftest import vec, random_matrix, random_rational


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    if not rows:
        return Fraction(1)

    return sum(
        (
            (-1) ** j * rows[0][j] * det([_r[:j] + _r[j + 1 :] for _r in rows[1:]])
            for j in range(len(rows))
        ),
        Fraction(0),
    )


def cramer(rows: list[list[Fraction]], rhs: list[Fraction]) -> Optional[list]:
    d = det(rows)
    if d == 0:
        return None

    solution = []
    for j in range(len(rows)):
        replaced = [_r[:j] + [_b] + _r[j + 1 :] for _r, _b in zip(rows, rhs)]
        solution.append(det(replaced) / d)

    return solution


def vertex_max(objective, lhs: Matrix, rhs) -> Optional[Fraction]:
    """Best objective over all vertices of {x : lhs x <= rhs}, None if empty."""
    k = lhs.cols
    best = None

    for _rows in combinations(range(lhs.rows), k):
        point = cramer([list(lhs.row(i)) for i in _rows], [rhs[i] for i in _rows])
        if point is None:
            continue

        if any(
            sum(_a * _x for _a, _x in zip(lhs.row(i), point)) > rhs[i]
            for i in range(lhs.rows)
        ):
            continue

        value = sum(_c * _x for _c, _x in zip(objective, point))
        best = value if best is None else max(best, value)

    return best


def boxed(rng: random.Random, k: int, rows: int) -> tuple[Matrix, list[Fraction]]:
    lhs = [[Fraction(rng.randint(-4, 4)) for _ in range(k)] for _ in range(rows)]
    rhs = [Fraction(rng.randint(-6, 6)) for _ in range(rows)]

    for j in range(k):
        unit = [Fraction(int(i == j)) for i in range(k)]
        lhs += [unit, [-_u for _u in unit]]
        rhs += [Fraction(5), Fraction(5)]

    return Matrix.from_rows(lhs, cols=k), rhs


class TestLPMax:
    def test_simple_optimum(self):
        # max x + y  s.t.  x + 2y <= 4, 3x + y <= 6, x, y >= 0
        lhs = Matrix.from_rows([[1, 2], [3, 1], [-1, 0], [0, -1]])
        outcome = lp_max(LPProblem.build([1, 1], lhs, [4, 6, 0, 0]))

        assert outcome.status is LPStatus.OPTIMAL
        assert outcome.value == Fraction(14, 5)
        assert outcome.point == vec("8/5", "6/5")

    def test_unbounded_ray(self):
        lhs = Matrix.from_rows([[-1, 0], [0, -1]])
        outcome = lp_max(LPProblem.build([1, 0], lhs, [0, 0]))

        assert outcome.status is LPStatus.UNBOUNDED
        assert outcome.ray[0] > 0
        assert all(_v <= 0 for _v in lhs.apply(outcome.ray))

    def test_infeasible(self):
        lhs = Matrix.from_rows([[1], [-1]])
        outcome = lp_max(LPProblem.build([1], lhs, [-1, -1]))

        assert outcome.status is LPStatus.INFEASIBLE

    def test_equalities_and_free_variables(self):
        # max -x  s.t.  x - y = -3, y <= 1
        outcome = lp_max(
            LPProblem.build(
                [-1, 0],
                Matrix.from_rows([[0, 1]]),
                [1],
                Matrix.from_rows([[1, -1]]),
                [-3],
            )
        )

        assert outcome.status is LPStatus.OPTIMAL
        assert outcome.value == 2
        assert outcome.point == vec(-2, 1)

    def test_redundant_equalities(self):
        eq = Matrix.from_rows([[1, 1], [2, 2]])
        outcome = lp_max(
            LPProblem.build(
                [1, 0], Matrix.from_rows([[-1, 0], [0, -1]]), [0, 0], eq, [1, 2]
            )
        )

        assert outcome.status is LPStatus.OPTIMAL
        assert outcome.value == 1

    def test_against_vertex_enumeration(self):
        rng = random.Random(23)

        for _ in range(120):
            k = rng.randint(1, 3)
            lhs, rhs = boxed(rng, k, rng.randint(0, 4))
            objective = [Fraction(rng.randint(-5, 5)) for _ in range(k)]

            outcome = lp_max(LPProblem.build(objective, lhs, rhs))
            expected = vertex_max(objective, lhs, rhs)

            if expected is None:
                assert outcome.status is LPStatus.INFEASIBLE
            else:
                assert outcome.status is LPStatus.OPTIMAL
                assert outcome.value == expected
                assert all(_v <= _b for _v, _b in zip(lhs.apply(outcome.point), rhs))

    def test_against_linprog(self):
        rng = random.Random(29)

        for _ in range(40):
            k = rng.randint(1, 3)
            lhs, rhs = boxed(rng, k, rng.randint(1, 4))
            objective = [Fraction(rng.randint(-5, 5)) for _ in range(k)]

            outcome = lp_max(LPProblem.build(objective, lhs, rhs))
            reference = linprog(
                [-float(_c) for _c in objective],
                A_ub=[[float(_v) for _v in _r] for _r in lhs.to_rows()],
                b_ub=[float(_v) for _v in rhs],
                bounds=[(None, None)] * k,
            )

            if reference.status == 2:
                assert outcome.status is LPStatus.INFEASIBLE
            else:
                assert reference.status == 0
                expected = pytest.approx(-reference.fun, abs=1e-7)
                assert float(outcome.value) == expected


class TestConeTests:
    def test_nonnegative_orthant_cone(self):
        # {t : -t <= 0} is the orthant
        trivial, witness = cone_is_trivial(-Matrix.identity(2))

        assert not trivial
        assert all(_v >= 0 for _v in witness) and any(witness)

    def test_pointed_trivial_cone(self):
        C = Matrix.from_rows([[1, 0], [0, 1], [-1, -1]])

        assert cone_is_trivial(C) == (True, None)

    def test_strict_feasible_example(self):
        # C4 at (0,0,2,1): -B_IS d > 0 and B_IbarS d = 0
        B_IS = Matrix.from_rows([[1, "-5/2"], [-2, 3]])
        B_IbarS = Matrix.from_rows([[-1, 2]])

        assert strict_cone_feasible(-B_IS, B_IbarS) == (True, vec(2, 1))
        assert strict_cone_feasible(B_IS, B_IbarS) == (True, vec(-2, -1))

    def test_strict_infeasible(self):
        strict = Matrix.from_rows([[1, 0]])
        kernel = Matrix.from_rows([[1, 0]])

        assert strict_cone_feasible(strict, kernel) == (False, None)

    def test_strict_with_no_rows(self):
        feasible, witness = strict_cone_feasible(
            Matrix.zeros(0, 2), Matrix.from_rows([[1, 1]])
        )

        assert feasible
        assert witness == vec(1, -1)
        assert strict_cone_feasible(Matrix.zeros(0, 2), Matrix.identity(2)) == (
            False,
            None,
        )

    def test_nonkernel_point(self):
        # D4 at (0,1,-1/2,0): B_IS d > 0 and A_S d != 0
        B_IS = Matrix.from_rows([[0, 1]])
        A_S = Matrix.from_rows([[0, -2], [1, 4], [0, -2]])

        assert exists_nonkernel_point(B_IS, A_S) == (True, vec(-4, 1))
        assert exists_nonkernel_point(-B_IS, A_S) == (True, vec(4, -1))

    def test_nonkernel_point_without_strict_rows(self):
        assert exists_nonkernel_point(Matrix.zeros(0, 3), Matrix.identity(3)) == (
            True,
            vec(1, 0, 0),
        )

    def test_nonkernel_point_absent(self):
        strict = Matrix.from_rows([[1, 0]])
        model = Matrix.from_rows([[0, 0]])

        assert exists_nonkernel_point(strict, model) == (False, None)
        assert exists_nonkernel_point(
            Matrix.from_rows([[1], [-1]]), Matrix.from_rows([[1]])
        ) == (False, None)

    def test_trivial_cones_exclude_every_direction(self):
        rng = random.Random(37)
        trivial_seen = 0

        for _ in range(100):
            cone = random_matrix(rng, rng.randint(2, 4), 2)
            trivial, witness = cone_is_trivial(cone)

            if not trivial:
                assert any(witness)
                assert all(_v <= 0 for _v in cone.apply(witness))
                continue

            trivial_seen += 1
            for _ in range(20):
                t = (random_rational(rng, nonzero=True), random_rational(rng))
                assert any(_v > 0 for _v in cone.apply(t))

        assert trivial_seen > 0

    def test_row_scaling_keeps_the_answers(self):
        rng = random.Random(41)

        for _ in range(60):
            k = rng.randint(1, 3)
            strict = random_matrix(rng, rng.randint(1, 3), k)
            other = random_matrix(rng, rng.randint(1, 3), k)
            rows = []
            for _row in strict.to_rows():
                scale = Fraction(rng.randint(1, 9), rng.randint(1, 9))
                rows.append([scale * _v for _v in _row])
            scaled = Matrix.from_rows(rows, cols=k)

            assert (
                strict_cone_feasible(strict, other)[0]
                == strict_cone_feasible(scaled, other)[0]
            )
            assert (
                exists_nonkernel_point(strict, other)[0]
                == exists_nonkernel_point(scaled, other)[0]
            )
