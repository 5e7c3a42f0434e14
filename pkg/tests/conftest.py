from __future__ import annotations

from typing import Callable

import random
from pathlib import Path
from fractions import Fraction

import pytest

from utils.linalg import Matrix
from analysis.problem import ProblemInstance, load_instance
from analysis.enumerator import EnumerationResult, enumerate_sparsest

EXAMPLE_PATH = Path(__file__).resolve().parent.parent / "instances" / "example.json"

# 0-based supports of the worked example and their witnesses
EXAMPLE_SUPPORTS = ((0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
EXAMPLE_WITNESSES = {
    (0, 2): ("1/2", "0", "-1/4", "0"),
    (0, 3): ("4/9", "0", "0", "1/9"),
    (1, 2): ("0", "1", "-1/2", "0"),
    (1, 3): ("0", "4/5", "0", "1/5"),
    (2, 3): ("0", "0", "2", "1"),
}


def vec(*values) -> tuple[Fraction, ...]:
    return tuple(Fraction(_v) for _v in values)


def random_rational(rng: random.Random, nonzero: bool = False) -> Fraction:
    while True:
        value = Fraction(rng.randint(-10, 10), rng.randint(1, 10))
        if value or not nonzero:
            return value


def random_matrix(rng: random.Random, rows: int, cols: int) -> Matrix:
    return Matrix.from_rows(
        [[random_rational(rng) for _ in range(cols)] for _ in range(rows)], cols=cols
    )


def build_random_instance(seed: int) -> ProblemInstance:
    """A feasible instance planted around a sparse point.

    n <= 6, m <= 4, l <= 3, entries p/q with |p|, q <= 10 and epsilon drawn
    from {0, 1/10, 1}.
    """
    rng = random.Random(seed)
    n, m, l = rng.randint(2, 6), rng.randint(1, 4), rng.randint(0, 3)  # noqa: E741
    epsilon = rng.choice([Fraction(0), Fraction(1, 10), Fraction(1)])

    A = random_matrix(rng, m, n)
    B = random_matrix(rng, l, n)

    planted = [Fraction(0)] * n
    for _i in rng.sample(range(n), rng.randint(1, min(3, n))):
        planted[_i] = random_rational(rng, nonzero=True)

    # ||noise|| <= epsilon / 2
    noise = [epsilon / (2 * m) * rng.choice((-1, 1)) for _ in range(m)]
    y = tuple(_v + _e for _v, _e in zip(A.apply(planted), noise))

    slack = [rng.choice((Fraction(0), abs(random_rational(rng)))) for _ in range(l)]
    b = tuple(_v + _s for _v, _s in zip(B.apply(planted), slack))

    return ProblemInstance(A=A, B=B, y=y, b=b, epsilon=epsilon)


@pytest.fixture(scope="session")
def example() -> ProblemInstance:
    return load_instance(str(EXAMPLE_PATH))


@pytest.fixture(scope="session")
def example_result(example) -> EnumerationResult:
    return enumerate_sparsest(example)


@pytest.fixture(scope="session")
def random_instance() -> Callable[[int], ProblemInstance]:
    return build_random_instance


@pytest.fixture
def origin_instance() -> ProblemInstance:
    """Sparsest point is the origin: x1 + x2 within 1 of 0, x >= 0."""
    return ProblemInstance(
        A=Matrix.from_rows([[1, 1]]),
        B=-Matrix.identity(2),
        y=vec(0),
        b=vec(0, 0),
        epsilon=Fraction(1),
    )


@pytest.fixture
def line_instance() -> ProblemInstance:
    """x1 + x2 = 2 with no inequalities."""
    return ProblemInstance(
        A=Matrix.from_rows([[1, 1]]),
        B=Matrix.zeros(0, 2),
        y=vec(2),
        b=(),
        epsilon=Fraction(0),
    )
