from __future__ import annotations


class SparseToolError(Exception):
    """Base class for every error SparseTool raises on purpose."""

    exit_code: int = 5


class UsageError(SparseToolError):
    exit_code = 1


class ParseError(SparseToolError):
    exit_code = 2


class DimensionError(SparseToolError):
    exit_code = 2


class InvalidEpsilon(SparseToolError, ValueError):
    exit_code = 2


class InconsistentSystem(SparseToolError):
    """The affine system Ez = f has no solution."""


class EmptyPolyhedron(SparseToolError):
    """The restricted polyhedron {B_S z <= b, B_{I,S} z = b_I} is empty."""


class InfeasiblePoint(UsageError):
    pass


class NotSparsestPoint(UsageError):
    pass


class InvalidDirection(UsageError):
    pass


class WorkCapExceeded(SparseToolError):
    exit_code = 3


class NoSolutionWithinCap(SparseToolError):
    exit_code = 4


class VerificationFailure(SparseToolError):
    """An exact re-check disagreed with a construction. Always a bug."""

    exit_code = 5
