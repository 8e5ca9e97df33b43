"""Exception types raised across the package."""


class SparseTrigError(Exception):
    """Base class for all package errors."""


class InvalidFrequencySet(SparseTrigError, ValueError):
    pass


class GridAliasingError(SparseTrigError, ValueError):
    """Two frequencies coincide modulo the grid size, so grid samples cannot separate them."""


class InsufficientGridPoints(SparseTrigError, ValueError):
    pass


class ShapeError(SparseTrigError, ValueError):
    pass


class InvalidSparsity(SparseTrigError, ValueError):
    pass


class NeedTwoColumns(SparseTrigError, ValueError):
    pass


class EmptySubset(SparseTrigError, ValueError):
    pass


class CombinatorialBudgetExceeded(SparseTrigError, RuntimeError):
    pass


class InvalidConfig(SparseTrigError, ValueError):
    pass


class EmptyInput(SparseTrigError, ValueError):
    pass


class RankDeficient(SparseTrigError, ArithmeticError):
    """Selected columns became numerically dependent.

    The greedy result built up to the failing step is kept on ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InvalidRadius(SparseTrigError, ValueError):
    pass


class InvalidProbability(SparseTrigError, ValueError):
    pass


__all__ = [
    "SparseTrigError",
    "InvalidFrequencySet",
    "GridAliasingError",
    "InsufficientGridPoints",
    "ShapeError",
    "InvalidSparsity",
    "NeedTwoColumns",
    "EmptySubset",
    "CombinatorialBudgetExceeded",
    "InvalidConfig",
    "EmptyInput",
    "RankDeficient",
    "InvalidRadius",
    "InvalidProbability",
]
