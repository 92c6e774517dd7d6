"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: usage errors -> 1, numerical
failures and exhausted budgets -> 2, invalid inputs (including domain
violations and pole hits) -> 3.
"""


class TeichLabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TeichLabError):
    """An argument violates a structural precondition (non-transitive
    permutations, det <= 0, mismatched surfaces, malformed ladders...)."""


class DomainError(InvalidInputError):
    """A numeric argument lies outside the mathematical domain of the
    operation (gamma pole, eigenvalue parameter outside [0, 1/4]...)."""


class PoleError(InvalidInputError):
    """Evaluation was requested exactly at (or too close to) a pole."""

    def __init__(self, msg, location=None):
        super().__init__(msg)
        self.location = location


class NumericalFailureError(TeichLabError):
    """An iterative or adaptive scheme failed to converge.  Carries the
    best partial result when one is available."""

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class BudgetError(NumericalFailureError):
    """A configured work budget was exhausted; ``partial`` holds the
    (flagged) partial results."""
