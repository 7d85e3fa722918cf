"""Run-time numerical failures.

Bad inputs are reported with ``django.core.exceptions.ValidationError``; the
classes below cover contracts that break while a computation is running.
"""


class NumericalInvariantError(ArithmeticError):
    """A checked numerical identity failed beyond its tolerance."""

    def __init__(self, message, *, quantity=None, deviation=None, tolerance=None):
        super().__init__(message)
        self.quantity = quantity
        self.deviation = deviation
        self.tolerance = tolerance


class DegenerateRoundError(NumericalInvariantError):
    """A multi-round composition produced an intermediate state with vanishing trace."""
