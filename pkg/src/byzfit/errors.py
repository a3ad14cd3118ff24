"""Exception hierarchy.

Every algorithmic failure derives from :class:`FitFailure` so callers (and the
CLI exit-code mapping) can tell "the data did not admit a fit" apart from
"the inputs were malformed" (plain :class:`ValueError` / :class:`TypeError`).
"""


class ByzfitError(Exception):
    pass


class KindMismatch(TypeError, ByzfitError):
    """Arithmetic between scalars of different field kinds."""


class FitFailure(ByzfitError):
    """Base for algorithmic failures; ``kind`` is the stable report tag."""

    kind = "FitFailure"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details


class Infeasible(FitFailure):
    kind = "Infeasible"


class NotDivisible(FitFailure):
    kind = "NotDivisible"


class TooManyErrors(FitFailure):
    kind = "TooManyErrors"


class Exhausted(FitFailure):
    kind = "Exhausted"


class BudgetExceeded(FitFailure):
    kind = "BudgetExceeded"


class NoDegreeFits(FitFailure):
    kind = "NoDegreeFits"


class InsufficientCleanData(FitFailure):
    kind = "InsufficientCleanData"


class NumericalFailure(FitFailure):
    kind = "NumericalFailure"
