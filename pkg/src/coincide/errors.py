"""Exception types shared across the solver stack."""


class CoincidenceError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatch(CoincidenceError):
    """Operands have incompatible shapes."""


class RankDeficient(CoincidenceError):
    """Linear system has numerical rank below its row count."""


class NoCrossing(CoincidenceError):
    """The majorant functions never meet on the search window."""


class BracketFailure(CoincidenceError):
    """Sign conditions for root bracketing fail; the majorant pair is inconsistent."""


class BudgetExceeded(CoincidenceError):
    """A covering inversion stepped outside its radius budget.

    Signals a broken covering contract (for instance an inflated covering
    constant supplied by the caller).
    """

    def __init__(self, message, step=None, budget=None):
        super().__init__(message)
        self.step = step
        self.budget = budget

    @property
    def overshoot(self):
        if self.step is None or self.budget is None:
            return None
        return self.step - self.budget


class NegativeDiscriminant(CoincidenceError):
    """Quadratic operator equation with b^2 - 4ac < 0; no solution is certified."""


class NotContractive(CoincidenceError):
    """Lipschitz constant is not strictly below the covering constant."""


class InsufficientData(CoincidenceError):
    """Trace too short for a rate fit."""
