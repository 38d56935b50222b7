"""Exception hierarchy shared by every subsystem."""


class NestedWalkError(Exception):
    """Base class for all errors raised by :mod:`nestedwalk`."""


class InputError(NestedWalkError, ValueError):
    """Malformed or out-of-range input."""


class CapacityError(NestedWalkError):
    """A state space or Hilbert space exceeds the configured ceiling."""


class ContractError(NestedWalkError):
    """A documented structural precondition does not hold."""


class BudgetError(NestedWalkError):
    """A simulated run consumed more queries than its declared budget."""

    def __init__(self, used, budget):
        super().__init__(f"query budget exceeded: used {used}, budget {budget:.1f}")
        self.used = used
        self.budget = budget


class InfeasibleError(NestedWalkError):
    """A linear program (or a parameter assignment) violates its constraints.

    ``violated`` lists the names of a minimal set of constraints that cannot
    be satisfied together.
    """

    def __init__(self, message, violated=()):
        super().__init__(message)
        self.violated = list(violated)


class ParseError(NestedWalkError, ValueError):
    """A graph or program file could not be parsed."""
