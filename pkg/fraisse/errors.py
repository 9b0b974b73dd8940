"""
Exception types raised by the workbench.

Invalid input is a ``ValueError``; the subclasses below only exist so that
callers can tell the common failure kinds apart.
"""


class SignatureMismatchError(ValueError):
    """A structure, class spec or sentence is over the wrong signature."""


class GuardExceededError(ValueError):
    """A brute-force step would exceed its configured guard."""

    def __init__(self, what, requested, guard):
        self.what = what
        self.requested = requested
        self.guard = guard
        super().__init__(f"{what}: {requested} exceeds guard {guard}")


class IncoherentProblemError(ValueError):
    """An amalgamation problem is not a coherent downward-closed family."""

    def __init__(self, violation):
        self.violation = violation
        super().__init__(f"Incoherent amalgamation problem: {violation}")


class FormulaError(ValueError):
    """Malformed, ill-sorted or open sentence."""


class AmalgamationFailure(RuntimeError):
    """The sampler met an empty completion set.

    Attributes:
        level: size of the subset whose family could not be completed
        witness: the AmalgProblem with no completion (may be None when the
            failure was a post-hoc membership violation)
    """

    def __init__(self, level, witness=None, detail=""):
        self.level = level
        self.witness = witness
        message = f"Amalgamation failure at level {level}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
