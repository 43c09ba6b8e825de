"""Exception hierarchy shared by every dmuss module."""


class DmussError(Exception):
    """Base class for all library errors."""


class NotPrime(DmussError, ValueError):
    pass


class DivideByZero(DmussError, ZeroDivisionError):
    pass


class NotSquare(DmussError, ValueError):
    pass


class ShapeMismatch(DmussError, ValueError):
    pass


class IndexOutOfRange(DmussError, IndexError):
    pass


class RankDeficientTarget(DmussError, ValueError):
    """The requested pivot columns do not have full column rank."""


class NoUsers(DmussError, ValueError):
    pass


class TooManyUsers(DmussError, ValueError):
    pass


class InvalidRates(DmussError, ValueError):
    pass


class NonIntegralRate(InvalidRates):
    pass


class ImperfectMatching(DmussError):
    def __init__(self, k: int, unmatched=()):
        self.k = k
        self.unmatched = tuple(unmatched)
        super().__init__(f"matching for user {k} leaves {len(self.unmatched)} demand vertices unmatched")


class PerfectMatching(DmussError):
    """Raised when a Hall violator is requested for a left-perfect matching."""


class InvalidMatchPlan(DmussError, ValueError):
    pass


class CapacityViolation(DmussError):
    def __init__(self, violation):
        self.violation = violation
        super().__init__(f"rate tuple outside the capacity region: {violation}")


class AssignmentExhausted(DmussError):
    def __init__(self, q: int, budget: int, block_index: int):
        self.q = q
        self.budget = budget
        self.block_index = block_index
        super().__init__(
            f"no nonsingular assignment found over GF({q}) within {budget} draws "
            f"(last failing block: user {block_index})"
        )


class SynthesisFailed(DmussError):
    """The synthesized scheme did not pass its own rank certification."""

    def __init__(self, report):
        self.report = report
        super().__init__("synthesized scheme failed self-certification")


class TooLarge(DmussError, ValueError):
    def __init__(self, states: int, max_states: int):
        self.states = states
        self.max_states = max_states
        super().__init__(f"share space has {states} states, above the cap of {max_states}")


class DimensionMismatch(DmussError, ValueError):
    pass


class SchemaError(DmussError, ValueError):
    """A JSON document does not follow the expected file format."""
