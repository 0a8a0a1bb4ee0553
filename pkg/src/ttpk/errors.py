"""Exception hierarchy shared by all modules."""


class TTPError(Exception):
    """Base class for every error raised by the package."""


class InstanceError(TTPError):
    pass


class ParseError(InstanceError):
    pass


class OddTeamCount(InstanceError):
    pass


class MetricViolation(InstanceError):
    def __init__(self, triple, excess):
        i, j, l = triple
        super().__init__(
            f"triangle inequality violated on teams ({i + 1},{j + 1},{l + 1}): "
            f"d({i + 1},{l + 1}) exceeds d({i + 1},{j + 1}) + d({j + 1},{l + 1}) by {excess}"
        )
        self.triple = tuple(triple)
        self.excess = excess


class OddVertexCount(TTPError):
    pass


class NotAMatching(TTPError):
    pass


class NotDivisible(TTPError):
    pass


class StrategyUnavailable(TTPError):
    pass


class WrongKind(TTPError):
    pass


class StructuralInconsistency(TTPError):
    pass


class SizeMismatch(TTPError):
    pass


class TooFewTeams(TTPError):
    pass


class NotSpanningS(TTPError):
    pass


class TooSmallForPacking(TTPError):
    pass


class CoverMismatch(TTPError):
    pass


class BadShape(TTPError):
    pass


class Overlap(TTPError):
    pass


class BadPairAssignment(TTPError):
    pass


class Unsatisfiable(TTPError):
    pass


class TooLargeForExact(TTPError):
    pass
