"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI: ParseError -> 2, PreconditionError -> 3,
NumericError -> 4.  Message phrases are stable; tests match on them.
"""


class AdicError(Exception):
    pass


class ParseError(AdicError):
    exit_code = 2


class PreconditionError(AdicError):
    exit_code = 3


class NumericError(AdicError):
    exit_code = 4


class LevelOverflowError(PreconditionError):
    def __init__(self, msg="level overflow"):
        super().__init__(msg)


class HorizonExceededError(PreconditionError):
    def __init__(self, msg="horizon exceeded"):
        super().__init__(msg)


class NotProperlyOrderedError(PreconditionError):
    def __init__(self, msg="not properly ordered"):
        super().__init__(msg)


class GluingUndefinedError(PreconditionError):
    def __init__(self, msg="gluing undefined"):
        super().__init__(msg)


class CannotShiftError(PreconditionError):
    def __init__(self, msg="cannot shift"):
        super().__init__(msg)


class UniqueErgodicityError(NumericError):
    def __init__(self, msg="unique ergodicity not certified"):
        super().__init__(msg)


class RankNotStabilizedError(NumericError):
    def __init__(self, msg="rank not stabilized"):
        super().__init__(msg)


class GluingInconsistencyError(AdicError):
    # descent failure is a construction bug, not a user error
    def __init__(self, msg="gluing/order inconsistency"):
        super().__init__(msg)
    exit_code = 4


class InsufficientStabilizationError(PreconditionError):
    def __init__(self, msg="insufficient stabilization level"):
        super().__init__(msg)


class NormTooLargeError(PreconditionError):
    def __init__(self, msg="norm too large for Neumann regime"):
        super().__init__(msg)


class BumpSmoothnessError(PreconditionError):
    def __init__(self, msg="bump smoothness exceeded"):
        super().__init__(msg)


class ObstructedError(PreconditionError):
    """Raised by the transfer solver when invariant distributions do not vanish."""

    def __init__(self, distribution_values):
        self.distribution_values = list(distribution_values)
        super().__init__("obstructed: D = %s" % (self.distribution_values,))
