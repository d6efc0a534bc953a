"""Exception hierarchy shared by every module of the package."""


class BNTestError(Exception):
    pass


class CycleDetected(BNTestError, ValueError):
    pass


class ParentIndexOutOfRange(BNTestError, ValueError):
    pass


class EnumerationCapExceeded(BNTestError):
    pass


class TripleEnumerationCapExceeded(EnumerationCapExceeded):
    pass


class StructureMismatch(BNTestError, ValueError):
    pass


class BoundaryProbability(BNTestError, ValueError):
    pass


class InfeasibleMoments(BNTestError, ValueError):
    pass


class ArityMismatch(BNTestError, ValueError):
    pass


class BalancednessViolation(BNTestError):
    pass


class SampleSourceExhausted(BNTestError):
    pass


class InvalidParameter(BNTestError, ValueError):
    pass


class ConfigInvalid(BNTestError, ValueError):
    pass
