"""Exception hierarchy."""


class KFlowError(Exception):
    """Base class for all errors raised by kflow."""


class SchemaError(KFlowError):
    pass


class JacobiViolation(KFlowError):
    pass


class NotPositiveDefinite(KFlowError):
    pass


class DimensionMismatch(KFlowError, ValueError):
    pass


class NumericallyAmbiguous(KFlowError):
    """A singular value fell in the gray zone between zero and nonzero."""


class NotASubalgebra(KFlowError):
    pass


class DegenerateFlag(KFlowError):
    pass


class PathMismatch(KFlowError):
    """Two independent routes to the same tensor disagree (a convention bug)."""


class SingularMatrix(KFlowError):
    pass


class NoConvergence(KFlowError):
    pass


class ZeroBracket(KFlowError):
    pass


class PreconditionFailed(KFlowError):
    pass


class NotCertified(KFlowError):
    pass


class NormalityViolated(KFlowError):
    pass


class NotDerivation(KFlowError):
    pass


class NotCommuting(KFlowError):
    pass


class BlowUp(KFlowError):
    pass


class NonFinite(KFlowError):
    pass


class UnknownEntry(KFlowError, KeyError):
    pass
