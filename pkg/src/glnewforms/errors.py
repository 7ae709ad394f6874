"""Exception types shared across the package.

Every failure mode that a caller can meaningfully react to gets its own
class; plain ValueError/RuntimeError are reserved for programming errors.
"""


class GLNewformsError(Exception):
    """Base class for all package errors."""


class NonPrimeCharacteristic(GLNewformsError):
    pass


class ReduciblePolynomial(GLNewformsError):
    pass


class SearchBudgetExceeded(GLNewformsError):
    pass


class EnumerationBoundExceeded(GLNewformsError):
    pass


class SingularMatrix(GLNewformsError):
    pass


class EigenspaceSplitFailure(GLNewformsError):
    pass


class InconsistentOrthogonality(GLNewformsError):
    pass


class NonRegularTheta(GLNewformsError):
    pass


class NotAGroup(GLNewformsError):
    pass


class NonInvertibleOrder(GLNewformsError):
    pass


class NotCuspidal(GLNewformsError):
    pass


class ProjectionRankMismatch(GLNewformsError):
    pass


class NotIntegral(GLNewformsError):
    pass


class WindowOverflow(GLNewformsError):
    pass


class NotMonomial(GLNewformsError):
    pass


class UnknownFamily(GLNewformsError):
    pass


class PartitionFailure(GLNewformsError):
    pass


class WitnessConjugationFailure(GLNewformsError):
    pass


class NotInSupport(GLNewformsError):
    pass


class NotASubgroup(GLNewformsError):
    pass


class VerificationFailure(GLNewformsError):
    pass


class ReducibleResiduePolynomial(GLNewformsError):
    pass


class EvenM(GLNewformsError):
    pass


class NotInFiltration(GLNewformsError):
    pass


class CounterexampleFound(GLNewformsError):
    pass


class FactorizationFailure(GLNewformsError):
    pass


class CacheCorrupt(GLNewformsError):
    pass
