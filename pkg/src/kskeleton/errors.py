"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for invertibility failures, 3 for resolution/convergence failures,
4 for bad input and 5 for failed verification.
"""


class KSkeletonError(Exception):
    exit_code = 1


class InputError(KSkeletonError, ValueError):
    exit_code = 4


class NotInvertible(KSkeletonError):
    exit_code = 2


class SingularTruncation(NotInvertible):
    pass


class DiagonalBlockSingular(NotInvertible):
    pass


class NormExceedsOne(InputError):
    pass


class ResolutionError(KSkeletonError):
    exit_code = 3

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class GridUnderresolved(ResolutionError):
    pass


class TruncationFailure(ResolutionError):
    pass


class WindowTooSmall(ResolutionError):
    pass


class NotConverged(ResolutionError):
    pass


class NotStabilized(ResolutionError):
    pass


class DecayCheckFailed(ResolutionError):
    pass


class InconsistentComponent(ResolutionError):
    pass


class VerificationError(KSkeletonError):
    exit_code = 5


class ResidualTooLarge(VerificationError):
    pass


class NotSkeleton(VerificationError):
    pass


class NotPartialIsometry(VerificationError):
    pass


class InfiniteDefect(VerificationError):
    pass


class IndexJump(VerificationError):
    pass


class IndexMismatch(VerificationError):
    pass


class IndexDisagreement(VerificationError):
    pass


class ZeroIndex(KSkeletonError):
    pass
