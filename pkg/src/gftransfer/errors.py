"""Exception hierarchy shared across the package."""


class GFTransferError(Exception):
    """Base class for all errors raised by this package."""


class AsymmetricWeights(GFTransferError):
    pass


class NegativeWeight(GFTransferError):
    pass


class NonzeroDiagonal(GFTransferError):
    pass


class DuplicateNodeId(GFTransferError):
    pass


class DecompositionFailure(GFTransferError):
    pass


class DimensionMismatch(GFTransferError):
    pass


class InvalidProbability(GFTransferError):
    pass


class TooManyRemovals(GFTransferError):
    pass


class NoRoomToAdd(GFTransferError):
    pass


class ZeroSpectrum(GFTransferError):
    pass


class EmptySampleSet(GFTransferError):
    pass


class SingularSystem(GFTransferError):
    pass


class PoleOnGrid(GFTransferError):
    pass


class SolverDiverged(GFTransferError):
    pass


class NonPositiveLambda(GFTransferError):
    pass


class DegenerateWeights(GFTransferError):
    pass


class MappingMismatch(GFTransferError):
    pass


class SingularCovariance(GFTransferError):
    pass


class IndexOutOfRange(GFTransferError):
    pass


class AllTrialsFailed(GFTransferError):
    pass
