"""Exception hierarchy shared across the package."""


class RaicarnError(Exception):
    """Base class for all package errors."""


class RaggedRunsError(RaicarnError):
    """Runs disagree on the number of components or map length."""


class NonFiniteError(RaicarnError):
    """A map or matrix contains NaN or infinite values."""


class TooFewRunsError(RaicarnError):
    """Fewer than two decomposition runs were supplied."""


class BadMagicError(RaicarnError):
    """Matrix file does not start with the expected magic bytes."""


class ShapeMismatchError(RaicarnError):
    """Declared shape disagrees with the payload or with peer inputs."""


class IoFailureError(RaicarnError):
    """Underlying file operation failed."""


class MaskLengthMismatchError(RaicarnError):
    """Mask length differs from the map length."""


class DegenerateDataError(RaicarnError):
    """Too few samples for the requested operation."""


class RankDeficientError(RaicarnError):
    """Matrix lacks the required rank."""


class ZeroVarianceError(RaicarnError):
    """One or more locations have zero residual variance."""

    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(f"zero variance at locations {self.indices}")


class InvalidPermutationError(RaicarnError):
    """Supplied index vector is not a permutation."""


class DomainError(RaicarnError):
    """Argument outside its mathematical domain."""
