"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """A hypothesis required by the quantity being checked is not met."""


class VerificationError(RuntimeError):
    """A numerically checked inequality failed.

    Every inequality this package asserts is a proven fact, so a failure
    signals a bug in the numerics (or a broken input), never new mathematics.
    """


class ConvolutionOverflowError(RuntimeError):
    """The support of a convolution would exceed the configured cap."""


class GenerationError(RuntimeError):
    """Random instance generation exhausted its adjustment budget."""
