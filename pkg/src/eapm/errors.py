"""Exception hierarchy shared by every module of the package."""


class EapmError(Exception):
    """Base class for all errors raised by this package."""


class NonSquare(EapmError, ValueError):
    pass


class NonHermitian(EapmError, ValueError):
    pass


class DimMismatch(EapmError, ValueError):
    pass


class InvalidState(EapmError, ValueError):
    """A matrix is not a density matrix within tolerance."""


class IncompleteChannel(EapmError, ValueError):
    """Kraus operators violate the completeness relation."""


class InvalidPovm(EapmError, ValueError):
    pass


class ShapeMismatch(EapmError, ValueError):
    pass


class InvalidEnergy(EapmError, ValueError):
    pass


class EnergyTooHigh(InvalidEnergy):
    pass


class InvalidParams(EapmError, ValueError):
    pass


class InvalidInput(EapmError, ValueError):
    pass


class Infeasible(EapmError, RuntimeError):
    pass


class NumericalFailure(EapmError, RuntimeError):
    pass


class SamplingExhausted(EapmError, RuntimeError):
    pass


class InfeasibleObservation(EapmError, ValueError):
    pass


class OptimizationFailure(EapmError, RuntimeError):
    pass


class VerificationFailed(EapmError, AssertionError):
    """Raised by the verification suite; the message names the violated invariant."""
