"""Exception types shared across the package."""


class SpinPhotonError(Exception):
    """Base class for all package-specific errors."""


class InvalidParamsError(SpinPhotonError, ValueError):
    """System parameters violate their invariants."""


class RegimeError(SpinPhotonError, ValueError):
    """An analytic formula was requested outside its validity regime."""


class TruncationOverflowError(SpinPhotonError, RuntimeError):
    """A Fock-space operation lost more norm than the allowed tolerance."""


class SingularParamsError(SpinPhotonError, ValueError):
    """A closed form hit a pole in parameter space."""


class StiffnessError(SpinPhotonError, RuntimeError):
    """The ODE integrator could not proceed at the requested tolerance."""


class UndefinedConcurrenceError(SpinPhotonError, ValueError):
    """The single-excitation block carries no statistical weight."""
