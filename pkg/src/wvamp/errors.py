"""Exception and warning types shared across the package."""


class WvampError(Exception):
    """Base class for all package-specific errors."""


class RegisterError(WvampError):
    """Qubit registers of the operands do not line up."""


class OrthogonalPostselection(WvampError):
    """Postselection overlap is numerically zero, so the weak value is undefined."""


class VanishingBranch(WvampError):
    """The kept branch has underflowed to zero probability."""


class DegenerateObservable(WvampError):
    """The single-ancilla observable has no spectral range, so no amplification exists."""


class DegeneratePrep(WvampError):
    """The preparation is an eigenstate of the observable (zero variance)."""


class ZeroSecondMoment(WvampError):
    """The observable's second moment vanishes on the preparation."""


class StepTooLarge(WvampError):
    """Halving the finite-difference step moved the result beyond the tolerance."""


class IncompleteBasis(WvampError):
    """The supplied outcome basis is not orthonormal and complete."""


class ConfigError(WvampError):
    """Invalid scan configuration or command-line usage."""


class RegimeError(WvampError):
    """Scan parameters violate an enforced linear-response precondition."""


class IoError(WvampError):
    """Report could not be written to the requested path."""


class RegimeWarning(UserWarning):
    """Closed-form approximation used outside its linear-response validity region."""
