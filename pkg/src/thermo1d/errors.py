"""Exception hierarchy shared by every module."""


class Thermo1dError(Exception):
    """Base class for all package errors."""


class ConfigurationError(Thermo1dError, ValueError):
    """Invalid grid or run parameters."""


class ContractError(Thermo1dError, ValueError):
    """An operation was called with arguments violating its precondition."""


class NonPositiveTemperature(ContractError):
    """Initial temperature reaches zero or below somewhere."""


class BoundaryViolation(ContractError):
    """Displacement or velocity does not vanish at an endpoint."""


class FloorTripped(ContractError):
    """Temperature fell below the division floor of a functional."""


class PositivityGuardTripped(Thermo1dError):
    """The discrete temperature reached the run's positivity guard."""


class Diverged(Thermo1dError):
    """A non-finite value appeared during time stepping."""
