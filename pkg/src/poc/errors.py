"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the documented domain of an operation."""


class SupportError(ValueError):
    """A realized value has zero probability under the relevant belief."""

    def __init__(self, message, value=None, step=None):
        super().__init__(message)
        self.value = value
        self.step = step


class NumericError(ArithmeticError):
    """A non-finite value appeared where a finite one is required."""


class CapacityError(RuntimeError):
    """An enumeration or scenario set exceeded its configured cap."""


class InfeasibleControlError(ValueError):
    """No admissible control satisfies the actuator constraints."""


class ConfigError(ValueError):
    """An experiment configuration file is invalid; names the offending field."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
