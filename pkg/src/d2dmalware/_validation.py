"""Exception types and small argument checks shared across the package."""

import math


class ParameterError(ValueError):
    """An argument is outside the domain an operation accepts."""


class ConfigurationError(ValueError):
    """A simulation configuration is incomplete or inconsistent."""


class SimulationEnvironmentError(RuntimeError):
    """A random environment could not be realized (e.g. no streets at all)."""


class PercolationError(RuntimeError):
    """No sampled environment connects patient zero to the survival radius."""


class InvariantViolation(AssertionError):
    """A runtime invariant of the dynamics failed; indicates a bug."""


class EventCapExceeded(RuntimeError):
    """A trajectory processed more events than its configured hard cap."""


def check_positive(value, name):
    value = float(value)
    if not (value > 0) or math.isnan(value):
        raise ParameterError(f"{name} must be > 0, got {value!r}")
    return value


def check_nonnegative(value, name):
    value = float(value)
    if not (value >= 0) or math.isnan(value):
        raise ParameterError(f"{name} must be >= 0, got {value!r}")
    return value


def check_fraction(value, name):
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ParameterError(f"{name} must lie in (0, 1), got {value!r}")
    return value
