"""Exception and warning types shared across the package."""


class SimulationError(Exception):
    """Base class for physics-level errors."""


class CutoffError(SimulationError):
    """A Fock-space truncation is too small to hold the requested state."""


class ZeroProbabilityError(SimulationError):
    """Conditioning on an event of (numerically) zero probability."""


class DegenerateStateError(SimulationError):
    """An operation hit a degenerate input (e.g. dividing by 1 - P(0,t) = 0)."""


class ConfigError(SimulationError):
    """A scenario configuration is malformed; the message names the offending key."""


class RegimeWarning(UserWarning):
    """An asymptotic-regime precondition is violated; the result may be biased."""
