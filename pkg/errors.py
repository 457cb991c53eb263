"""Exceptions raised by the simulator."""


class SimulationError(Exception):
    """Base class for every error the simulator raises on purpose."""


class ConfigError(SimulationError, ValueError):
    """A configuration value or command-line usage is invalid.

    The message always names the offending key so the CLI can echo it back.
    """

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(message)


class ProtocolError(SimulationError):
    """A round engine broke one of its own rules (a bug, not bad input)."""


class TopologyError(SimulationError):
    """A beta backbone could not be built or routed."""
