"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(SimulationError):
    """Invalid scene, device, or run configuration."""


class GeometryError(SimulationError):
    """Degenerate geometric input, e.g. a zero-length direction."""


class ParameterError(SimulationError):
    """Algorithm parameter outside its valid range."""


class DataError(SimulationError):
    """Missing or inconsistent per-user data, e.g. an absent channel gain."""


class UnservableUserError(SimulationError):
    """No access point has a positive gain toward the listed users."""

    def __init__(self, user_ids):
        self.user_ids = list(user_ids)
        super().__init__(
            "users with no positive gain to any AP: %s" % self.user_ids
        )
