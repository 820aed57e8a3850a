"""Exception types shared by the guidance, scenario, and simulator layers."""


class BpdgError(Exception):
    """Base class for every error raised by this package."""


class InfeasibleAxis(BpdgError):
    """Initial velocity on this axis does not move the vehicle toward its target."""


class DegenerateAxis(BpdgError):
    """Axis is stationary (v0 = 0) but not already at its target."""


class NoEquilibria(BpdgError):
    """Velocity field has no real equilibrium points for these parameters."""


class NoInteriorExtremum(BpdgError):
    """Acceleration command has no interior extremum for these parameters."""


class InvalidBound(BpdgError):
    """Settling tolerance lies outside the validity range of the settling-time formula."""


class DomainError(BpdgError):
    """Closed-form trajectory is undefined for these parameters or start position."""


class ParseError(BpdgError):
    """Scenario text could not be parsed."""


class ValidationError(BpdgError):
    """Scenario violates an invariant; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class FuelDepleted(BpdgError):
    """Vehicle mass would drop below dry mass."""

    def __init__(self, t: float):
        super().__init__(f"fuel depleted at t={t:.3f} s")
        self.t = t
