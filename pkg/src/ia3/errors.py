"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed or out-of-contract input (non-finite entries, bad shapes, ...)."""


class RegimeError(ValueError):
    """Antenna ratio M/N outside the regime the requested scheme supports."""


class InfeasibleError(RuntimeError):
    """Requested stream counts exceed what the solution space provides."""


class NotCertifiableError(RuntimeError):
    """Receiver-side construction failed (interference fills the receive space,
    or the effective direct channel lost rank)."""
