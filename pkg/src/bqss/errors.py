"""Exception types shared across the package."""


class BqssError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(BqssError):
    """Invalid or inconsistent run configuration."""


class DegenerateFrequency(BqssError):
    """An operation was requested at a frequency slot where it is undefined."""


class SingularSymbol(BqssError):
    """A symbol matrix is numerically singular and cannot be inverted."""


class RemapOutOfBand(BqssError):
    """A frame remap would move spectral mass outside the resolved band."""


class BoundViolation(BqssError):
    """A verified multiplier bound failed; carries the offending slot."""

    def __init__(self, name, slot, value, limit):
        self.name = name
        self.slot = slot
        self.value = value
        self.limit = limit
        super().__init__(f"{name} violated at slot {slot}: {value!r} vs limit {limit!r}")


class QuadratureNoConvergence(BqssError):
    """Adaptive quadrature failed to meet tolerance at maximum depth."""


class NonzeroMeanInZ(BqssError):
    """Dispersive semigroup input has a nontrivial z-mean (l = 0) slice."""


class InsufficientSamples(BqssError):
    """Too few samples in the requested fit window."""


class CFLViolation(BqssError):
    """Requested time step exceeds the advective stability limit."""


class NaNDetected(BqssError):
    """A field became non-finite during time integration."""


class CoercivityLost(BqssError):
    """The energy cross-term sandwich failed beyond tolerance (internal bug)."""
