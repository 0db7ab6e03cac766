"""Exception types shared across the package."""


class FppError(Exception):
    """Base class for all package errors."""


class ConfigError(FppError, ValueError):
    pass


class LatticeError(ConfigError):
    """Invalid generating set (not symmetric, contains 0, does not span Z^d)."""


class NotAdjacent(FppError, ValueError):
    pass


class LawError(ConfigError):
    """Invalid or unsupported weight law."""


class HeavyTailError(LawError):
    """Law without an exponential moment."""


class ResourceLimit(FppError, RuntimeError):
    """A search region or point budget was exceeded before the answer was certified."""


class ThresholdViolation(FppError, ValueError):
    """Scale parameter below the configured alpha_0 threshold."""


class EmptySearchRegion(FppError, ValueError):
    pass


class DomainError(FppError, ValueError):
    pass
