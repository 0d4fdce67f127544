"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class SizeError(ValueError):
    """A computation would exceed its configured size guard."""


class ConfigError(ValueError):
    """Malformed experiment configuration.

    ``field`` names the offending ``[section] key`` so the CLI can point at it.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class StructuralZeroVariance(ArithmeticError):
    """The sampled traces are (numerically) constant, so Z_k cannot be formed.

    The raw traces are kept on the exception for inspection.
    """

    def __init__(self, message, raw_traces=None):
        super().__init__(message)
        self.raw_traces = raw_traces


class BoundVacuous(ArithmeticError):
    """The distinct-index cycle sum vanishes and the TV bound says nothing."""
