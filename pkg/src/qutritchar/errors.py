"""Exception types shared across the package."""


class CharacterizerError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(CharacterizerError, ValueError):
    """A physical or configuration parameter is outside its allowed domain."""


class UnsupportedModelError(CharacterizerError, ValueError):
    """The operation does not cover this model (e.g. nonzero 1-3 coupling)."""


class DegenerateBasisError(CharacterizerError, RuntimeError):
    """The cosine basis is numerically rank-deficient (e.g. delta_omega = 0).

    Callers should fall back to the reduced single-frequency model.
    """


class UnphysicalModelError(CharacterizerError, ValueError):
    """Fitted signal parameters admit no Hamiltonian of the supported form."""

    def __init__(self, reason, message=None):
        self.reason = reason
        super().__init__(message or "unphysical model: %s" % reason)


class TraceParseError(CharacterizerError, ValueError):
    """A trace or table file could not be parsed."""
