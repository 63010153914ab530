"""Exception hierarchy.

Every error raised deliberately by the package derives from ``SSRError`` so
callers (and the CLI) can tell validation failures apart from bugs.
"""


class SSRError(Exception):
    """Base class for all package errors."""


class GroupAxiomError(SSRError, ValueError):
    """A Cayley table violates a group axiom.

    ``axiom`` is one of ``"shape"``, ``"closure"``, ``"identity"``,
    ``"inverse"``, ``"associativity"``.
    """

    def __init__(self, axiom, message):
        super().__init__(f"{axiom}: {message}")
        self.axiom = axiom


class UnsupportedGroupError(SSRError, ValueError):
    pass


class InconsistentIrrepsError(SSRError, ValueError):
    pass


class ChargeSystemError(SSRError, ValueError):
    pass


class TruncationError(SSRError, ValueError):
    """An operation would populate a sector clipped by a truncated system."""


class SectorError(SSRError, ValueError):
    """Amplitude or operator data inconsistent with the sector structure."""


class NontrivialChargeError(SSRError, ValueError):
    """The construction requires trivial total charge; reduce first."""


class ResourceError(SSRError, RuntimeError):
    """A dense computation would exceed the configured size cap."""


class ValidationError(SSRError, ValueError):
    pass


class UnsupportedError(SSRError, NotImplementedError):
    pass


class SchemaError(SSRError, ValueError):
    """Malformed structured-text input; ``where`` names the field path."""

    def __init__(self, where, message):
        super().__init__(f"{where}: {message}")
        self.where = where
