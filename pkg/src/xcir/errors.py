"""Exception types shared across the package."""


class XcirError(Exception):
    """Base class for package-specific failures."""


class SolverError(XcirError):
    """An ODE or root solve left its validity region (e.g. Riccati blow-up)."""


class InversionError(XcirError):
    """A transform inversion failed to converge.

    Carries a ``diagnostics`` dict (partial sums, truncation point, ...) so
    callers can report what the inversion saw.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ResourceLimitError(XcirError):
    """A configured resource cap (component count, term count) was exceeded."""
