class ConvergenceError(RuntimeError):
    """A defect-type series did not settle within its degree cap."""


class NotInDomainError(ValueError):
    pass


class NotPureError(ValueError):
    pass


class NotMultiAnalyticError(ValueError):
    """The operator fails to intertwine the creation tuples."""


class GateError(ValueError):
    """The Berezin kernel is not a partial isometry, so no Wold split is attempted."""
