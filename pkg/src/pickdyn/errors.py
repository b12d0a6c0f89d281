"""Exception hierarchy. Everything derives from ``PickDynError`` (a ``ValueError``)."""


class PickDynError(ValueError):
    pass


class DomainError(PickDynError):
    """An argument lies outside the domain of the operation."""


class CoincidentPointError(DomainError):
    pass


class PoleError(DomainError):
    pass


class DegenerateError(DomainError):
    """Geometry built from a point on (or below) the real axis."""


class NestingError(DomainError):
    """Critical-orbit intervals are not nested, so the cross-ratio is not a p_n."""


class ConvergenceError(PickDynError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class HalfPlaneExitError(PickDynError):
    """An iterate left the closed upper half-plane."""
