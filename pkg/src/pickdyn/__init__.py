"""Pick functions of dynamically determined exponents in the power-law family.

The family is ``f_a(x) = -|x|**alpha + a``. The exponents ``p2, p3, p4`` are
cross-ratio (Poincare length) quantities of the critical orbit. This package
solves the functional equations tying them together in the upper half-plane
and numerically certifies the Pick / argument-lessening properties.
"""

from pickdyn.errors import (
    CoincidentPointError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    HalfPlaneExitError,
    NestingError,
    PickDynError,
    PoleError,
)

__version__ = "0.1.0"

__all__ = [
    "CoincidentPointError",
    "ConvergenceError",
    "DegenerateError",
    "DomainError",
    "HalfPlaneExitError",
    "NestingError",
    "PickDynError",
    "PoleError",
    "__version__",
]
