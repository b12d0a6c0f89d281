"""Upper half-plane primitives.

Points are plain Python ``complex`` numbers (or numpy complex arrays where a
function says so). Every angle uses the principal branch ``(-pi, pi]``; the cut
is the negative real axis, which carries angle ``+pi``.

The Moebius map ``ell_phi(t) = t / (1 + (t - 1) / phi)`` fixes 0 and 1 and sends
the upper half-plane onto the disc bounded by the circle through ``0, 1, phi``.
The region ``D_phi^-`` is the image under ``ell_phi`` of the wedge
``{t : Arg(t - 1) >= Arg(phi - 1)}``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from numbers import Number

import numpy as np

from pickdyn.errors import CoincidentPointError, DegenerateError, DomainError, PoleError
from pickdyn.rng import uniform

# log-radius span of the wedge sampler, about the apex 1
SAMPLE_RHO_MIN = 1e-6
SAMPLE_RHO_MAX = 1e6


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DegenerateError(f"circle radius must be positive and finite, got {self.radius}")

    def signed_distance(self, t):
        """Distance of ``t`` outside the circle (negative inside)."""
        return np.abs(np.asarray(t) - self.center) - self.radius


def _is_scalar(z) -> bool:
    return isinstance(z, Number)


def _check_finite(*zs):
    for z in zs:
        if _is_scalar(z):
            if not cmath.isfinite(z):
                raise DomainError(f"non-finite point {z!r}")
        elif not np.all(np.isfinite(z)):
            raise DomainError("non-finite point in array")


def _phase(z: complex) -> float:
    a = cmath.phase(z)
    # -0.0 imaginary parts would give -pi on the cut
    return math.pi if a == -math.pi else a


def arg_about(z, base=1.0):
    """Principal argument of ``z - base`` in ``(-pi, pi]``."""
    if _is_scalar(z):
        _check_finite(z, base)
        if z == base:
            raise CoincidentPointError(f"argument about {base!r} undefined at the point itself")
        return _phase(complex(z) - base)
    d = np.asarray(z, dtype=complex) - base
    if np.any(d == 0):
        raise CoincidentPointError("argument undefined at coincident points")
    a = np.angle(d)
    return np.where(a == -np.pi, np.pi, a)


def principal_root(z, alpha: float):
    """Principal ``alpha``-th root ``|z|**(1/alpha) * exp(i Arg(z) / alpha)``.

    ``0`` maps to ``0`` by convention. Works on scalars and numpy arrays.
    """
    if not alpha >= 1:
        raise DomainError(f"root exponent must be >= 1, got {alpha}")
    if _is_scalar(z):
        _check_finite(z)
        z = complex(z)
        if z == 0 or alpha == 1:
            return z
        if z.imag == 0 and z.real > 0:
            return complex(z.real ** (1.0 / alpha), 0.0)
        return cmath.rect(abs(z) ** (1.0 / alpha), _phase(z) / alpha)
    z = np.asarray(z, dtype=complex)
    if alpha == 1:
        return z.copy()
    ang = np.angle(z)
    ang = np.where(ang == -np.pi, np.pi, ang)
    return np.abs(z) ** (1.0 / alpha) * np.exp(1j * ang / alpha)


def _check_phi(phi, allow_real: bool):
    _check_finite(phi)
    phi = complex(phi)
    if phi.imag > 0:
        return phi
    if allow_real and phi.imag == 0 and phi.real > 1:
        return phi
    raise DegenerateError(f"phi must lie in the upper half-plane, got {phi!r}")


def moebius_forward(phi, t):
    """``ell_phi(t) = t * phi / (phi + t - 1)``; fixes 0 and 1 exactly.

    ``phi`` may also be a real number > 1 (used by real-axis solves).
    """
    phi = _check_phi(phi, allow_real=True)
    if _is_scalar(t):
        _check_finite(t)
        if t == 0 or t == 1:
            return complex(t)
        den = phi + t - 1
        if den == 0:
            raise PoleError(f"t = 1 - phi is the pole of ell_phi (phi={phi!r})")
        return t * phi / den
    t = np.asarray(t, dtype=complex)
    den = phi + t - 1
    if np.any(den == 0):
        raise PoleError("t = 1 - phi is the pole of ell_phi")
    out = t * phi / den
    out[t == 1] = 1
    return out


def moebius_inverse(phi, s):
    """Inverse of :func:`moebius_forward`: ``s * (phi - 1) / (phi - s)``."""
    phi = _check_phi(phi, allow_real=True)
    if _is_scalar(s):
        _check_finite(s)
        if s == 0 or s == 1:
            return complex(s)
        if s == phi:
            raise PoleError(f"s = phi is the pole of ell_phi^-1 (phi={phi!r})")
        return s * (phi - 1) / (phi - s)
    s = np.asarray(s, dtype=complex)
    if np.any(s == phi):
        raise PoleError("s = phi is the pole of ell_phi^-1")
    out = s * (phi - 1) / (phi - s)
    out[s == 1] = 1
    return out


def circumcircle(phi) -> Circle:
    """Circle through ``0``, ``1`` and ``phi``. Its center has real part 1/2."""
    _check_finite(phi)
    phi = complex(phi)
    x, y = phi.real, phi.imag
    if y == 0:
        raise DegenerateError(f"0, 1 and {phi!r} are collinear")
    k = (x * x - x + y * y) / (2 * y)
    center = complex(0.5, k)
    return Circle(center, math.hypot(0.5, k))


def in_disc(phi, t, tol: float = 0.0):
    """Membership in the closed disc ``D_phi`` bounded by the circle through 0, 1, phi."""
    _check_phi(phi, allow_real=False)
    c = circumcircle(phi)
    res = c.signed_distance(t) <= tol
    return bool(res) if np.ndim(res) == 0 else res


def in_region_dminus(phi, t, tol: float = 0.0) -> bool:
    """Membership in ``D_phi^-``, tested on the pre-image ``s = ell_phi^-1(t)``.

    ``s`` must lie in the closed upper half-plane with ``Arg(s - 1) >= Arg(phi - 1)``.
    The half-plane test is relative to ``1 + |s|``; a slightly negative imaginary
    part inside that tolerance is read as a point of the real axis.
    """
    phi = _check_phi(phi, allow_real=False)
    s = moebius_inverse(phi, t)
    if s == 1:
        return True
    if s.imag < -tol * (1 + abs(s)):
        return False
    ang = _phase(complex(s.real - 1, max(s.imag, 0.0)))
    return ang >= arg_about(phi, 1) - tol


def sample_dminus(phi, n: int, seed: int) -> np.ndarray:
    """``n`` deterministic points of ``D_phi^-``.

    The wedge pre-image ``1 + rho * exp(i theta)`` is sampled with ``theta``
    uniform on ``[Arg(phi - 1), pi]`` and ``log rho`` uniform on
    ``[log 1e-6, log 1e6]`` (even/odd SplitMix64 draws), then pushed forward by
    ``ell_phi``.
    """
    phi = _check_phi(phi, allow_real=False)
    if n < 1:
        raise DomainError("need at least one sample")
    u = uniform(seed, 2 * n)
    theta0 = arg_about(phi, 1)
    theta = theta0 + (math.pi - theta0) * u[0::2]
    lo, hi = math.log(SAMPLE_RHO_MIN), math.log(SAMPLE_RHO_MAX)
    rho = np.exp(lo + (hi - lo) * u[1::2])
    s = 1 + rho * np.exp(1j * theta)
    return moebius_forward(phi, s)
