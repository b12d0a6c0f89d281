"""Critical orbit of ``f_a(x) = -|x|**alpha + a`` and its Poincare exponents.

``p2 = (1 - a**(alpha-1))**-1`` and, for ``n = 3, 4``, ``p_n`` is the cross-ratio

    (x[n-3] - x[n]) / (x[n-3] - x[n-1]) * (x[n-1] - x[n-2]) / (x[n] - x[n-2])

of the critical orbit ``x[k] = f_a^k(0)``. Only ``n`` up to 4 is supported.

Orbit differences are never taken by subtracting stored points. For ``j, k >= 1``
``x[j] - x[k] = |x[k-1]|**alpha - |x[j-1]|**alpha``, and a difference of powers is
``u**alpha * expm1(alpha * log1p((v - u) / u))`` with ``v - u`` itself a gap one
level down. This keeps full relative accuracy when ``a`` is small or ``alpha``
large, where the points agree to many digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from pickdyn.errors import DomainError, NestingError
from pickdyn.halfplane import moebius_inverse

SUPPORTED_N = (3, 4)
P4_RESOLVED = 1e-12


@dataclass(frozen=True)
class FamilyParams:
    alpha: float
    a: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 1):
            raise DomainError(f"alpha must be >= 1, got {self.alpha}")
        if not (0 <= self.a < 1):
            raise DomainError(f"a must lie in [0, 1), got {self.a}")


@dataclass(frozen=True)
class CriticalOrbit:
    params: FamilyParams
    points: tuple

    def __len__(self):
        return len(self.points)

    @cached_property
    def _gaps(self) -> dict:
        return {}

    def gap(self, j: int, k: int) -> float:
        """``x[j] - x[k]`` evaluated without cancellation."""
        if j == k:
            return 0.0
        key = (j, k)
        cache = self._gaps
        if key in cache:
            return cache[key]
        x = self.points
        if j == 0:
            val = -x[k]
        elif k == 0:
            val = x[j]
        else:
            u, v = x[j - 1], x[k - 1]
            if u >= 0 and v >= 0:
                val = _power_gap(u, v, self.gap(k - 1, j - 1), self.params.alpha)
            else:
                val = x[j] - x[k]
        cache[key] = val
        return val


def _power_gap(u: float, v: float, v_minus_u: float, alpha: float) -> float:
    # v**alpha - u**alpha for u, v >= 0
    if u == 0:
        return v**alpha
    if v == 0:
        return -(u**alpha)
    r = v_minus_u / u
    if abs(r) > 0.5:
        return v**alpha - u**alpha
    return u**alpha * math.expm1(alpha * math.log1p(r))


@dataclass(frozen=True)
class ExponentTriple:
    p2: float
    p3: float
    p4: float
    eq1_residual: float
    eq3_residual: float


def power_map(params: FamilyParams, x: float) -> float:
    if x == 0:
        return params.a
    return -math.exp(params.alpha * math.log(abs(x))) + params.a


def critical_orbit(params: FamilyParams, n: int) -> CriticalOrbit:
    """``x[0..n]`` with ``x[0] = 0``."""
    if n < 1:
        raise DomainError("orbit length n must be >= 1")
    pts = [0.0]
    for _ in range(n):
        x = power_map(params, pts[-1])
        if not math.isfinite(x):
            raise DomainError(f"orbit diverged at {params}")
        pts.append(x)
    return CriticalOrbit(params, tuple(pts))


def p2_closed(params: FamilyParams) -> float:
    """``(1 - a**(alpha - 1))**-1``."""
    if params.alpha == 1:
        raise DomainError("p2 closed form is undefined at alpha = 1")
    if params.a == 0:
        return 1.0
    # 1 - a**(alpha-1) = -expm1((alpha-1) log a)
    return -1.0 / math.expm1((params.alpha - 1) * math.log(params.a))


def _check_n(orbit: CriticalOrbit, n: int):
    if n not in SUPPORTED_N:
        raise DomainError(f"p_n is implemented for n in {SUPPORTED_N} only, got n={n}")
    if len(orbit) < n + 1:
        raise DomainError(f"orbit has {len(orbit)} points, p_{n} needs {n + 1}")


def validate_nesting(orbit: CriticalOrbit, n: int) -> bool:
    """True iff ``(x[n-1], x[n])`` lies strictly inside ``(x[n-2], x[n-3])``."""
    _check_n(orbit, n)
    g = orbit.gap
    if g(n, n - 1) == 0 or g(n - 2, n - 3) == 0:
        return False
    for y in (n - 1, n):
        d1, d2 = g(y, n - 2), g(y, n - 3)
        if not (d1 * d2 < 0):
            return False
    return True


def pn_cross_ratio(orbit: CriticalOrbit, n: int) -> float:
    _check_n(orbit, n)
    if not validate_nesting(orbit, n):
        raise NestingError(f"orbit intervals are not nested for n={n} at {orbit.params}")
    g = orbit.gap
    num1, den1 = g(n - 3, n), g(n - 3, n - 1)
    num2, den2 = g(n - 1, n - 2), g(n, n - 2)
    if den1 == 0 or den2 == 0:
        raise ZeroDivisionError("coincident orbit points")
    return (num1 / den1) * (num2 / den2)


def eq1_residual(alpha: float, p2: float, p3: float) -> float:
    return abs(p2 - (1 + (p3 - 1) / p2) ** (1.0 / alpha))


def eq3_rhs(alpha: float, p2: float, p4: float) -> float:
    """Right side of the p3(p4) relation evaluated on the real axis."""
    if p2 == 1:
        # p2 rounded to 1: every map in the relation collapses onto the fixed point 1
        return 1.0
    psi = p2**alpha
    inner = (p4 / (1 + (p4 - 1) / psi)) ** (1.0 / alpha)
    return moebius_inverse(p2, inner).real


def orbit_exponents(params: FamilyParams) -> ExponentTriple:
    if not 0 < params.a < 1:
        raise DomainError(f"exponents need a in (0, 1), got {params.a}")
    orbit = critical_orbit(params, 4)
    p2 = p2_closed(params)
    p3 = pn_cross_ratio(orbit, 3)
    p4 = pn_cross_ratio(orbit, 4)
    r1 = eq1_residual(params.alpha, p2, p3)
    r3 = abs(p3 - eq3_rhs(params.alpha, p2, p4))
    return ExponentTriple(p2, p3, p4, r1, r3)


def p4_of_a(alpha: float, a: float) -> float:
    return pn_cross_ratio(critical_orbit(FamilyParams(alpha, a), 4), 4)


def _scan_grid(samples: int) -> np.ndarray:
    # logistic spacing resolves both ends of (0, 1)
    lo, hi = math.log(1e-12), math.log(1e12)
    t = np.linspace(lo, hi, samples)
    return 1.0 / (1.0 + np.exp(-t))


def nesting_range(alpha: float, n: int = 4, samples: int = 600) -> tuple[float, float]:
    """Largest contiguous scanned a-interval on which p3 .. p_n are defined.

    Returned endpoints are scan points where nesting (for every order up to
    ``n``) was verified.
    """
    if n not in SUPPORTED_N:
        raise DomainError(f"n must be one of {SUPPORTED_N}")
    best, cur = None, None
    for a in _scan_grid(samples):
        a = float(a)
        try:
            orbit = critical_orbit(FamilyParams(alpha, a), n)
            ok = all(validate_nesting(orbit, m) for m in range(3, n + 1))
        except DomainError:
            ok = False
        if ok:
            cur = (cur[0], a) if cur else (a, a)
            if best is None or cur[1] - cur[0] > best[1] - best[0]:
                best = cur
        else:
            cur = None
    if best is None:
        raise NestingError(f"no a in (0, 1) gives nested intervals for alpha={alpha}, n={n}")
    return best


def invert_p4_to_a(alpha: float, p4_target: float, tol: float = 1e-12, samples: int = 600) -> float:
    """Parameter ``a`` whose critical orbit has ``p4 == p4_target``, by bisection.

    Monotonicity of ``p4(a)`` on the scanned nesting range is checked first.
    """
    grid = [float(a) for a in _scan_grid(samples)]
    lo, hi = nesting_range(alpha, 4, samples)
    grid = [a for a in grid if lo <= a <= hi]
    vals = [p4_of_a(alpha, a) for a in grid]
    # near a = 0 the excess p4 - 1 is rounding noise; invert only where it is resolved
    first = next((i for i, v in enumerate(vals) if v - 1 > P4_RESOLVED), len(vals))
    start = max(first - 1, 0)
    stop = next((i for i, v in enumerate(vals) if not math.isfinite(v)), len(vals))
    grid, vals = grid[start:stop], vals[start:stop]
    if any(not (v2 > v1) for v1, v2 in zip(vals, vals[1:])):
        raise DomainError(f"p4(a) is not monotone on the nesting range for alpha={alpha}")
    if not vals[0] <= p4_target <= vals[-1]:
        raise DomainError(
            f"p4 target {p4_target} outside attained range [{vals[0]}, {vals[-1]}] for alpha={alpha}"
        )
    i = int(np.searchsorted(vals, p4_target))
    if vals[i] == p4_target:
        return grid[i]
    a_lo, a_hi = grid[i - 1], grid[i]
    while True:
        mid = 0.5 * (a_lo + a_hi)
        if mid in (a_lo, a_hi):
            break
        v = p4_of_a(alpha, mid)
        if abs(v - p4_target) <= tol:
            return mid
        if v < p4_target:
            a_lo = mid
        else:
            a_hi = mid
    # bracket at ulp width; return the closer end
    d_lo = abs(p4_of_a(alpha, a_lo) - p4_target)
    d_hi = abs(p4_of_a(alpha, a_hi) - p4_target)
    return a_lo if d_lo <= d_hi else a_hi
