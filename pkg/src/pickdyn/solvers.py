"""Solutions of the two functional equations by iteration of Pick operators.

``p2(p3)`` is the fixed point in ``x`` of

    R: x -> (1 + (z - 1) / x) ** (1 / alpha)          (z = p3)

and ``p3(p4)`` the fixed point in ``z`` of

    Rcal: z -> ell^-1_{p2(z)}( (w / (1 + (w - 1) / psi(z))) ** (1 / alpha) )   (w = p4)

with ``psi(z) = p2(z) ** alpha``. Both operators send the class of Pick
functions fixing 1 into itself. Iteration starts from the identity, as in
the averaging argument that produces the solutions. Three methods are offered:

``scalar-root``
    real axis only for ``p2``: safeguarded Newton on ``x**(alpha+1) - x = p3 - 1``.
``fixed-point``
    plain iteration; on stalling, retried with damping 0.5, then with Cesaro means.
``cesaro``
    means of operator iterates. A mean of such functions is again one, so the
    mean of a window seeds the next window. Plain running means converge like
    ``1/n`` and restarting is what makes tight tolerances reachable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

from pickdyn.errors import ConvergenceError, DomainError, HalfPlaneExitError
from pickdyn.halfplane import moebius_inverse, principal_root

log = logging.getLogger(__name__)

METHODS = ("scalar-root", "fixed-point", "cesaro")
SCALAR_TOL = 1e-12
COMPLEX_TOL = 1e-10
CESARO_WINDOW = 4
EPS = 2.220446049250313e-16
# residuals this small are rounding noise; no further iteration can reduce them
NOISE_FLOOR = 8 * EPS


@dataclass(frozen=True)
class SolverConfig:
    method: str = "fixed-point"
    tol: float | None = None
    max_iter: int = 10_000
    damping: float = 1.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.tol is not None and not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise DomainError("damping must lie in (0, 1]")

    def tol_for(self, scalar: bool) -> float:
        if self.tol is not None:
            return self.tol
        return SCALAR_TOL if scalar else COMPLEX_TOL


@dataclass
class SolveResult:
    value: complex
    iterations: int
    converged: bool
    residual: float
    method: str = "fixed-point"
    # False when successive Cesaro means failed to shrink monotonically
    cauchy: bool = True
    extra: dict = field(default_factory=dict)


def _as_point(z, name: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{name} must be finite, got {z!r}")
    return z


def _check_closed_h(z: complex, name: str):
    if z.imag < 0:
        raise DomainError(f"{name} must lie in the closed upper half-plane, got {z!r}")
    if z.imag == 0 and z.real < 1:
        raise DomainError(f"real {name} must be >= 1, got {z.real}")


# --- p2 equation ----------------------------------------------------------


def r_step(alpha: float, z, x):
    """One application of ``R``: ``(1 + (z - 1) / x) ** (1 / alpha)``."""
    if x == 0:
        raise DomainError("R is undefined at x = 0")
    return principal_root(1 + (complex(z) - 1) / complex(x), alpha)


def p2_prime(alpha: float, p2: float) -> float:
    """``dp2/dp3 = 1 / ((alpha + 1) p2**alpha - 1)`` by implicit differentiation."""
    if p2 < 1:
        raise DomainError(f"p2 must be >= 1, got {p2}")
    den = (alpha + 1) * p2**alpha - 1
    if not den > 0:
        raise DomainError("singular derivative")
    return 1.0 / den


def solve_p2_scalar(alpha: float, p3: float, cfg: SolverConfig | None = None) -> SolveResult:
    """Real root ``x >= 1`` of ``x**(alpha+1) - x = p3 - 1``.

    Newton from the right end of the bracket, with bisection whenever a step
    leaves it. The reported residual is ``|h(x)| / (1 + |p3 - 1|)``.
    """
    cfg = cfg or SolverConfig(method="scalar-root")
    tol = cfg.tol_for(scalar=True)
    if not alpha >= 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    p3 = float(p3)
    if not p3 >= 1 or not math.isfinite(p3):
        raise DomainError(f"p3 must be >= 1, got {p3}")
    c = p3 - 1
    if c == 0:
        return SolveResult(1.0, 0, True, 0.0, "scalar-root")

    def h(x):
        return math.exp((alpha + 1) * math.log(x)) - x - c

    def dh(x):
        return (alpha + 1) * math.exp(alpha * math.log(x)) - 1

    # x <= max(1, p3) implies x**(alpha+1) = c + x <= 2 p3 - 1
    lo, hi = 1.0, min(max(1.0, p3), (2 * p3 - 1) ** (1 / (alpha + 1)))
    x = hi
    for it in range(1, cfg.max_iter + 1):
        hx = h(x)
        if hx > 0:
            hi = x
        elif hx < 0:
            lo = x
        else:
            break
        xn = x - hx / dh(x)
        if not lo <= xn <= hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 8 * EPS * xn or hi - lo <= 8 * EPS * hi:
            x = xn
            break
        x = xn
    else:
        res = abs(h(x)) / (1 + c)
        raise ConvergenceError(
            f"scalar p2 solve did not converge (alpha={alpha}, p3={p3})",
            SolveResult(x, cfg.max_iter, False, res, "scalar-root"),
        )
    res = abs(h(x)) / (1 + c)
    return SolveResult(x, it, res <= tol, res, "scalar-root")


def _done(res: float, step: float, prev: float | None, tol: float) -> bool:
    if res <= min(tol, NOISE_FLOOR):
        return True
    if not prev:
        return False
    if step >= prev:
        # no contraction left: at the rounding floor, accept if the residual meets tol
        return res <= tol
    # error bound step / (1 - q), q the observed contraction ratio
    return res / (1 - min(step / prev, 0.99)) <= tol


def _iterate(
    g: Callable[[complex], complex],
    x0: complex,
    tol: float,
    max_iter: int,
    damping: float,
    guard: Callable[[complex], None] | None,
) -> SolveResult:
    x = x0
    prev = None
    for it in range(max_iter):
        gx = g(x)
        step = abs(gx - x)
        res = step / (1 + abs(x))
        if _done(res, step, prev, tol):
            return SolveResult(x, it, True, res)
        prev = step
        x = x + damping * (gx - x)
        if not math.isfinite(abs(x)):
            break
        if guard:
            guard(x)
    return SolveResult(x, max_iter, False, float("inf") if not math.isfinite(abs(x)) else res)


def _cesaro(
    g: Callable[[complex], complex],
    x0: complex,
    tol: float,
    max_iter: int,
    guard: Callable[[complex], None] | None,
    window: int = CESARO_WINDOW,
) -> SolveResult:
    x = x0
    it = 0
    prev_move = math.inf
    cauchy = True
    res = math.inf
    prev = None
    while it < max_iter:
        gx = g(x)
        step = abs(gx - x)
        res = step / (1 + abs(x))
        if _done(res, step, prev, tol):
            _warn_non_cauchy(cauchy, prev_move)
            return SolveResult(x, it, True, res, "cesaro", cauchy)
        prev = step
        total, y = x, gx
        for _ in range(window - 1):
            total += y
            y = g(y)
        it += window
        mean = total / window
        move = abs(mean - x)
        if move > prev_move * (1 + 1e-9) and move > tol * (1 + abs(mean)):
            cauchy = False
        prev_move = move
        x = mean
        if guard:
            guard(x)
    _warn_non_cauchy(cauchy, prev_move)
    return SolveResult(x, it, False, res, "cesaro", cauchy)


def _warn_non_cauchy(cauchy: bool, move: float):
    if not cauchy:
        log.warning("Cesaro means were not Cauchy (last move %.3g)", move)


def _solve_fixed(g, x0, cfg: SolverConfig, tol: float, guard) -> SolveResult:
    if cfg.method == "cesaro":
        return _cesaro(g, x0, tol, cfg.max_iter, guard)
    res = _iterate(g, x0, tol, cfg.max_iter, cfg.damping, guard)
    res.method = "fixed-point"
    if res.converged:
        return res
    used = res.iterations
    if cfg.damping > 0.5:
        log.info("plain iteration stalled; retrying with damping 0.5")
        res = _iterate(g, x0, tol, cfg.max_iter, 0.5, guard)
        res.method = "fixed-point(damped)"
        used += res.iterations
        if res.converged:
            res.iterations = used
            return res
    log.info("damped iteration stalled; falling back to Cesaro means")
    res = _cesaro(g, x0, tol, cfg.max_iter, guard)
    res.iterations += used
    return res


def _half_plane_guard(z: complex, tol: float):
    if z.imag <= 0:
        return None

    def guard(x: complex):
        if x.imag < -tol * (1 + abs(x)):
            raise HalfPlaneExitError(f"iterate {x!r} left the upper half-plane (z={z!r})")

    return guard


def solve_p2_complex(
    alpha: float, z, cfg: SolverConfig | None = None, seed=None
) -> SolveResult:
    """``p2(z)`` by iterating ``R`` from ``x0 = z`` (or from ``seed``).

    With ``method='scalar-root'`` a real ``z`` is routed to
    :func:`solve_p2_scalar`; complex ``z`` then uses fixed-point iteration.
    """
    cfg = cfg or SolverConfig()
    z = _as_point(z, "z")
    _check_closed_h(z, "z")
    if not alpha >= 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    if z == 1:
        return SolveResult(1 + 0j, 0, True, 0.0, cfg.method)
    if cfg.method == "scalar-root":
        if z.imag == 0:
            r = solve_p2_scalar(alpha, z.real, cfg)
            r.value = complex(r.value)
            return r
        cfg = replace(cfg, method="fixed-point")
    tol = cfg.tol_for(scalar=z.imag == 0)
    x0 = z if seed is None else _as_point(seed, "seed")

    def g(x):
        return r_step(alpha, z, x)

    res = _solve_fixed(g, x0, cfg, tol, _half_plane_guard(z, tol))
    if not res.converged:
        raise ConvergenceError(f"p2 solve did not converge (alpha={alpha}, z={z!r})", res)
    return res


def psi(alpha: float, z, p2):
    """``p2(z)**alpha``, read off the p2 equation as ``1 + (z - 1) / p2``."""
    if p2 == 0:
        raise DomainError("psi is undefined at p2 = 0")
    return 1 + (complex(z) - 1) / complex(p2)


# --- p3 equation ----------------------------------------------------------


def _inner_cfg(cfg: SolverConfig, tol: float) -> SolverConfig:
    return SolverConfig(method="fixed-point", tol=max(tol * 1e-2, 1e-14), max_iter=cfg.max_iter)


def _p2_at(alpha: float, z: complex, cfg: SolverConfig, tol: float, seed=None) -> complex:
    if z.imag == 0 and z.real >= 1:
        return complex(solve_p2_scalar(alpha, z.real).value)
    return solve_p2_complex(alpha, z, _inner_cfg(cfg, tol), seed=seed).value


def _rcal(alpha: float, w: complex, z: complex, p2: complex) -> complex:
    if w == 1:
        return 1 + 0j
    ps = psi(alpha, z, p2)
    inner = principal_root(w / (1 + (w - 1) / ps), alpha)
    if p2 == 1:
        # ell_1 collapses; only the fixed point 1 survives
        return 1 + 0j
    return moebius_inverse(p2, inner)


def rcal_step(alpha: float, w, z, cfg: SolverConfig | None = None) -> complex:
    """One application of the ``p3``-operator at ``w`` to the current value ``z``."""
    cfg = cfg or SolverConfig()
    w, z = _as_point(w, "w"), _as_point(z, "z")
    _check_closed_h(w, "w")
    _check_closed_h(z, "z")
    tol = cfg.tol_for(scalar=w.imag == 0 and z.imag == 0)
    return _rcal(alpha, w, z, _p2_at(alpha, z, cfg, tol))


def solve_p3_complex(
    alpha: float, w, cfg: SolverConfig | None = None, seed=None
) -> SolveResult:
    """``p3(w)`` as the fixed point of the ``p3``-operator, started at ``z0 = w``.

    Each step recomputes ``p2`` at the current ``z``: scalar Newton on the real
    axis, warm-started complex iteration otherwise.
    """
    cfg = cfg or SolverConfig()
    w = _as_point(w, "w")
    _check_closed_h(w, "w")
    if not alpha >= 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    if cfg.method == "scalar-root":
        raise DomainError("scalar-root is only available for the p2 equation")
    if w == 1:
        return SolveResult(1 + 0j, 0, True, 0.0, cfg.method)
    tol = cfg.tol_for(scalar=w.imag == 0)
    z0 = w if seed is None else _as_point(seed, "seed")
    state = {"p2": None}

    def g(z):
        if z.imag < 0 and z.imag >= -1e-15 * abs(z):
            z = complex(z.real, 0.0)
        p2 = _p2_at(alpha, z, cfg, tol, seed=state["p2"])
        if z.imag != 0:
            state["p2"] = p2
        return _rcal(alpha, w, z, p2)

    res = _solve_fixed(g, z0, cfg, tol, _half_plane_guard(w, tol))
    if not res.converged:
        raise ConvergenceError(f"p3 solve did not converge (alpha={alpha}, w={w!r})", res)
    return res


# --- grids by continuation -------------------------------------------------


def solve_on_grid(solve, alpha: float, res_, ims, cfg: SolverConfig | None = None):
    """Solve on the grid ``re + i*im`` row by row in increasing ``im``.

    Each point is seeded with the converged value of the same column one row
    down; the first row is seeded with the real-axis solution where
    ``re >= 1``. A seed that fails to converge is retried from the identity.
    Returns a list of rows of :class:`SolveResult`.
    """
    cfg = cfg or SolverConfig()
    order = sorted(range(len(ims)), key=lambda j: ims[j])
    rows: list = [None] * len(ims)
    below = [None] * len(res_)
    for k, j in enumerate(order):
        row = []
        for i, x in enumerate(res_):
            z = complex(x, ims[j])
            seed = below[i]
            if seed is None and x >= 1:
                seed = solve(alpha, complex(x, 0.0), cfg).value
            try:
                r = solve(alpha, z, cfg, seed=seed)
            except (ConvergenceError, HalfPlaneExitError):
                if seed is None:
                    raise
                r = solve(alpha, z, cfg)
            row.append(r)
            below[i] = r.value if r.value.imag > 0 else None
        rows[j] = row
    return rows
