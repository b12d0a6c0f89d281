"""Numerical certificates for the Pick / argument-lessening statements.

A checker never raises on a failed property: violations are counted, the worst
one is kept with its witness, and ``passed`` is ``violations == 0``.
Tolerances on values are relative to ``1 + |value|``; tolerances on angles are
absolute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pickdyn.errors import DomainError, PickDynError
from pickdyn.halfplane import arg_about, circumcircle, principal_root, sample_dminus
from pickdyn.solvers import (
    SolverConfig,
    p2_prime,
    solve_on_grid,
    solve_p2_complex,
    solve_p2_scalar,
    solve_p3_complex,
)

TARGETS = ("p2", "p3")
MAX_CM_ORDER = 5
# tolerance of the inner p3 solves feeding finite differences
FD_SOLVE_TOL = 1e-14
# p3(p4) - 1 loses ~log10(1/(p4 - 1)) digits to cancellation; finite-difference grids start here
P3_LO_EXCESS = 1e-2


@dataclass(frozen=True)
class GridSpec:
    re_min: float = -5.0
    re_max: float = 10.0
    im_min: float = 1e-3
    im_max: float = 10.0
    nx: int = 40
    ny: int = 40
    log_im: bool = True

    def __post_init__(self):
        if not self.re_min < self.re_max:
            raise DomainError("grid needs re_min < re_max")
        if not 0 < self.im_min < self.im_max:
            raise DomainError("grid needs 0 < im_min < im_max")
        if self.nx < 2 or self.ny < 2:
            raise DomainError("grid needs at least 2 points per axis")

    def re_values(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.nx)

    def im_values(self) -> np.ndarray:
        if self.log_im:
            return np.geomspace(self.im_min, self.im_max, self.ny)
        return np.linspace(self.im_min, self.im_max, self.ny)

    def points(self) -> np.ndarray:
        """Complex grid of shape ``(ny, nx)``."""
        return self.re_values()[None, :] + 1j * self.im_values()[:, None]

    def describe(self) -> str:
        return (
            f"re=[{self.re_min},{self.re_max}] im=[{self.im_min},{self.im_max}] "
            f"{self.nx}x{self.ny} {'log' if self.log_im else 'lin'}-im"
        )


def default_real_grid(n: int = 200, hi: float = 1e3, lo_excess: float = 1e-6) -> np.ndarray:
    """``1 + geomspace(lo_excess, hi - 1, n)``: log-spaced on (1, hi]."""
    return 1.0 + np.geomspace(lo_excess, hi - 1.0, n)


@dataclass
class CertReport:
    check_name: str
    params: dict
    samples: int
    violations: int
    worst_violation: float
    worst_witness: object
    passed: bool
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        w = self.worst_witness
        if isinstance(w, complex):
            w = [w.real, w.imag]
        elif w is not None:
            w = float(w)
        return {
            "check": self.check_name,
            "params": {k: str(v) for k, v in self.params.items()},
            "samples": int(self.samples),
            "violations": int(self.violations),
            "worst_violation": float(self.worst_violation),
            "worst_witness": w,
            "passed": bool(self.passed),
        }

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} {self.check_name}: {self.violations}/{self.samples} violations, "
            f"worst {self.worst_violation:.3e}"
        )


def _report(name, params, samples, excess, witnesses, tol, stats=None) -> CertReport:
    excess = np.asarray(excess, dtype=float)
    bad = int(np.count_nonzero(excess > tol))
    i = int(np.argmax(excess))
    w = witnesses[i]
    w = complex(w) if np.iscomplexobj(w) else float(w)
    return CertReport(name, params, samples, bad, float(excess[i]), w, bad == 0, stats or {})


# --- argument lessening ----------------------------------------------------


def check_prop1_root(alpha: float, grid: GridSpec | None = None, tol: float = 1e-12) -> CertReport:
    """``Arg(z**(1/alpha) - 1) <= Arg(z - 1)`` at every grid point."""
    if not alpha >= 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    grid = grid or GridSpec()
    z = grid.points().ravel()
    excess = arg_about(principal_root(z, alpha), 1) - arg_about(z, 1)
    return _report(
        "prop1-root",
        {"alpha": alpha, "grid": grid.describe(), "tol": tol},
        z.size,
        excess,
        z,
        tol,
    )


def check_pal(samples, tol: float = 1e-9, name: str = "pal", params: dict | None = None) -> CertReport:
    """Pick property and argument lessening for pairs ``(z, f(z))`` with ``z`` in H.

    Counts ``Im f(z) <= -tol (1 + |f(z)|)`` and ``Arg(f(z) - 1) > Arg(z - 1) + tol``
    separately; ``violations`` is their sum.
    """
    pairs = [(complex(z), complex(fz)) for z, fz in samples]
    if not pairs:
        raise DomainError("check_pal needs at least one sample")
    z = np.array([p[0] for p in pairs])
    fz = np.array([p[1] for p in pairs])
    if np.any(z.imag <= 0):
        raise DomainError("sample points must lie in the upper half-plane")
    pick_excess = -fz.imag / (1 + np.abs(fz))
    same = fz == 1
    arg_f = arg_about(np.where(same, 2.0, fz), 1)
    arg_excess = np.where(same, -np.inf, arg_f - arg_about(z, 1))
    n_pick = int(np.count_nonzero(pick_excess > tol))
    n_arg = int(np.count_nonzero(arg_excess > tol))
    excess = np.maximum(pick_excess, arg_excess)
    i = int(np.argmax(excess))
    p = {"tol": tol, "pick_violations": n_pick, "arg_violations": n_arg}
    p.update(params or {})
    return CertReport(
        name, p, len(pairs), n_pick + n_arg, float(excess[i]), complex(z[i]), n_pick + n_arg == 0
    )


def pal_samples(target: str, alpha: float, grid: GridSpec | None = None, cfg: SolverConfig | None = None):
    """``(z, f(z))`` pairs of a solved map on the grid, by continuation."""
    grid = grid or GridSpec()
    solve = _solver_for(target)
    res_, ims = list(grid.re_values()), list(grid.im_values())
    rows = solve_on_grid(solve, alpha, res_, ims, cfg)
    return [
        (complex(x, y), r.value) for y, row in zip(ims, rows) for x, r in zip(res_, row)
    ]


def _solver_for(target: str):
    if target == "p2":
        return solve_p2_complex
    if target == "p3":
        return solve_p3_complex
    raise DomainError(f"target must be one of {TARGETS}, got {target!r}")


def check_pick(target: str, alpha: float, grid: GridSpec | None = None, tol: float = 1e-9,
               cfg: SolverConfig | None = None) -> CertReport:
    grid = grid or GridSpec()
    samples = pal_samples(target, alpha, grid, cfg)
    return check_pal(
        samples, tol, name=f"pick-{target}", params={"alpha": alpha, "grid": grid.describe()}
    )


# --- root map and discs ----------------------------------------------------


def check_lemma1(alpha: float, phi, n_samples: int, seed: int, tol: float = 1e-9) -> CertReport:
    """The root map sends sampled points of ``D_phi^-`` into the disc ``D_{phi**(1/alpha)}``.

    ``worst_violation`` is the largest signed distance outside the target disc;
    the witness is the sampled pre-image point.
    """
    if not alpha >= 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    phi = complex(phi)
    t = sample_dminus(phi, n_samples, seed)
    target = circumcircle(principal_root(phi, alpha))
    dist = target.signed_distance(principal_root(t, alpha))
    return _report(
        "lemma1",
        {"alpha": alpha, "phi": f"{phi.real},{phi.imag}", "seed": seed, "tol": tol},
        n_samples,
        dist,
        t,
        tol,
    )


# --- complete monotonicity -------------------------------------------------


def divided_differences(xs, gs, order: int) -> list:
    """``[g[x_i], g[x_i, x_i+1], ...]`` up to ``order``; entry k has ``len(xs) - k`` values."""
    xs = np.asarray(xs, dtype=float)
    table = [np.asarray(gs, dtype=float)]
    for k in range(1, order + 1):
        prev = table[-1]
        table.append((prev[1:] - prev[:-1]) / (xs[k:] - xs[:-k]))
    return table


def check_complete_monotone(xs, gs, order: int, tol: float = 1e-9) -> CertReport:
    """Sign pattern ``(-1)**k g[x_i..x_i+k] >= 0`` for ``k = 0..order``.

    A k-th divided difference is ``g^(k)(xi) / k!`` for some ``xi``, so a
    completely monotone ``g`` shows the pattern exactly. Each order is
    normalized by its largest magnitude; a violation is a normalized value
    below ``-tol``.
    """
    xs = np.asarray(xs, dtype=float)
    gs = np.asarray(gs, dtype=float)
    if order > MAX_CM_ORDER:
        raise DomainError(f"order {order} > {MAX_CM_ORDER}: divided differences lose precision")
    if order < 0:
        raise DomainError("order must be >= 0")
    if xs.shape != gs.shape or xs.size < order + 1:
        raise DomainError(f"need at least {order + 1} matching samples")
    if np.any(np.diff(xs) <= 0):
        raise DomainError("xs must be strictly increasing")
    excess, where, per_order = [], [], []
    for k, d in enumerate(divided_differences(xs, gs, order)):
        scale = np.max(np.abs(d))
        signed = (-1) ** k * d / scale if scale > 0 else np.zeros_like(d)
        excess.append(-signed)
        where.append(xs[: d.size])
        per_order.append(int(np.count_nonzero(-signed > tol)))
    excess = np.concatenate(excess)
    where = np.concatenate(where)
    rep = _report(
        "complete-monotone",
        {"order": order, "tol": tol, "per_order_violations": per_order},
        int(excess.size),
        excess,
        where,
        tol,
    )
    return rep


# --- derivatives -----------------------------------------------------------


def _p3_real(alpha: float, w: float, cfg: SolverConfig) -> float:
    return solve_p3_complex(alpha, w, cfg).value.real


def central_difference(f, x: float, h: float) -> float:
    """Five-point central difference."""
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def forward_derivative(target: str, alpha: float, xs, cfg: SolverConfig | None = None) -> np.ndarray:
    """Derivative of ``p2(p3)`` (closed form) or ``p3(p4)`` (finite differences) on ``xs > 1``."""
    xs = np.asarray(xs, dtype=float)
    if np.any(xs <= 1):
        raise DomainError("derivative grid must lie in (1, inf)")
    if target == "p2":
        return np.array([p2_prime(alpha, solve_p2_scalar(alpha, x).value) for x in xs])
    if target == "p3":
        cfg = cfg or SolverConfig(tol=FD_SOLVE_TOL)
        out = []
        for x in xs:
            h = min(1e-3 * x, (x - 1) / 2.5)
            out.append(central_difference(lambda w: _p3_real(alpha, w, cfg), x, h))
        return np.array(out)
    raise DomainError(f"target must be one of {TARGETS}, got {target!r}")


def check_inverse_derivative(alpha: float, target: str, xs=None, tol: float = 1e-6,
                             cfg: SolverConfig | None = None) -> CertReport:
    """Forward derivative below 1 and inverse derivative at least 1 on the grid.

    ``worst_violation`` is ``max(f' - 1)`` (negative when passing).
    """
    if xs is None:
        xs = default_real_grid() if target == "p2" else default_real_grid(60, lo_excess=P3_LO_EXCESS)
    xs = np.asarray(xs, dtype=float)
    fp = forward_derivative(target, alpha, xs, cfg)
    inv = 1.0 / fp
    bad = (fp >= 1 + tol) | (inv < 1 - tol)
    i = int(np.argmax(fp))
    stats = {
        "min_inverse_derivative": float(np.min(inv)),
        "f_prime_left": float(fp[0]),
        "x_left": float(xs[0]),
        "limit_left": 1.0 / alpha,
    }
    params = {"alpha": alpha, "target": target, "tol": tol, "points": xs.size}
    params.update({k: repr(v) for k, v in stats.items()})
    n_bad = int(np.count_nonzero(bad))
    return CertReport(
        f"inverse-derivative-{target}", params, xs.size, n_bad, float(fp[i] - 1), float(xs[i]),
        n_bad == 0, stats,
    )


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    min_inverse_derivative: float
    passed: bool
    error: str = ""


def alpha_sweep(alphas, target: str, xs=None, tol: float = 1e-6,
                cfg: SolverConfig | None = None) -> list[SweepRow]:
    """Minimum inverse-map derivative for each ``alpha``; a row fails below ``1 - tol``.

    Solver failures are recorded in the row and the sweep continues.
    """
    rows = []
    for alpha in alphas:
        if not alpha > 1:
            raise DomainError(f"sweep exponents must exceed 1, got {alpha}")
        try:
            rep = check_inverse_derivative(alpha, target, xs, tol, cfg)
        except PickDynError as exc:
            rows.append(SweepRow(alpha, math.nan, False, str(exc)))
            continue
        m = rep.stats["min_inverse_derivative"]
        rows.append(SweepRow(alpha, m, m >= 1 - tol))
    return rows
