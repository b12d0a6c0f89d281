"""Command-line interface.

    pickdyn orbit --alpha 2 --a 0.5 --n 4
    pickdyn exponents --alpha 2 --a-min 0.1 --a-max 0.9 --steps 8
    pickdyn solve-p2 --alpha 2 --p3 2
    pickdyn solve-p3 --alpha 2 --p4 9.8
    pickdyn certify lemma1 --alpha 2 --phi 0,1 --samples 100000 --seed 42
    pickdyn alpha-sweep --alphas 1.1,2,5,25 --target p2

Tables are CSV and reports JSON, written to ``--out`` (atomically) or stdout.
Exit codes: 0 all checks passed and all solves converged, 1 violations or
non-convergence, 2 usage or precondition error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from pickdyn import certify, dynamics, solvers
from pickdyn.errors import ConvergenceError, DomainError, PickDynError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
RESIDUAL_LIMIT = 1e-8


class UsageError(Exception):
    pass


@dataclass
class RunRecord:
    command: str
    flags: dict
    started_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    outputs: list = field(default_factory=list)
    exit_code: int = EXIT_OK


def fmt(x) -> str:
    """Shortest round-trip decimal; integral values lose the trailing ``.0``."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    r = repr(x)
    return r[:-2] if r.endswith(".0") else r


def _write(out: str | None, text: str, record: RunRecord):
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    d = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".pickdyn-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    record.outputs.append(out)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _diag(msg: str):
    print(msg, file=sys.stderr)


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}")
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _alpha(a: float, strict: bool = False) -> float:
    if not math.isfinite(a) or a < 1 or (strict and a == 1):
        raise UsageError(f"alpha must be {'>' if strict else '>='} 1, got {a}")
    return a


# --- commands --------------------------------------------------------------


def run_orbit(args, record: RunRecord) -> int:
    params = dynamics.FamilyParams(_alpha(args.alpha), args.a)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    orbit = dynamics.critical_orbit(params, args.n)
    _write(args.out, _csv(["k", "x_k"], enumerate(orbit.points)), record)
    return EXIT_OK


def run_exponents(args, record: RunRecord) -> int:
    alpha = _alpha(args.alpha, strict=True)
    if not 0 < args.a_min < args.a_max < 1:
        raise UsageError("need 0 < a-min < a-max < 1")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    rows, unnested, worst = [], 0, 0.0
    for a in np.linspace(args.a_min, args.a_max, args.steps + 1):
        a = float(a)
        params = dynamics.FamilyParams(alpha, a)
        orbit = dynamics.critical_orbit(params, 4)
        p2 = dynamics.p2_closed(params)
        p3 = p4 = r1 = r3 = None
        if dynamics.validate_nesting(orbit, 3):
            p3 = dynamics.pn_cross_ratio(orbit, 3)
            r1 = dynamics.eq1_residual(alpha, p2, p3)
            worst = max(worst, r1)
            if dynamics.validate_nesting(orbit, 4):
                p4 = dynamics.pn_cross_ratio(orbit, 4)
                r3 = abs(p3 - dynamics.eq3_rhs(alpha, p2, p4))
                worst = max(worst, r3)
        if p4 is None:
            unnested += 1
        rows.append([a, p2, p3, p4, r1, r3])
    _write(args.out, _csv(["a", "p2", "p3", "p4", "eq1_residual", "eq3_residual"], rows), record)
    _diag(f"exponents: {len(rows)} rows, {unnested} without nested intervals, max residual {worst:.3e}")
    return EXIT_FAIL if worst > RESIDUAL_LIMIT else EXIT_OK


def _solve_points(args, name: str) -> list[float]:
    if getattr(args, name) is not None:
        return [getattr(args, name)]
    lo, hi, n = args.range
    if not (1 < lo < hi) or n < 2 or n != int(n):
        raise UsageError("--range needs 1 < LO < HI and an integer N >= 2")
    # log-spaced in the excess over 1
    return [float(x) for x in 1 + np.geomspace(lo - 1, hi - 1, int(n))]


def run_solve(args, record: RunRecord) -> int:
    alpha = _alpha(args.alpha)
    var = "p3" if args.command == "solve-p2" else "p4"
    xs = _solve_points(args, var)
    if any(not x >= 1 for x in xs):
        raise UsageError(f"{var} must be >= 1")
    cfg = solvers.SolverConfig(method=args.method, tol=args.tol, max_iter=args.max_iter)
    if args.command == "solve-p3" and args.method == "scalar-root":
        raise UsageError("solve-p3 supports --method fixed-point or cesaro")
    rows, failed = [], 0
    for x in xs:
        try:
            if args.command == "solve-p2":
                r = (solvers.solve_p2_scalar(alpha, x, cfg) if args.method == "scalar-root"
                     else solvers.solve_p2_complex(alpha, x, cfg))
                value = r.value.real if isinstance(r.value, complex) else r.value
                deriv = solvers.p2_prime(alpha, value)
            else:
                r = solvers.solve_p3_complex(alpha, x, cfg)
                value = r.value.real
                deriv = certify.forward_derivative("p3", alpha, [x])[0] if x > 1 else None
        except ConvergenceError as exc:
            _diag(f"{args.command}: {exc}")
            r = exc.result
            value, deriv = (complex(r.value).real if r else None), None
        if r is None or not r.converged:
            failed += 1
        rows.append([x, value, deriv, r.iterations if r else None, r.residual if r else None])
    _write(args.out, _csv(["x", "value", "derivative", "iterations", "residual"], rows), record)
    if failed:
        _diag(f"{args.command}: {failed} of {len(xs)} solves did not converge")
    return EXIT_FAIL if failed else EXIT_OK


def _grid(text: str | None) -> certify.GridSpec:
    if text is None:
        return certify.GridSpec()
    v = _floats(text, 6)
    return certify.GridSpec(v[0], v[1], v[2], v[3], int(v[4]), int(v[5]))


def run_certify(args, record: RunRecord) -> int:
    kind = args.kind
    if kind == "prop1":
        rep = certify.check_prop1_root(_alpha(args.alpha), _grid(args.grid), args.tol)
    elif kind == "pick":
        rep = certify.check_pick(args.target, _alpha(args.alpha), _grid(args.grid), args.tol)
    elif kind == "lemma1":
        re, im = _floats(args.phi, 2)
        if args.samples < 1:
            raise UsageError("--samples must be >= 1")
        rep = certify.check_lemma1(_alpha(args.alpha), complex(re, im), args.samples, args.seed, args.tol)
    elif kind == "cm":
        if args.order > certify.MAX_CM_ORDER:
            raise UsageError(f"--order must be <= {certify.MAX_CM_ORDER}")
        lo = certify.P3_LO_EXCESS
        xs = certify.default_real_grid(args.points, hi=args.hi, lo_excess=lo)
        gs = certify.forward_derivative(args.target, _alpha(args.alpha), xs)
        rep = certify.check_complete_monotone(xs, gs, args.order, args.tol)
        rep.params.update({"target": args.target, "alpha": args.alpha})
    elif kind == "inverse-derivative":
        lo = certify.P3_LO_EXCESS if args.target == "p3" else 1e-6
        xs = certify.default_real_grid(args.points, hi=args.hi, lo_excess=lo)
        rep = certify.check_inverse_derivative(_alpha(args.alpha), args.target, xs, args.tol)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown check {kind}")
    text = json.dumps(rep.to_dict(), indent=2, ensure_ascii=False) + "\n"
    _write(args.out, text, record)
    _diag(rep.summary())
    return EXIT_OK if rep.passed else EXIT_FAIL


def run_alpha_sweep(args, record: RunRecord) -> int:
    alphas = [_alpha(a, strict=True) for a in _floats(args.alphas)]
    lo = certify.P3_LO_EXCESS if args.target == "p3" else 1e-6
    points = args.points or (60 if args.target == "p3" else 200)
    xs = certify.default_real_grid(points, hi=args.hi, lo_excess=lo)
    rows = certify.alpha_sweep(alphas, args.target, xs, args.tol)
    for r in rows:
        if r.error:
            _diag(f"alpha-sweep: alpha={r.alpha}: {r.error}")
    _write(
        args.out,
        _csv(["alpha", "min_inverse_derivative", "passed"],
             [[r.alpha, r.min_inverse_derivative, r.passed] for r in rows]),
        record,
    )
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


# --- parser ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pickdyn", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out(sp):
        sp.add_argument("--out", help="output path (default: stdout)")

    sp = sub.add_parser("orbit", help="critical orbit x_k = f_a^k(0)")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    out(sp)

    sp = sub.add_parser("exponents", help="p2, p3, p4 and residuals over an a-grid")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--a-min", type=float, required=True)
    sp.add_argument("--a-max", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    out(sp)

    for name, var in (("solve-p2", "p3"), ("solve-p3", "p4")):
        sp = sub.add_parser(name, help=f"solve for {name[-2:]} as a function of {var}")
        sp.add_argument("--alpha", type=float, required=True)
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument(f"--{var}", type=float)
        g.add_argument("--range", type=float, nargs=3, metavar=("LO", "HI", "N"),
                       help="N points, log-spaced in the excess over 1")
        sp.add_argument("--method", choices=solvers.METHODS,
                        default="scalar-root" if var == "p3" else "fixed-point")
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--max-iter", type=int, default=10_000)
        out(sp)

    sp = sub.add_parser("certify", help="run a certificate and write a JSON report")
    kinds = sp.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    k = kinds.add_parser("pick", help="Pick + argument lessening of a solved map on a grid")
    k.add_argument("--target", choices=certify.TARGETS, required=True)
    k.add_argument("--alpha", type=float, required=True)
    k.add_argument("--grid", help="re_min,re_max,im_min,im_max,nx,ny")
    k.add_argument("--tol", type=float, default=1e-9)
    out(k)
    k = kinds.add_parser("prop1", help="argument lessening of the root map")
    k.add_argument("--alpha", type=float, required=True)
    k.add_argument("--grid")
    k.add_argument("--tol", type=float, default=1e-12)
    out(k)
    k = kinds.add_parser("lemma1", help="root map sends D_phi^- into D_r(phi)")
    k.add_argument("--alpha", type=float, required=True)
    k.add_argument("--phi", required=True, help="re,im")
    k.add_argument("--samples", type=int, default=100_000)
    k.add_argument("--seed", type=int, required=True)
    k.add_argument("--tol", type=float, default=1e-9)
    out(k)
    k = kinds.add_parser("cm", help="complete monotonicity of a map's derivative")
    k.add_argument("--target", choices=certify.TARGETS, required=True)
    k.add_argument("--alpha", type=float, required=True)
    k.add_argument("--order", type=int, default=5)
    k.add_argument("--points", type=int, default=40)
    k.add_argument("--hi", type=float, default=50.0)
    k.add_argument("--tol", type=float, default=1e-9)
    out(k)
    k = kinds.add_parser("inverse-derivative", help="inverse-map derivative stays >= 1")
    k.add_argument("--target", choices=certify.TARGETS, required=True)
    k.add_argument("--alpha", type=float, required=True)
    k.add_argument("--points", type=int, default=60)
    k.add_argument("--hi", type=float, default=1e3)
    k.add_argument("--tol", type=float, default=1e-6)
    out(k)

    sp = sub.add_parser("alpha-sweep", help="minimum inverse derivative for several alphas")
    sp.add_argument("--alphas", required=True, help="comma-separated, each > 1")
    sp.add_argument("--target", choices=certify.TARGETS, default="p2")
    sp.add_argument("--points", type=int, default=None)
    sp.add_argument("--hi", type=float, default=1e3)
    sp.add_argument("--tol", type=float, default=1e-6)
    out(sp)
    return p


COMMANDS = {
    "orbit": run_orbit,
    "exponents": run_exponents,
    "solve-p2": run_solve,
    "solve-p3": run_solve,
    "certify": run_certify,
    "alpha-sweep": run_alpha_sweep,
}


def run(argv=None) -> RunRecord:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _diag(f"pickdyn: error: {exc}")
        return RunRecord("", {}, exit_code=EXIT_USAGE)
    flags = {k: v for k, v in vars(args).items() if k not in ("command",)}
    record = RunRecord(args.command, flags)
    try:
        record.exit_code = COMMANDS[args.command](args, record)
    except (UsageError, DomainError) as exc:
        _diag(f"pickdyn {args.command}: {exc}")
        record.exit_code = EXIT_USAGE
    except ConvergenceError as exc:
        _diag(f"pickdyn {args.command}: {exc}")
        record.exit_code = EXIT_FAIL
    except PickDynError as exc:
        _diag(f"pickdyn {args.command}: {exc}")
        record.exit_code = EXIT_FAIL
    except OSError as exc:
        _diag(f"pickdyn {args.command}: {exc}")
        record.exit_code = EXIT_USAGE
    return record


def main(argv=None) -> int:
    return run(argv).exit_code


if __name__ == "__main__":
    sys.exit(main())
