import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pickdyn.certify import (
    GridSpec,
    alpha_sweep,
    central_difference,
    check_complete_monotone,
    check_inverse_derivative,
    check_lemma1,
    check_pal,
    check_pick,
    check_prop1_root,
    default_real_grid,
    divided_differences,
    forward_derivative,
)
from pickdyn.errors import DegenerateError, DomainError
from pickdyn.halfplane import arg_about, principal_root
from pickdyn.solvers import p2_prime, solve_p2_scalar

SMALL = GridSpec(nx=12, ny=10)
CM_XS = 1 + np.geomspace(1e-2, 49, 40)


# grid and report plumbing

def test_gridspec_validation():
    for kw in [dict(re_min=1, re_max=0), dict(im_min=0), dict(im_min=5, im_max=1), dict(nx=1)]:
        with pytest.raises(DomainError):
            GridSpec(**kw)


def test_gridspec_points():
    g = GridSpec()
    pts = g.points()
    assert pts.shape == (40, 40)
    assert pts.imag.min() == pytest.approx(1e-3) and pts.imag.max() == pytest.approx(10)
    assert pts.real.min() == -5 and pts.real.max() == 10


def test_real_grid():
    xs = default_real_grid()
    assert xs.size == 200
    assert xs[0] == pytest.approx(1 + 1e-6) and xs[-1] == pytest.approx(1e3)
    assert np.all(np.diff(xs) > 0)


def test_report_dict_key_order():
    d = check_prop1_root(2, SMALL).to_dict()
    assert list(d) == ["check", "params", "samples", "violations", "worst_violation", "worst_witness", "passed"]
    assert all(isinstance(v, str) for v in d["params"].values())
    json.dumps(d)


# argument lessening of the root map

def test_prop1_identity():
    rep = check_prop1_root(1)
    assert rep.passed and rep.violations == 0 and rep.worst_violation == 0


def test_prop1_margin_at_i():
    margin = arg_about(1j, 1) - arg_about(principal_root(1j, 2), 1)
    assert margin == pytest.approx(math.pi / 8, abs=1e-14)
    grid = GridSpec(re_min=0, re_max=1, im_min=1, im_max=2, nx=2, ny=2, log_im=False)
    rep = check_prop1_root(2, grid)
    assert rep.passed and rep.worst_violation < 0


@pytest.mark.parametrize("alpha", [1.5, 2, 5, 25])
def test_prop1_default_grid(alpha):
    rep = check_prop1_root(alpha)
    assert rep.passed and rep.samples == 1600


# check_pal

def test_pal_identity():
    pts = GridSpec().points().ravel()
    assert check_pal([(z, z) for z in pts]).passed


def test_pal_adversarial():
    rep = check_pal([(1j, -1j)])
    assert rep.violations == 1 and not rep.passed
    assert rep.params["pick_violations"] == 1


@settings(max_examples=100, deadline=None)
@given(x=st.floats(-10, 10), y=st.floats(1e-3, 10), fx=st.floats(-10, 10), fy=st.floats(1e-3, 10))
def test_pal_conjugated_always_fails(x, y, fx, fy):
    assert not check_pal([(complex(x, y), complex(fx, -fy))]).passed


def test_pal_argument_violation():
    # image further round from 1 than z
    rep = check_pal([(3 + 0.1j, -1 + 1j)])
    assert rep.params["arg_violations"] == 1 and rep.params["pick_violations"] == 0


def test_pal_errors():
    with pytest.raises(DomainError):
        check_pal([])
    with pytest.raises(DomainError):
        check_pal([(-1j, 1j)])


@pytest.mark.parametrize("target", ["p2", "p3"])
def test_pick_small_grid(target):
    rep = check_pick(target, 2, SMALL)
    assert rep.passed and rep.samples == 120


def test_pick_bad_target():
    with pytest.raises(DomainError):
        check_pick("p4", 2, SMALL)


# root map on D_phi^-

def test_lemma1_alpha2_phi_i():
    rep = check_lemma1(2, 1j, 100_000, 42)
    assert rep.passed and rep.violations == 0


@pytest.mark.parametrize("alpha", [1.1, 5, 25])
@pytest.mark.parametrize("phi", [0.5 + 0.5j, 2 + 3j, -1 + 0.2j])
def test_lemma1_grid(alpha, phi):
    assert check_lemma1(alpha, phi, 10_000, 42).passed


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-5, 5), y=st.floats(0.05, 5), seed=st.integers(0, 2**64 - 1))
def test_lemma1_identity_map(x, y, seed):
    rep = check_lemma1(1, complex(x, y), 2000, seed)
    assert rep.passed and rep.worst_violation <= 1e-12


def test_lemma1_deterministic():
    a = check_lemma1(5, 2 + 3j, 5000, 11)
    b = check_lemma1(5, 2 + 3j, 5000, 11)
    assert a.to_dict() == b.to_dict()


def test_lemma1_errors():
    with pytest.raises(DegenerateError):
        check_lemma1(2, -1j, 10, 1)
    with pytest.raises(DomainError):
        check_lemma1(0.5, 1j, 10, 1)


# complete monotonicity

def test_divided_differences_polynomial():
    xs = np.array([0.0, 1, 3, 4, 7, 8])
    gs = xs**3 - 2 * xs
    dd = divided_differences(xs, gs, 4)
    assert np.allclose(dd[3], 1.0)
    assert np.allclose(dd[4], 0.0, atol=1e-12)


@pytest.mark.parametrize("order", range(6))
def test_cm_inverse(order):
    xs = CM_XS
    assert check_complete_monotone(xs, 1 / xs, order).passed


def test_cm_oscillation_fails():
    xs = CM_XS
    rep = check_complete_monotone(xs, 2 + np.sin(xs), 2)
    assert not rep.passed and rep.violations > 0


@pytest.mark.parametrize("alpha", [1.5, 2, 5])
def test_cm_p2_derivative(alpha):
    gs = [p2_prime(alpha, solve_p2_scalar(alpha, x).value) for x in CM_XS]
    for k in range(6):
        assert check_complete_monotone(CM_XS, gs, k).passed


def test_cm_linear_model_control():
    gs = 0.5 / np.sqrt(CM_XS - 0.75)
    for k in range(6):
        assert check_complete_monotone(CM_XS, gs, k).passed


def test_cm_guards():
    with pytest.raises(DomainError):
        check_complete_monotone(CM_XS, 1 / CM_XS, 6)
    with pytest.raises(DomainError):
        check_complete_monotone(CM_XS[:3], 1 / CM_XS[:3], 3)
    with pytest.raises(DomainError):
        check_complete_monotone(CM_XS[::-1], 1 / CM_XS, 2)


# derivatives

def test_central_difference_exact_on_quartic():
    assert central_difference(lambda x: x**4, 2.0, 1e-2) == pytest.approx(32, rel=1e-10)


def test_forward_derivative_limit():
    fp = forward_derivative("p2", 2, [1 + 1e-8, 7.0])
    assert fp[0] == pytest.approx(0.5, abs=1e-4)
    assert fp[1] == pytest.approx(1 / 11, rel=1e-12)


def test_inverse_derivative_alpha2():
    rep = check_inverse_derivative(2, "p2")
    assert rep.passed
    assert rep.stats["f_prime_left"] == pytest.approx(0.5, abs=1e-4)


def test_p3_identity_at_alpha_one():
    xs = default_real_grid(30, hi=50, lo_excess=1e-2)
    fp = forward_derivative("p3", 1, xs)
    assert np.max(np.abs(fp - 1)) <= 1e-6


@pytest.mark.parametrize("alpha", [1.01, 1.5, 2, 3])
def test_inverse_derivative_p3(alpha):
    rep = check_inverse_derivative(alpha, "p3", default_real_grid(25, hi=100, lo_excess=1e-2))
    assert rep.passed


def test_gradient_check():
    for x in np.geomspace(1.01, 100, 50):
        h = 1e-4 * x
        fd = central_difference(lambda p: solve_p2_scalar(2, p).value, x, h)
        exact = p2_prime(2, solve_p2_scalar(2, x).value)
        assert fd == pytest.approx(exact, rel=1e-6)


# alpha sweep

def test_sweep_p2():
    rows = alpha_sweep([1.1, 2, 5, 25, 100], "p2")
    for r in rows:
        assert r.passed and not r.error
        assert r.min_inverse_derivative == pytest.approx(r.alpha, rel=1e-4)


def test_sweep_duplicate_rows_identical():
    a, b = alpha_sweep([2.5, 2.5], "p2", default_real_grid(30))
    assert a == b


def test_sweep_rejects_alpha_one():
    with pytest.raises(DomainError):
        alpha_sweep([1.0, 2.0], "p2")
