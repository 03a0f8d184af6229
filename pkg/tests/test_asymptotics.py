import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import corpus
from equivocation.asymptotics import (
    RateSpec,
    critical_rate,
    equiv_limit,
    exponent,
    exponent_zero_crossing,
    key_rate,
    minus_branch_max,
    scaled_entropy,
)
from equivocation.dist import CANON
from equivocation.errors import DomainError, HypothesisWarning, IntervalError
from equivocation.measures import cond_renyi_H, cond_renyi_H_up, shannon_cond_entropy
from equivocation.optimize import maximize_concave, maximize_on

H1 = shannon_cond_entropy(CANON)


def grid_max(f, lo, hi, points=10_001):
    t = np.linspace(lo, hi, points)
    y = np.array([f(x) for x in t])
    i = int(np.argmax(y))
    return t[i], y[i]


# ---------------------------------------------------------------- optimiser


def test_maximize_examples():
    res = maximize_concave(lambda t: -((t - 0.3) ** 2), 0, 1)
    assert res.argmax_t == pytest.approx(0.3, abs=1e-9)
    assert res.value == pytest.approx(0, abs=1e-15)
    assert maximize_concave(lambda t: t, 0, 1).argmax_t == 1.0
    assert maximize_concave(lambda t: -t, 0, 1).argmax_t == 0.0


def test_maximize_matches_grid_on_canon_objective():
    f = lambda t: scaled_entropy(CANON, t) - 0.4 * t
    res = maximize_concave(f, 0, 1)
    t_grid, v_grid = grid_max(f, 0, 1)
    assert res.value == pytest.approx(2.4263e-3, abs=1e-6)
    assert res.argmax_t == pytest.approx(0.1244, abs=1e-3)
    assert res.value >= v_grid - 1e-12
    assert abs(res.argmax_t - t_grid) <= 1e-4


@given(st.floats(-2, 2), st.floats(0.1, 5), st.floats(-1, 0), st.floats(0.01, 3))
@settings(max_examples=100, deadline=None)
def test_maximize_quadratics(center, curv, lo, width):
    hi = lo + width
    f = lambda t: -curv * (t - center) ** 2
    res = maximize_concave(f, lo, hi)
    expect = min(max(center, lo), hi)
    assert res.argmax_t == pytest.approx(expect, abs=1e-8)
    assert lo <= res.argmax_t <= hi
    assert res.value >= max(f(lo), f(hi)) - 1e-12


def test_maximize_errors():
    with pytest.raises(IntervalError):
        maximize_concave(lambda t: t, 1, 1)
    with pytest.raises(IntervalError):
        maximize_concave(lambda t: t, 0, math.inf)
    with pytest.raises(IntervalError):
        maximize_concave(lambda t: t**2, -1, 1, check_concavity=True)
    assert maximize_on(lambda t: 2 * t, 0.5, 0.5).value == 1.0


# ----------------------------------------------------------- critical rates


def test_critical_rate_examples():
    for form in ("std", "up"):
        assert critical_rate(CANON, 0, form) == pytest.approx(0.440045, abs=1e-6)
    assert critical_rate(CANON, 1, "std") == pytest.approx(0.177096 / 0.725, abs=1e-6)
    r0, rh, r1 = (critical_rate(CANON, s) for s in (0, 0.5, 1))
    assert r1 < rh < r0
    assert critical_rate(CANON, -1, "std") == pytest.approx(1.0238186, abs=1e-6)
    with pytest.raises(DomainError):
        critical_rate(CANON, -1, "up")
    with pytest.raises(DomainError):
        critical_rate(CANON, -1.5)
    with pytest.raises(ValueError):
        critical_rate(CANON, 0.5, "bogus")


def _up_scaled(src, t):
    return t * cond_renyi_H_up(src, t) if abs(t) > 1e-12 else 0.0


@pytest.mark.parametrize("src", corpus(15, 4, 4, seed0=300), ids=lambda s: f"{s.a_size}x{s.e_size}")
@pytest.mark.parametrize("t", [-0.6, -0.2, 0.3, 0.9])
def test_critical_rates_are_derivatives(src, t):
    p = np.array(src.p)
    assert critical_rate(src, t, "std") == pytest.approx(oracles.scaled_entropy_fd(p, t), abs=1e-6)
    h = 1e-5
    # Richardson-extrapolated central difference
    d1 = (_up_scaled(src, t + h) - _up_scaled(src, t - h)) / (2 * h)
    d2 = (_up_scaled(src, t + 2 * h) - _up_scaled(src, t - 2 * h)) / (4 * h)
    assert critical_rate(src, t, "up") == pytest.approx((4 * d1 - d2) / 3, abs=1e-6)


# --------------------------------------------------------- equivocation limits


def test_equiv_limit_examples():
    assert equiv_limit(CANON, 1, 0.5) == pytest.approx(0.5 - 0.321584, abs=1e-6)
    assert equiv_limit(CANON, 1, 0.2) == 0.0
    assert equiv_limit(CANON, 1, H1, "minus") == pytest.approx(0, abs=1e-9)
    _, v = grid_max(lambda t: t * (H1 - cond_renyi_H(CANON, -t)) if t > 0 else 0.0, 0, 1)
    assert v <= 1e-9


def test_equiv_limit_domain():
    with pytest.raises(DomainError):
        equiv_limit(CANON, 0, 0.5, "minus")
    with pytest.raises(DomainError):
        equiv_limit(CANON, 1.5, 0.5)
    with pytest.raises(DomainError):
        equiv_limit(CANON, 0.5, -0.1)
    with pytest.raises(DomainError):
        equiv_limit(CANON, 1.0, 0.5, "minus", "up")
    with pytest.raises(DomainError):
        RateSpec(-1.0)
    assert RateSpec(0.3, 1.0).l == 1.0


@pytest.mark.parametrize("form", ["std", "up"])
@pytest.mark.parametrize("s", [0.0, 0.25, 0.5, 1.0])
def test_plus_branch_shape(form, s):
    r = np.linspace(0, 1.4, 141)
    y = np.array([equiv_limit(CANON, s, x, "plus", form) for x in r])
    h = cond_renyi_H(CANON, s) if form == "std" else cond_renyi_H_up(CANON, s)
    assert np.all(np.diff(y) >= -1e-12)
    assert np.all(np.diff(y) <= np.diff(r) + 1e-12)
    above = r > h
    np.testing.assert_allclose(y[above], r[above] - h, atol=1e-12)
    assert np.all(y[~above] == 0)


@pytest.mark.parametrize("form", ["std", "up"])
@pytest.mark.parametrize("s", [0.2, 0.5, 0.9])
def test_minus_branch_continuity(form, s):
    rc = critical_rate(CANON, -s, form)
    h = cond_renyi_H(CANON, -s) if form == "std" else cond_renyi_H_up(CANON, -s)
    assert minus_branch_max(CANON, s, rc, form).value == pytest.approx(rc - h, abs=1e-8)


@pytest.mark.parametrize("form", ["std", "up"])
def test_minus_branch_matches_grid(form):
    s = 0.6
    for r in (0.3, 0.5, 0.6):
        if form == "std":
            f = lambda t: t / s * (r - cond_renyi_H(CANON, -t)) if t > 0 else 0.0
        else:
            from equivocation.measures import two_param_H

            f = lambda t: t / s * (r - two_param_H(CANON, -t, -s)) if t > 0 else 0.0
        rc = critical_rate(CANON, -s, form)
        if r < rc:
            _, v = grid_max(f, 0, s, 2001)
            assert equiv_limit(CANON, s, r, "minus", form) == pytest.approx(v, abs=1e-7)


# ---------------------------------------------------------------- key rates


def test_key_rate_examples():
    assert key_rate(CANON, 1, "std") == pytest.approx(0.321584, abs=1e-6)
    for form in ("std", "up"):
        assert key_rate(CANON, -0.5, form) == pytest.approx(0.440045, abs=1e-6)
        assert key_rate(CANON, 1e-9, form) == pytest.approx(H1, abs=1e-6)
    with pytest.raises(DomainError):
        key_rate(CANON, 1.5)


# ---------------------------------------------------------------- exponents


def test_exponent_examples():
    h32 = cond_renyi_H(CANON, 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        assert exponent(CANON, 0.5, h32) == pytest.approx(0, abs=1e-12)
        assert exponent(CANON, 0, 0.4, "minus") == pytest.approx(2.4263e-3, abs=1e-6)
    assert exponent(CANON, 0.3, H1 + 0.01) == 0.0


def test_hypothesis_warning():
    with pytest.warns(HypothesisWarning):
        exponent(CANON, 0.5, 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        exponent(CANON, 0.5, 0.3)
        exponent(CANON, 0.5, 0.1, check_hypothesis=False)


@pytest.mark.parametrize("sign, form", [("plus", "std"), ("plus", "up"), ("minus", "std"), ("minus", "up")])
@pytest.mark.parametrize("s", [0.0, 0.5, 0.75])
def test_exponent_nonincreasing(sign, form, s):
    r = np.linspace(0.25, 1.4, 116)
    y = np.array([exponent(CANON, s, x, sign, form, check_hypothesis=False) for x in r])
    assert np.all(np.diff(y) <= 1e-9)
    assert np.all(y >= 0)


@pytest.mark.parametrize("s", [0.0, 0.5, 0.75])
def test_minus_exponent_dominates(s):
    for r in np.linspace(0.25, 1.0, 16):
        for form in ("std", "up"):
            plus = exponent(CANON, s, r, "plus", form, check_hypothesis=False)
            minus = exponent(CANON, s, r, "minus", form, check_hypothesis=False)
            assert minus >= plus - 1e-12


@pytest.mark.parametrize("s", [0.0, 0.5, 0.75])
def test_std_zero_crossing_is_key_rate(s):
    assert exponent_zero_crossing(CANON, s, "plus", "std") == pytest.approx(key_rate(CANON, s, "std"), abs=1e-6)


@pytest.mark.parametrize("s", [0.0, 0.5, 0.75])
def test_up_zero_crossing(s):
    # the Gallager exponent's objective uses t H_{1+t}, so it vanishes at H_{1+s}
    z = exponent_zero_crossing(CANON, s, "plus", "up")
    assert z == pytest.approx(cond_renyi_H(CANON, s), abs=1e-6)
    assert z <= key_rate(CANON, s, "up") + 1e-6


def test_minus_zero_crossing_is_shannon():
    for form in ("std", "up"):
        assert exponent_zero_crossing(CANON, 0.5, "minus", form) == pytest.approx(H1, abs=1e-6)
