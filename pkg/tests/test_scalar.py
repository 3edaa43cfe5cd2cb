import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from starsis.dynamics import LimitKind, iterate
from starsis.errors import StateRangeError
from starsis.model_core import Params
from starsis.reduced_map import StarParams, apply_F
from starsis.scalar import f_prime, f_scalar, iterate_scalar, scalar_report

unit_open = st.floats(min_value=0.01, max_value=0.99)
unit = st.floats(min_value=0.0, max_value=1.0)


def test_values():
    p = Params(0.6, 0.8)
    assert f_scalar(p, 0.0) == 0.0
    assert f_scalar(p, 5 / 6) == pytest.approx(5 / 6, abs=1e-15)
    assert f_scalar(p, 1.0) == pytest.approx(0.6 + 0.8 - 0.48, abs=1e-15)
    with pytest.raises(StateRangeError):
        f_scalar(p, 1.1)


def test_report_supercritical():
    rep = scalar_report(Params(0.6, 0.8))
    assert rep.supercritical
    assert rep.x_f == pytest.approx(5 / 6, abs=1e-15)
    assert rep.x_c == pytest.approx(5 / 12, abs=1e-15)
    assert rep.f_prime_at_0 == pytest.approx(1.4)
    assert rep.f_prime_at_1 == pytest.approx(1.4 - 0.96)


@pytest.mark.parametrize("a,b", [(0.3, 0.3), (0.5, 0.5), (0.1, 0.2)])
def test_report_subcritical(a, b):
    rep = scalar_report(Params(a, b))
    assert rep.x_f is None and rep.x_c is None and not rep.supercritical


@settings(max_examples=200, deadline=None)
@given(a=unit_open, b=unit_open, x=unit)
def test_derivative_formula(a, b, x):
    p = Params(a, b)
    h = 1e-6
    lo, hi = max(0.0, x - h), min(1.0, x + h)
    fd = (f_scalar(p, hi) - f_scalar(p, lo)) / (hi - lo)
    # f is quadratic: central differences are exact, one-sided ones are off by a b h
    assert f_prime(p, x) == pytest.approx(fd, abs=1e-8 + a * b * h)
    # positive, decreasing, bounded by a + b
    assert 0.0 < f_prime(p, x) <= a + b
    assert f_prime(p, 1.0) == pytest.approx(a + b - 2 * a * b) and a + b - 2 * a * b > 0


def test_printed_half_bound_fails():
    # the derivative bound 1/2 does not hold when a + b <= 1: f'(0) = a + b
    p = Params(0.5, 0.5)
    assert f_prime(p, 0.0) == 1.0 > 0.5


@settings(max_examples=200, deadline=None)
@given(a=unit_open, b=unit_open)
def test_fixed_point_and_critical_point(a, b):
    assume(a + b > 1.0 + 1e-6)
    p = Params(a, b)
    rep = scalar_report(p)
    assert 0.0 < rep.x_f < 1.0
    assert f_scalar(p, rep.x_f) == pytest.approx(rep.x_f, abs=1e-15)
    assert f_prime(p, rep.x_c) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(a=unit_open, b=unit_open, t=st.floats(1e-6, 1.0))
def test_monotone_escape(a, b, t):
    assume(a + b > 1.0 + 1e-6)
    p = Params(a, b)
    x = t * scalar_report(p).x_c
    assert f_scalar(p, x) > x


def test_iterate_limits():
    p = Params(0.6, 0.8)
    res = iterate_scalar(p, 1e-6)
    assert res.limit_kind is LimitKind.NONTRIVIAL
    assert res.limit == pytest.approx(5 / 6, abs=1e-8)
    zero = iterate_scalar(p, 0.0)
    assert zero.limit == 0.0 and zero.limit_kind is LimitKind.TRIVIAL
    sub = iterate_scalar(Params(0.3, 0.3), 0.9)
    assert sub.limit_kind is LimitKind.TRIVIAL and sub.limit < 1e-9
    assert iterate_scalar(p, 1e-6, max_iters=3).limit_kind is LimitKind.UNRESOLVED


@settings(max_examples=100, deadline=None)
@given(a=unit_open, b=unit_open, x=unit)
def test_diagonal_of_one_spoke_star(a, b, x):
    sp = StarParams.of(a, b, 1)
    fx, fy = apply_F(sp, (x, x))
    assert fx == fy == f_scalar(sp.params, x)


def test_one_spoke_orbit_matches_scalar():
    p = Params(0.7, 0.6)
    traj = iterate(StarParams(p, 1), (0.01, 0.01))
    res = iterate_scalar(p, 0.01)
    assert traj.final.x == traj.final.y == res.limit
