
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from starsis.errors import CurveExitError, ParameterError, StateRangeError
from starsis.model_core import Params
from starsis.reduced_map import (
    Regime,
    StarParams,
    apply_F,
    classify_regime,
    g1,
    g2,
    phi1,
    phi1_derivatives,
    phi2_exit_y,
    phi2_of_x,
    phi2_of_y,
    phi2_of_y_derivatives,
    residual,
    solve_fixed_points,
    threshold,
)

unit_open = st.floats(min_value=1e-3, max_value=1 - 1e-3)
unit = st.floats(min_value=0.0, max_value=1.0)
spokes = st.integers(min_value=1, max_value=12)

# Nontrivial fixed points from a 40-digit root solve of g1(x, phi2_of_x(x)) = 0.
FROZEN = [
    (0.5, 0.4, 4, 0.69769273898715422931, 0.43637259482794666374),
    (0.6, 0.8, 1, 0.83333333333333333333, 0.83333333333333333333),
    (0.3, 0.6, 2, 0.47578136697278797123, 0.36335800803724084535),
    (0.9, 0.05, 8, 0.42759129770930175912, 0.17929618002383113562),
    (0.5, 0.26, 4, 0.081159640266303053341, 0.04133086933189141772),
]


def bisect_x(sp):
    """Oracle: bisect on x along the spoke curve (the solver works in y)."""
    f = lambda x: g1(sp, x, phi2_of_x(sp.params, x))
    lo, hi = 1e-300, 1.0
    # g1 along the curve is positive just above 0 and negative at x = 1
    while f(lo) <= 0.0:
        lo *= 1e10
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def first_difference(f, y, h=1e-5):
    """Second-order difference; one-sided at the left end of [0, 1]."""
    if y - h < 0.0:
        return (-3 * f(y) + 4 * f(y + h) - f(y + 2 * h)) / (2 * h)
    return (f(y + h) - f(y - h)) / (2 * h)


def test_apply_F_by_hand():
    sp = StarParams.of(0.5, 0.5, 2)
    fx, fy = apply_F(sp, (0.2, 0.4))
    assert fx == pytest.approx(1 - 0.9 * 0.8 * 0.8, abs=1e-15)
    assert fy == pytest.approx(1 - 0.8 * 0.9, abs=1e-15)
    assert apply_F(sp, (0.0, 0.0)) == (0.0, 0.0)


def test_state_range_checked():
    sp = StarParams.of(0.5, 0.5, 2)
    with pytest.raises(StateRangeError):
        apply_F(sp, (1.2, 0.1))
    with pytest.raises(StateRangeError):
        phi1(sp, -0.1)
    with pytest.raises(ParameterError):
        StarParams.of(0.5, 0.5, 0)


@settings(max_examples=200, deadline=None)
@given(a=unit_open, b=unit_open, n=spokes, x=unit, y=unit)
def test_F_stays_in_square(a, b, n, x, y):
    fx, fy = apply_F(StarParams.of(a, b, n), (x, y))
    assert 0.0 <= fx <= 1.0 and 0.0 <= fy <= 1.0


@settings(max_examples=200, deadline=None)
@given(a=unit_open, b=unit_open, n=spokes, x=unit, y=unit, dx=unit, dy=unit)
def test_F_is_order_preserving(a, b, n, x, y, dx, dy):
    sp = StarParams.of(a, b, n)
    x2, y2 = min(1.0, x + dx * (1 - x)), min(1.0, y + dy * (1 - y))
    lo, hi = apply_F(sp, (x, y)), apply_F(sp, (x2, y2))
    assert lo.x <= hi.x and lo.y <= hi.y


@settings(max_examples=200, deadline=None)
@given(a=unit_open, b=unit_open, n=spokes, y=unit)
def test_phi1_is_hub_invariant(a, b, n, y):
    sp = StarParams.of(a, b, n)
    assert abs(g1(sp, phi1(sp, y), y)) <= 1e-14


@settings(max_examples=200, deadline=None)
@given(a=unit_open, b=unit_open, x=unit)
def test_phi2_is_spoke_invariant(a, b, x):
    p = Params(a, b)
    assert abs(g2(p, x, phi2_of_x(p, x))) <= 1e-14


@settings(max_examples=200, deadline=None)
@given(a=unit_open, b=unit_open, t=st.floats(0.0, 1.0))
def test_phi2_orientations_are_inverse(a, b, t):
    p = Params(a, b)
    y = t * phi2_exit_y(p)
    x = phi2_of_y(p, y)
    assert 0.0 <= x <= 1.0 + 1e-15
    assert phi2_of_x(p, min(x, 1.0)) == pytest.approx(y, abs=1e-13)


def test_phi2_exit():
    p = Params(0.5, 0.4)
    y_exit = phi2_exit_y(p)
    assert y_exit == pytest.approx(0.4 / (0.5 + 0.2))
    with pytest.raises(CurveExitError):
        phi2_of_y(p, min(1.0, y_exit * (1 + 1e-9)))


def test_curves_through_origin():
    sp = StarParams.of(0.3, 0.7, 5)
    assert phi1(sp, 0.0) == 0.0 and phi2_of_x(sp.params, 0.0) == 0.0


@pytest.mark.parametrize("a,b,n", [(0.5, 0.4, 4), (0.2, 0.9, 1), (0.8, 0.1, 7), (0.6, 0.3, 2)])
@pytest.mark.parametrize("y", [0.0, 0.1, 0.5, 0.9])
def test_phi1_derivatives_match_finite_differences(a, b, n, y):
    sp = StarParams.of(a, b, n)
    fd1 = first_difference(lambda t: phi1(sp, t), y)
    d1, d2 = phi1_derivatives(sp, y)
    assert d1 == pytest.approx(fd1, abs=1e-7)
    yc = min(max(y, 1e-3), 1 - 1e-3)
    h = 1e-4
    fd2 = (phi1(sp, yc + h) - 2 * phi1(sp, yc) + phi1(sp, yc - h)) / (h * h)
    assert phi1_derivatives(sp, yc)[1] == pytest.approx(fd2, abs=1e-5)
    # phi1 is increasing and concave
    assert d1 > 0 and d2 <= 0


def test_phi1_slope_at_origin():
    sp = StarParams.of(0.4, 0.3, 3)
    assert phi1_derivatives(sp, 0.0)[0] == pytest.approx(3 * 0.3 / 0.6, rel=1e-14)


@pytest.mark.parametrize("y", [0.0, 0.2, 0.5])
def test_phi2_of_y_derivatives(y):
    p = Params(0.5, 0.6)
    h = 1e-5
    d1, d2 = phi2_of_y_derivatives(p, y)
    assert d1 == pytest.approx(first_difference(lambda t: phi2_of_y(p, t), y), abs=1e-8)
    yc = max(y, 1e-3)
    h = 1e-4
    fd2 = (phi2_of_y(p, yc + h) - 2 * phi2_of_y(p, yc) + phi2_of_y(p, yc - h)) / h**2
    assert phi2_of_y_derivatives(p, yc)[1] == pytest.approx(fd2, abs=1e-5)
    assert d1 > 0 and d2 > 0


def test_threshold_values():
    assert threshold(0.5, 4) == 0.25
    assert threshold(0.2, 1) == pytest.approx(0.8)
    with pytest.raises(ParameterError):
        threshold(1.0, 4)
    with pytest.raises(ParameterError):
        threshold(0.5, 0)


def test_regime_labels():
    assert classify_regime(StarParams.of(0.5, 0.2, 4)) is Regime.SUBCRITICAL
    assert classify_regime(StarParams.of(0.5, 0.25, 4)) is Regime.CRITICAL
    assert classify_regime(StarParams.of(0.5, 0.3, 4)) is Regime.SUPERCRITICAL
    assert str(Regime.CRITICAL) == "Critical"


@pytest.mark.parametrize("a,b,n,x,y", FROZEN)
def test_fixed_point_frozen(a, b, n, x, y):
    rep = solve_fixed_points(StarParams.of(a, b, n))
    assert rep.regime is Regime.SUPERCRITICAL
    assert rep.nontrivial.x == pytest.approx(x, abs=1e-13)
    assert rep.nontrivial.y == pytest.approx(y, abs=1e-13)
    assert rep.residual <= 1e-12
    assert rep.points[0] == (0.0, 0.0)


@pytest.mark.parametrize("b", [0.1, 0.25])
def test_no_nontrivial_point_at_or_below_threshold(b):
    rep = solve_fixed_points(StarParams.of(0.5, b, 4))
    assert rep.nontrivial is None and rep.points == [(0.0, 0.0)]


@settings(max_examples=150, deadline=None)
@given(a=unit_open, b=unit_open, n=spokes)
def test_solver_matches_independent_bisection(a, b, n):
    sp = StarParams.of(a, b, n)
    assume(b > threshold(a, n) * (1 + 1e-3))
    fp = solve_fixed_points(sp).nontrivial
    x = bisect_x(sp)
    # the root is a transversal crossing; compare in x, then on the curve in y
    assert fp.x == pytest.approx(x, abs=1e-9)
    assert residual(sp, fp) <= 1e-12
    assert 0.0 < fp.x <= 1.0 and 0.0 < fp.y < 1.0


def test_nontrivial_point_is_on_both_curves():
    sp = StarParams.of(0.7, 0.3, 3)
    fp = solve_fixed_points(sp).nontrivial
    assert phi1(sp, fp.y) == pytest.approx(fp.x, abs=1e-12)
    assert phi2_of_x(sp.params, fp.x) == pytest.approx(fp.y, abs=1e-12)


def test_near_critical_point_resolved():
    t = threshold(0.5, 4)
    rep = solve_fixed_points(StarParams.of(0.5, t * (1 + 1e-6), 4))
    assert rep.nontrivial is not None
    assert 0 < rep.nontrivial.x < 1e-4
