"""Two-variable hub/spoke map and its partial-fixed-point curves.

With ``x`` the hub infection probability and ``y`` the common spoke value,
the star dynamics reduce to::

    F(x, y) = (1 - (1 - a x)(1 - b y)**n,  1 - (1 - a y)(1 - b x))

Three curve evaluators are exposed, with explicit orientation:

* ``phi1(y)``      -- x where the hub coordinate is unchanged;
* ``phi2_of_x(x)`` -- y where the spoke coordinate is unchanged;
* ``phi2_of_y(y)`` -- the same curve solved for x.

Fixed points are intersections of the two curves. Above the threshold
``b > (1 - a)/sqrt(n)`` there is exactly one besides the origin.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ConvergenceError, CurveExitError, ParameterError, StateRangeError
from .model_core import Params

CURVE_TOL = 1e-12
BISECT_YTOL = 1e-14
RESIDUAL_TOL = 1e-12
REFINE_SWEEPS = 5
REFINE_DAMPING = 0.5


class State2(NamedTuple):
    x: float
    y: float


class Regime(str, enum.Enum):
    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class StarParams:
    params: Params
    n: int

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ParameterError(f"spoke count n must be a positive integer, got {n!r}")
        object.__setattr__(self, "n", int(n))

    @classmethod
    def of(cls, a: float, b: float, n: int) -> "StarParams":
        return cls(Params(a, b), n)

    @property
    def a(self) -> float:
        return self.params.a

    @property
    def b(self) -> float:
        return self.params.b


@dataclass(frozen=True)
class FixedPointReport:
    trivial: State2
    nontrivial: State2 | None
    regime: Regime
    residual: float

    @property
    def points(self) -> list[State2]:
        return [self.trivial] + ([self.nontrivial] if self.nontrivial is not None else [])


def _unit(v: float, name: str) -> float:
    v = float(v)
    if not (0.0 <= v <= 1.0):
        raise StateRangeError(f"{name} must lie in [0, 1], got {v!r}")
    return v


def as_state2(s) -> State2:
    x, y = s
    return State2(_unit(x, "x"), _unit(y, "y"))


def _ipow(c: float, n: int) -> float:
    q = 1.0
    for _ in range(n):
        q *= c
    return q


def apply_F(sp: StarParams, s) -> State2:
    x, y = as_state2(s)
    fx, fy = kernels.NUMPY.star_step(sp.a, sp.b, sp.n, x, y)
    return State2(fx, fy)


def residual(sp: StarParams, s) -> float:
    """Sup-norm of ``F(s) - s``."""
    fx, fy = apply_F(sp, s)
    return max(abs(fx - s[0]), abs(fy - s[1]))


def g1(sp: StarParams, x: float, y: float) -> float:
    """Hub partial-fixed-point function; zero exactly on the phi1 curve."""
    return (1.0 - (1.0 - sp.a * x) * _ipow(1.0 - sp.b * y, sp.n)) - x


def g2(p: Params, x: float, y: float) -> float:
    """Spoke partial-fixed-point function; zero exactly on the phi2 curve."""
    return (1.0 - (1.0 - p.a * y) * (1.0 - p.b * x)) - y


def _p(sp_or_p) -> Params:
    return sp_or_p.params if isinstance(sp_or_p, StarParams) else sp_or_p


def phi1(sp: StarParams, y: float) -> float:
    """Hub value left unchanged by F when the spokes sit at ``y``."""
    y = _unit(y, "y")
    c = _ipow(1.0 - sp.b * y, sp.n)
    return (1.0 - c) / (1.0 - sp.a * c)


def phi1_derivatives(sp: StarParams, y: float) -> tuple[float, float]:
    """First and second derivative of :func:`phi1` at ``y``.

    With ``u = 1 - b y`` and ``D = 1 - a u**n``::

        phi1'  = n b (1-a) u**(n-1) / D**2
        phi1'' = -n b**2 (1-a) (( n-1) u**(n-2) + a (n+1) u**(2n-2)) / D**3
    """
    y = _unit(y, "y")
    a, b, n = sp.a, sp.b, sp.n
    u = 1.0 - b * y
    un1 = _ipow(u, n - 1)
    D = 1.0 - a * un1 * u
    first = n * b * (1.0 - a) * un1 / (D * D)
    bracket = a * (n + 1) * un1 * un1
    if n >= 2:
        bracket += (n - 1) * _ipow(u, n - 2)
    second = -n * b * b * (1.0 - a) * bracket / (D * D * D)
    return first, second


def phi2_of_x(p, x: float) -> float:
    """Spoke value left unchanged by F when the hub sits at ``x``."""
    p = _p(p)
    x = _unit(x, "x")
    return p.b * x / (1.0 - p.a + p.a * p.b * x)


def phi2_exit_y(p) -> float:
    """Largest y for which :func:`phi2_of_y` stays inside the unit square."""
    p = _p(p)
    return phi2_of_x(p, 1.0)


def phi2_of_y(p, y: float) -> float:
    """The spoke-invariant curve solved for the hub value.

    Raises :class:`CurveExitError` past ``y = b / (1 - a + a b)``, where the
    returned x would exceed 1.
    """
    p = _p(p)
    y = _unit(y, "y")
    exit_y = phi2_exit_y(p)
    if y > exit_y:
        raise CurveExitError(f"phi2 leaves the unit square at y={y!r} (exit at {exit_y!r})")
    # at the exit point itself the quotient can round a hair above 1
    return min(1.0, (1.0 - p.a) * y / (p.b * (1.0 - p.a * y)))


def phi2_of_y_derivatives(p, y: float) -> tuple[float, float]:
    p = _p(p)
    y = _unit(y, "y")
    w = 1.0 - p.a * y
    first = (1.0 - p.a) / (p.b * w * w)
    second = 2.0 * p.a * (1.0 - p.a) / (p.b * w * w * w)
    return first, second


def threshold(a: float, n: int) -> float:
    """Epidemic threshold ``(1 - a) / sqrt(n)`` for an n-spoke star."""
    a = float(a)
    if not (0.0 < a < 1.0):
        raise ParameterError(f"a must lie strictly inside (0, 1), got {a!r}")
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    return (1.0 - a) / math.sqrt(n)


def classify_regime(sp: StarParams) -> Regime:
    t = threshold(sp.a, sp.n)
    if sp.b < t:
        return Regime.SUBCRITICAL
    if sp.b == t:
        return Regime.CRITICAL
    return Regime.SUPERCRITICAL


def curve_gap(sp: StarParams, y: float) -> float:
    """``phi1(y) - phi2_of_y(y)``; positive below the nontrivial fixed point."""
    return phi1(sp, y) - phi2_of_y(sp.params, y)


def _bracket(sp: StarParams) -> tuple[float, float]:
    hi = phi2_exit_y(sp.params)
    lo = hi
    # h > 0 on (0, y*) and h < 0 on (y*, hi]; halve towards 0 until positive.
    for _ in range(1100):
        lo *= 0.5
        if lo == 0.0:
            break
        if curve_gap(sp, lo) > 0.0:
            return lo, hi
    raise ConvergenceError(f"could not bracket the nontrivial fixed point for {sp}")


def solve_fixed_points(sp: StarParams) -> FixedPointReport:
    """Trivial fixed point always; the unique nontrivial one above threshold.

    The nontrivial point is found by bisection on ``phi1(y) - phi2_of_y(y)``
    down to a y-bracket of 1e-14, then polished with a few damped sweeps of
    F and accepted only if its residual is at most 1e-12.
    """
    regime = classify_regime(sp)
    origin = State2(0.0, 0.0)
    if regime is not Regime.SUPERCRITICAL:
        return FixedPointReport(origin, None, regime, 0.0)

    lo, hi = _bracket(sp)
    for _ in range(200):
        if hi - lo <= BISECT_YTOL:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if curve_gap(sp, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    y = 0.5 * (lo + hi)
    best = State2(phi1(sp, y), y)
    best_res = residual(sp, best)
    cur = best
    for _ in range(REFINE_SWEEPS):
        fx, fy = apply_F(sp, cur)
        cur = State2((1.0 - REFINE_DAMPING) * cur.x + REFINE_DAMPING * fx,
                     (1.0 - REFINE_DAMPING) * cur.y + REFINE_DAMPING * fy)
        r = residual(sp, cur)
        if r < best_res:
            best, best_res = cur, r
    # the exact point lies inside the open square, but a hub value within an
    # ulp of 1 rounds to 1.0 for strongly supercritical parameters
    if best_res > RESIDUAL_TOL or not (0.0 < best.x <= 1.0 and 0.0 < best.y <= 1.0):
        raise ConvergenceError(
            f"nontrivial fixed point not resolved for {sp}: residual {best_res:.3e} at {best}")
    return FixedPointReport(origin, best, regime, best_res)
