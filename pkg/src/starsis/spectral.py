"""Linearizations of the star map and their 2x2 spectra.

Covers the Jacobian of F, the mean-value matrix family
``A(t1, t2) = [[a al, n b be], [b ga, a de]]`` used for the subcritical
contraction bound, the origin linearization ``[[a, n b], [b, a]]``, and the
n = 2 fixed-point matrix with its closed-form hub value.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ClosedFormSingularError, RegimeError, StateRangeError
from .model_core import Params
from .reduced_map import (
    Regime,
    StarParams,
    as_state2,
    classify_regime,
    phi2_of_x,
    solve_fixed_points,
    threshold,
)

SQRT2 = math.sqrt(2.0)
# m values for the n = 2 sweeps: 1 + k sqrt(2)/6 for k = 1..5, and the
# near-critical line 1 + sqrt(2)/100
SWEEP_MS = tuple(1.0 + k * SQRT2 / 6.0 for k in range(1, 6))
NEAR_CRITICAL_M = 1.0 + SQRT2 / 100.0
SINGULAR_DEN = 1e-14


@dataclass(frozen=True)
class Matrix2:
    m11: float
    m12: float
    m21: float
    m22: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.m11, self.m12, self.m21, self.m22)):
            raise ValueError(f"matrix entries must be finite: {self}")

    @property
    def trace(self) -> float:
        return self.m11 + self.m22

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    def to_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    def __matmul__(self, v):
        return (self.m11 * v[0] + self.m12 * v[1], self.m21 * v[0] + self.m22 * v[1])


@dataclass(frozen=True)
class SpectralReport:
    matrix: Matrix2
    lambda1: float | complex
    lambda2: float | complex
    discriminant: float
    contraction: bool


@dataclass(frozen=True)
class SweepRecord:
    m: float
    a: float
    b: float
    x_f: float
    y_f: float
    lambda1: float


@dataclass(frozen=True)
class ContractionReport:
    max_lambda1: float
    witness: tuple[float, float, float, float]
    max_excess_over_bound: float


def _ipow(c: float, n: int) -> float:
    q = 1.0
    for _ in range(n):
        q *= c
    return q


def mvt_matrix(sp: StarParams, s, t1: float, t2: float) -> Matrix2:
    """``A(a, b, x, y, t1, t2)``: row 1 is the hub derivative along the ray
    ``t -> t (x, y)`` at ``t1``, row 2 the spoke derivative at ``t2``.

    ``F(s) = A s`` holds for some ``t1, t2`` in [0, 1] by the scalar mean
    value theorem applied per coordinate.
    """
    x, y = as_state2(s)
    for name, t in (("t1", t1), ("t2", t2)):
        if not (0.0 <= t <= 1.0):
            raise StateRangeError(f"{name} must lie in [0, 1], got {t!r}")
    a, b, n = sp.a, sp.b, sp.n
    c = 1.0 - b * t1 * y
    qm1 = _ipow(c, n - 1)
    return Matrix2(a * qm1 * c, n * b * (1.0 - a * t1 * x) * qm1,
                   b * (1.0 - a * t2 * y), a * (1.0 - b * t2 * x))


def jacobian(sp: StarParams, s) -> Matrix2:
    """Derivative of F at ``s``."""
    return mvt_matrix(sp, s, 1.0, 1.0)


def origin_matrix(sp: StarParams) -> Matrix2:
    return Matrix2(sp.a, sp.n * sp.b, sp.b, sp.a)


def eig2(mat: Matrix2) -> SpectralReport:
    """Eigenvalues of a 2x2 matrix from its trace and determinant.

    The discriminant is formed as ``(m11 - m22)**2 + 4 m12 m21`` (no
    cancellation when the diagonal entries are close); the root of larger
    magnitude comes from the quadratic formula and the other from
    ``det / lambda``. Complex pairs are returned with ``lambda1`` the one
    with positive imaginary part.
    """
    tr = mat.trace
    det = mat.det
    diff = mat.m11 - mat.m22
    disc = diff * diff + 4.0 * mat.m12 * mat.m21
    if disc >= 0.0:
        sq = math.sqrt(disc)
        big = 0.5 * (tr + sq) if tr >= 0.0 else 0.5 * (tr - sq)
        other = det / big if big != 0.0 else 0.5 * (tr - sq)
        l1, l2 = (big, other) if big >= other else (other, big)
    else:
        sq = cmath.sqrt(disc)
        l1 = 0.5 * (tr + sq)
        l2 = l1.conjugate()
    return SpectralReport(mat, l1, l2, disc, abs(l1) < 1.0 and abs(l2) < 1.0)


def lambda1_of(mat: Matrix2) -> float:
    return eig2(mat).lambda1


def subcritical_contraction_check(sp: StarParams, grid_resolution: int = 20) -> ContractionReport:
    """Largest eigenvalue of the mean-value matrix over a grid of
    ``(x, y, t1, t2)`` in [0, 1]^4 with ``grid_resolution + 1`` points per
    axis (resolution 1 is the corners only).

    Also reports the largest excess of that eigenvalue over the pointwise
    bound ``1 - (1 - max(al, de)) a``; it must be non-positive. Raises
    ``AssertionError`` if the maximum reaches 1.
    """
    if not sp.b < threshold(sp.a, sp.n):
        raise RegimeError(f"{sp} is not strictly subcritical")
    if grid_resolution < 1:
        raise ValueError("grid_resolution must be >= 1")
    grid = np.linspace(0.0, 1.0, grid_resolution + 1)
    best, i, j, k, l, excess = kernels.active.mvt_lambda1_max(sp.a, sp.b, sp.n, grid)
    witness = (float(grid[i]), float(grid[j]), float(grid[k]), float(grid[l]))
    if not best < 1.0:
        raise AssertionError(f"mean-value matrix eigenvalue {best} >= 1 at {witness} for {sp}")
    return ContractionReport(float(best), witness, float(excess))


def _require_n2_super(p: Params):
    if classify_regime(StarParams(p, 2)) is not Regime.SUPERCRITICAL:
        raise RegimeError(f"{p} is not supercritical for n = 2 (needs b > (1 - a)/sqrt(2))")


def xf_closed_form_n2(p: Params, printed: bool = False) -> float:
    """Closed-form hub value of the nontrivial fixed point for a 2-spoke star.

    The published expression ``(P - b sqrt(Q)) / (2ab (a^2 + b^2 - a(1 + 2b)))``
    is 0/0 on the curve ``a^2 + b^2 = a(1 + 2b)`` (e.g. a = 0.25, b = 0.75).
    Multiplying through by ``P + b sqrt(Q)`` cancels that factor and leaves::

        x_f = 2 (1 - a)(2 b^2 - (1 - a)^2) / (b (P + b sqrt(Q)))

    which is used by default; its numerator is positive exactly above
    threshold. ``printed=True`` evaluates the published form and raises
    :class:`ClosedFormSingularError` near the removable singularity.
    """
    _require_n2_super(p)
    a, b = p.a, p.b
    P = 2.0 * a**3 + b**3 - 2.0 * a * a * (2.0 + b) + a * (2.0 + 2.0 * b - 2.0 * b * b)
    root = b * math.sqrt(b**4 + 4.0 * a * (1.0 - b) * (a - 1.0 - b) ** 2)
    if not printed:
        return 2.0 * (1.0 - a) * (2.0 * b * b - (1.0 - a) ** 2) / (b * (P + root))
    den = 2.0 * a * b * (a * a + b * b - a * (1.0 + 2.0 * b))
    if abs(den) < SINGULAR_DEN:
        raise ClosedFormSingularError(f"closed form singular at {p}; use the default form")
    return (P - root) / den


def fixed_point_n2(p: Params) -> tuple[float, float]:
    x = xf_closed_form_n2(p)
    return x, phi2_of_x(p, x)


def fixed_point_matrix_n2(p: Params) -> Matrix2:
    """Jacobian of the 2-spoke map at its nontrivial fixed point (closed form)."""
    x, y = fixed_point_n2(p)
    a, b = p.a, p.b
    return Matrix2(a * (1.0 - b * y) ** 2, 2.0 * b * (1.0 - a * x) * (1.0 - b * y),
                   b * (1.0 - a * y), a * (1.0 - b * x))


def lambda1_radical_n2(p: Params, printed: bool = False) -> float:
    """Largest eigenvalue of the n = 2 fixed-point matrix as a radical.

    ``printed=True`` evaluates the expression in its published form, which
    uses ``1 - a x_f`` where the trace has ``1 - b x_f`` and drops the square
    on the diagonal difference; it does not match the matrix spectrum and
    is kept only so the discrepancy can be reported. The default is the
    corrected radical.
    """
    x, y = fixed_point_n2(p)
    a, b = p.a, p.b
    u = (1.0 - b * y) ** 2
    cross = 8.0 * b * b * (1.0 - b * y) * (1.0 - a * x) * (1.0 - a * y)
    if printed:
        v = 1.0 - a * x
        rad = (u - v) * a * a + cross
        return (u + v) * a / 2.0 + (math.sqrt(rad) if rad >= 0.0 else math.nan) / 2.0
    v = 1.0 - b * x
    return (u + v) * a / 2.0 + math.sqrt((u - v) ** 2 * a * a + cross) / 2.0


@dataclass(frozen=True)
class RadicalCheck:
    eig: float
    corrected: float
    printed: float
    corrected_agrees: bool
    printed_agrees: bool


def check_lambda1_radical(p: Params, tol: float = 1e-10) -> RadicalCheck:
    """Compare both radical forms against the spectrum of the fixed-point matrix."""
    lam = float(eig2(fixed_point_matrix_n2(p)).lambda1)
    corr = lambda1_radical_n2(p)
    prin = lambda1_radical_n2(p, printed=True)
    return RadicalCheck(lam, corr, prin, abs(corr - lam) <= tol,
                        bool(abs(prin - lam) <= tol))


def eigen_sweep_line(m: float, steps: int) -> list[SweepRecord]:
    """Largest fixed-point eigenvalue along ``b = (m - a)/sqrt(2)``, n = 2.

    ``a`` takes ``steps`` evenly spaced values strictly inside
    ``(max(0, m - sqrt(2)), 1)``; every point on such a line with ``m > 1``
    is supercritical.
    """
    if not (1.0 < m < 1.0 + SQRT2):
        raise ValueError(f"m must lie in (1, 1 + sqrt(2)), got {m!r}")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    lo = max(0.0, m - SQRT2)
    if not lo < 1.0:
        raise ValueError(f"empty parameter range for m={m!r}")
    out = []
    for k in range(steps):
        a = lo + (1.0 - lo) * (k + 1) / (steps + 1)
        b = (m - a) / SQRT2
        sp = StarParams(Params(a, b), 2)
        fp = solve_fixed_points(sp).nontrivial
        lam = float(eig2(jacobian(sp, fp)).lambda1)
        out.append(SweepRecord(m, a, b, fp.x, fp.y, lam))
    return out
